#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sectoral/criterion.hpp"
#include "sectoral/discretize.hpp"
#include "sectoral/operator_model.hpp"
#include "sectoral/spec_io.hpp"
#include "sectoral/spectra.hpp"

namespace sectoral {

struct AnalyzeOptions {
    std::vector<double> box;   // hypothesis sample box; default 8 per axis
    std::optional<double> p;   // extra probe exponent
    bool empirical = false;    // also run a small discretization
    int fov_angles = 128;
    int empirical_n = 0;       // 0: 200 points in 1D, 24 per axis in 2D
};

inline json sector_to_json(const Sector& s) {
    json j{{"theta_min", s.theta_min}, {"theta_max", s.theta_max}, {"opening", s.opening()},
           {"shift", s.shift},         {"rotation", s.rotation}};
    if (!s.note.empty()) j["note"] = s.note;
    return j;
}

inline json hypotheses_to_json(const HypothesisReport& r) {
    json j{{"lambda_star_estimate", r.lambda_star_estimate},
           {"eq2_ratio_sup", std::isfinite(r.eq2_ratio_sup) ? json(r.eq2_ratio_sup) : json("inf")},
           {"eq4_relative_growth_ok", r.eq4_relative_growth_ok},
           {"eq4_method", r.eq4_method},
           {"eq5_proper", r.eq5_proper},
           {"sample_count", r.sample_count},
           {"sample_box", {{"lower", r.box.lower}, {"upper", r.box.upper}}}};
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

inline json signature_to_json(const GrowthSignature& g) {
    return json{{"gammas", g.gammas}, {"constants", g.constants}, {"valid", g.valid}, {"kappa", g.kappa}};
}

/// Numeric sector of P + shift from the field of values of a small discretization.
inline Sector numeric_sector(const OperatorSpec& s, double shift, int n_angles, int n = 0) {
    const int pts = n > 0 ? n : (s.dimension == 1 ? 200 : 24);
    const double L = default_halfwidth(s, 0.0, 1.0);
    const AssembledOperator P = assemble_P(s, make_grid(s, L, pts));
    const Eigen::MatrixXcd M = shifted(P.matrix, complex_t{-shift, 0.0});
    FieldOfValues fov = field_of_values_boundary(M, n_angles);
    Sector out = fov.sector;
    // The vertex 0 belongs to the closure of the sector of a positive-type operator.
    out.theta_min = std::min(out.theta_min, 0.0);
    out.theta_max = std::max(out.theta_max, 0.0);
    out.shift = shift;
    out.note = "numeric estimate from a " + std::to_string(pts) + "-point field of values";
    return out;
}

struct AnalysisReport {
    json report;
    CompletenessVerdict verdict;
    std::optional<Rational> p_exact;
    double p_crit = 0.0;
};

/// Threshold, sector and completeness verdict for a spec. Discretizes only
/// for custom operators or when `empirical` is set.
inline AnalysisReport analyze(const OperatorSpec& spec, const AnalyzeOptions& opt = {}) {
    validate(spec);
    AnalysisReport out;
    json& j = out.report;
    j["family"] = std::string(to_string(spec.family_tag()));
    j["spec_hash"] = spec_hash(spec);

    const HypothesisReport hyp = validate_hypotheses(spec, opt.box);
    j["hypotheses"] = hypotheses_to_json(hyp);
    const GrowthSignature sig = growth_signature(spec, 10.0, opt.box);
    j["signature"] = signature_to_json(sig);

    if (sig.valid) {
        out.p_exact = schatten_threshold(sig, spec.dimension, spec.domain);
        out.p_crit = out.p_exact->to_double();
        j["p_crit"] = json{{"num", out.p_exact->num()}, {"den", out.p_exact->den()}};
        j["method"] = "symbolic";
    } else {
        out.p_crit = probe_threshold(spec);
        j["p_crit"] = out.p_crit;
        j["method"] = "quadrature";
    }
    if (opt.p) {
        const SchattenVerdict pv = schatten_integral_probe(spec, *opt.p);
        j["probe"] = json{{"p", *opt.p}, {"convergence_class", to_string(pv.convergence)},
                          {"fitted_ratio", pv.fitted_ratio}, {"shell_integrals", pv.shell_integrals}};
    }

    const double shift = std::max(0.0, hyp.lambda_star_estimate);
    bool dilation_used = false;
    double dil_alpha = 0.0;
    Sector sector;
    std::string sector_source = "analytic";
    if (spec.family_tag() == FamilyTag::dilated_model) {
        const int m = spec.family->m, k = spec.family->k;
        const double a_opt = optimal_alpha(m, k);
        const OperatorSpec dil = dilate(spec, a_opt - spec.family->alpha);
        sector = analytic_sector(dil, hyp.lambda_star_estimate);
        dilation_used = true;
        dil_alpha = a_opt;
        const Eq49Result e49 = eq49_check(m, k);
        const Sector plain = analytic_sector(make_dilated_model(m, k, 0.0), hyp.lambda_star_estimate);
        const CompletenessVerdict undilated = completeness_verdict(out.p_crit, plain, false);
        j["dilated_model"] = json{
            {"optimal_alpha", a_opt},
            {"eq49", {{"lhs", e49.lhs.str()}, {"rhs", e49.rhs.str()}, {"holds", e49.holds}}},
            {"no_dilation_condition", no_dilation_condition(m, k)},
            {"undilated", {{"sector", sector_to_json(plain)}, {"margin", undilated.margin},
                           {"verdict", to_string(undilated.outcome)}}}};
    } else if (spec.family_tag() == FamilyTag::custom) {
        sector = numeric_sector(spec, shift, opt.fov_angles, opt.empirical_n);
        sector_source = "numeric";
    } else {
        sector = analytic_sector(spec, hyp.lambda_star_estimate);
    }
    out.verdict = completeness_verdict(out.p_crit, sector, dilation_used);
    j["sector"] = sector_to_json(sector);
    j["sector"]["source"] = sector_source;
    j["verdict"] = to_string(out.verdict.outcome);
    j["margin"] = out.verdict.margin;
    j["dilation"] = json{{"used", dilation_used}, {"alpha", dil_alpha}};
    if (!sector.note.empty() && spec.family_tag() == FamilyTag::holomorphic_2d) j["metadata"] = sector.note;

    if (opt.empirical && spec.family_tag() != FamilyTag::custom) {
        const OperatorSpec target =
            spec.family_tag() == FamilyTag::dilated_model ? dilate(spec, dil_alpha - spec.family->alpha) : spec;
        Sector emp = numeric_sector(target, shift, opt.fov_angles, opt.empirical_n);
        j["empirical"] = json{{"field_of_values_sector", sector_to_json(emp)}};
        if (dilation_used) {
            // Report the sector of e^{-2i alpha} A_alpha, as the analytic one is.
            j["empirical"]["rotation"] = -2.0 * dil_alpha;
            j["empirical"]["field_of_values_sector"]["theta_min"] = emp.theta_min - 2.0 * dil_alpha;
            j["empirical"]["field_of_values_sector"]["theta_max"] = emp.theta_max - 2.0 * dil_alpha;
        }
    }
    return out;
}

} // namespace sectoral
