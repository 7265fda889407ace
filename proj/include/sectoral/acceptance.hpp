#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <nlohmann/json.hpp>

#include "sectoral/analysis.hpp"
#include "sectoral/criterion.hpp"
#include "sectoral/discretize.hpp"
#include "sectoral/export.hpp"
#include "sectoral/operator_model.hpp"
#include "sectoral/spectra.hpp"

namespace sectoral {

// Independent reference values. Each oracle uses a method unrelated to the
// finite-difference pipeline it checks; its output is frozen below and the
// frozen copy is re-derived by the unit tests.
namespace oracle {

inline constexpr double cubic_ground_state = 1.1562670719881;
inline constexpr double airy_zeros_frozen[3] = {-2.338107410459767, -4.087949444130970, -5.520559828095551};

/// Ai and Ai' by Maclaurin series (adequate for |x| <= 8).
inline std::pair<double, double> airy_ai(double x) {
    constexpr double c1 = 0.355028053887817239260, c2 = 0.258819403792806798405;
    const double x3 = x * x * x;
    double f = 0, g = 0, fp = 0, gp = 0;
    double t = 1.0, s = x;   // terms of f and g
    double tp = 0.0, sp = 1.0; // their derivatives
    for (int k = 0; k < 200; ++k) {
        f += t;
        g += s;
        fp += tp;
        gp += sp;
        const double a = (3.0 * k + 2) * (3.0 * k + 3), b = (3.0 * k + 3) * (3.0 * k + 4);
        tp = (3.0 * k + 3) * t * x * x / a;
        t = t * x3 / a;
        sp = (3.0 * k + 4) * s * x * x / b;
        s = s * x3 / b;
        if (std::fabs(t) + std::fabs(s) < 1e-18 * (std::fabs(f) + std::fabs(g)) && k > 4) break;
    }
    return {c1 * f - c2 * g, c1 * fp - c2 * gp};
}

/// j-th zero of Ai (j >= 1) by Newton from the asymptotic guess.
inline double airy_zero(int j) {
    const double t = 3.0 * std::numbers::pi * (4.0 * j - 1.0) / 8.0;
    double x = -std::pow(t, 2.0 / 3.0);
    for (int it = 0; it < 50; ++it) {
        const auto [ai, aip] = airy_ai(x);
        const double dx = ai / aip;
        x -= dx;
        if (std::fabs(dx) < 1e-15 * std::fabs(x)) break;
    }
    return x;
}

/// Eigenvalues of -d^2/dx^2 + i x^3 in a truncated Hermite-function basis of
/// frequency omega, by Eigen's complex QR (not LAPACK).
inline std::vector<complex_t> cubic_hermite_spectrum(int N, double omega) {
    const int M = N + 4;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(M, M);
    for (int n = 0; n + 1 < M; ++n) X(n, n + 1) = X(n + 1, n) = std::sqrt((n + 1) / (2.0 * omega));
    const Eigen::MatrixXd X3 = X * X * X;
    Eigen::MatrixXcd H(N, N);
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) {
            double p2 = 0.0;
            if (r == c) p2 = 0.5 * omega * (2.0 * r + 1.0);
            if (c == r + 2) p2 = -0.5 * omega * std::sqrt((r + 1.0) * (r + 2.0));
            if (r == c + 2) p2 = -0.5 * omega * std::sqrt((c + 1.0) * (c + 2.0));
            H(r, c) = complex_t{p2, X3(r, c)};
        }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H, false);
    std::vector<complex_t> ev(es.eigenvalues().data(), es.eigenvalues().data() + N);
    std::sort(ev.begin(), ev.end(), modulus_less);
    return ev;
}

/// int_{R^d} (|xi|^2 + m)^{-p} by double-exponential quadrature of the radial form.
inline double xi_integral_numeric(double p, int d, double m) {
    boost::math::quadrature::exp_sinh<double> q;
    if (d == 1) return 2.0 * q.integrate([&](double r) { return std::pow(r * r + m, -p); }, 0.0, INFINITY);
    return 2.0 * std::numbers::pi * q.integrate([&](double r) { return r * std::pow(r * r + m, -p); }, 0.0, INFINITY);
}

} // namespace oracle

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::vector<std::string> failures;
    json metrics = json::object();
    double seconds = 0.0;       // wall time, never written to the report
    double budget_seconds = 0.0;
};

struct SuiteOptions {
    std::uint64_t seed = 20240601;
    std::function<void(const CriterionResult&)> on_result; // progress callback
};

namespace detail {

class Checker {
  public:
    explicit Checker(CriterionResult& r) : r_(r) {}

    bool operator()(bool ok, const std::string& what) {
        if (!ok) r_.failures.push_back(what);
        return ok;
    }

  private:
    CriterionResult& r_;
};

inline std::string fmt(double x) { return format_double(x); }

inline double rel_err(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

inline OperatorSpec laplacian_1d() {
    OperatorSpec s;
    s.dimension = 1;
    s.angles = {0.0};
    s.A.components = {ScalarField(1)};
    s.V1 = ScalarField(1);
    s.V2 = ScalarField(1);
    return s;
}

// Eigenvalues of an assembled matrix; exactly Hermitian matrices use the symmetric solver.
inline std::vector<complex_t> spectrum_of(const AssembledOperator& op) {
    const bool herm = is_hermitian_kind(op.kind) || op.matrix == op.matrix.adjoint();
    return eigenvalues(op.matrix, herm).eigenvalues;
}

inline std::vector<double> resolvent_values(const OperatorSpec& s, const Grid& g, OperatorKind kind, Stencil st,
                                            complex_t shift) {
    const AssembledOperator op = kind == OperatorKind::P ? assemble_P(s, g, st)
                                                         : assemble_selfadjoint(s, g, SelfAdjointVariant::absV, st);
    return resolvent_singular_values(op.matrix, shift);
}

inline double lambda_star(const OperatorSpec& s) { return validate_hypotheses(s).lambda_star_estimate; }

inline json fit_json(const DecayFit& f) {
    json j{{"p_estimate", f.p_estimate}, {"slope", f.slope}, {"window", {f.window_lo, f.window_hi}},
           {"residual_rms", f.residual_rms}, {"grid_converged", f.grid_converged}};
    if (f.slope_doubled) {
        j["slope_doubled"] = *f.slope_doubled;
        j["slope_change"] = f.slope_change;
    }
    return j;
}

// Shared between criteria 5 and 6 within one suite run.
struct DilatedDecay {
    bool computed = false;
    DecayFit fit_P, fit_absV;
    int n = 60;
    double L = 14.0;
};

} // namespace detail

inline CriterionResult criterion_thresholds() {
    CriterionResult r{1, "threshold_formulas"};
    detail::Checker check(r);
    int cases = 0;
    for (int a : {1, 2, 3, 4, 6}) {
        const Rational got = schatten_threshold(growth_signature(make_oscillator_1d(std::numbers::pi / 4.0, a)), 1);
        const Rational want = Rational(1, 2) + Rational(1, a);
        check(got == want, "oscillator alpha=" + std::to_string(a) + ": " + got.str() + " != " + want.str());
        ++cases;
    }
    for (int n : {1, 2, 3}) {
        const Rational got = schatten_threshold(growth_signature(make_holomorphic_2d(n)), 2);
        const Rational want = Rational(1) + Rational(2, n);
        check(got == want, "holomorphic n=" + std::to_string(n) + ": " + got.str() + " != " + want.str());
        ++cases;
    }
    for (int m = 2; m <= 6; ++m)
        for (int k = 1; k <= 6; ++k) {
            const Rational got = schatten_threshold(growth_signature(make_dilated_model(m, k)), 2);
            const Rational want((2 * k + 1) * m - 1, 2 * k * (m - 1));
            check(got == want, "dilated (" + std::to_string(m) + "," + std::to_string(k) + "): " + got.str() +
                                   " != " + want.str());
            ++cases;
        }
    r.metrics["cases"] = cases;
    return r;
}

inline CriterionResult criterion_probe() {
    CriterionResult r{2, "quadrature_probe"};
    detail::Checker check(r);
    for (int a : {2, 4}) {
        const OperatorSpec s = make_oscillator_1d(0.0, a);
        const double pc = 0.5 + 1.0 / a;
        const SchattenVerdict hi = schatten_integral_probe(s, pc + 0.2);
        const SchattenVerdict lo = schatten_integral_probe(s, pc - 0.2);
        check(hi.convergence == ConvergenceClass::convergent,
              "alpha=" + std::to_string(a) + " p_crit+0.2 gave " + to_string(hi.convergence));
        check(lo.convergence == ConvergenceClass::divergent,
              "alpha=" + std::to_string(a) + " p_crit-0.2 gave " + to_string(lo.convergence));
        r.metrics["alpha_" + std::to_string(a)] =
            json{{"above", to_string(hi.convergence)}, {"above_ratio", hi.fitted_ratio},
                 {"below", to_string(lo.convergence)}, {"below_ratio", lo.fitted_ratio}};
    }
    return r;
}

inline CriterionResult criterion_completeness_table() {
    CriterionResult r{3, "completeness_table"};
    detail::Checker check(r);
    const double pi = std::numbers::pi;
    auto verdict = [](const OperatorSpec& s) { return analyze(s).verdict.outcome; };
    const Outcome airy_lo = verdict(make_airy_half_line(2.0 * pi / 3.0 - 0.05));
    const Outcome airy_hi = verdict(make_airy_half_line(2.0 * pi / 3.0 + 0.05));
    check(airy_lo == Outcome::complete_span, "airy below 2pi/3: " + to_string(airy_lo));
    check(airy_hi != Outcome::complete_span, "airy above 2pi/3: " + to_string(airy_hi));
    const Outcome hp_lo = verdict(make_half_plane_model(pi / 3.0 - 0.05));
    const Outcome hp_hi = verdict(make_half_plane_model(pi / 3.0 + 0.05));
    check(hp_lo == Outcome::complete_span, "half-plane below pi/3: " + to_string(hp_lo));
    check(hp_hi != Outcome::complete_span, "half-plane above pi/3: " + to_string(hp_hi));
    const Outcome sc3 = verdict(make_oscillator_1d(pi / 2.0, 3.0, 1.0, true));
    const Outcome sc2 = verdict(make_oscillator_1d(pi / 2.0, 2.0, 1.0, true));
    check(sc3 == Outcome::complete_span, "sign-changing alpha=3: " + to_string(sc3));
    check(sc2 == Outcome::inconclusive, "sign-changing alpha=2: " + to_string(sc2));
    int dil_ok = 0;
    for (int m = 2; m <= 6; ++m)
        for (int k = 1; k <= 6; ++k) {
            const Outcome o = verdict(make_dilated_model(m, k));
            if (check(o == Outcome::infinite_discrete_spectrum_via_dilation,
                      "dilated (" + std::to_string(m) + "," + std::to_string(k) + "): " + to_string(o)))
                ++dil_ok;
        }
    r.metrics = json{{"airy", {to_string(airy_lo), to_string(airy_hi)}},
                     {"half_plane", {to_string(hp_lo), to_string(hp_hi)}},
                     {"sign_changing", {{"alpha_3", to_string(sc3)}, {"alpha_2", to_string(sc2)}}},
                     {"dilated_via_dilation", dil_ok}};
    return r;
}

inline CriterionResult criterion_eigen_oracles() {
    CriterionResult r{4, "eigenvalue_oracles"};
    detail::Checker check(r);
    const double pi = std::numbers::pi;

    // Dirichlet Laplacian on an interval of length pi: eigenvalues j^2.
    {
        const OperatorSpec s = detail::laplacian_1d();
        const auto ev = detail::spectrum_of(assemble_P(s, make_grid(s, pi / 2.0, 2000)));
        json errs = json::array();
        for (int j = 1; j <= 5; ++j) {
            const double e = std::abs(ev[j - 1] - complex_t(j * j)) / (j * j);
            errs.push_back(e);
            check(e <= 1e-4, "laplacian lambda_" + std::to_string(j) + " relative error " + detail::fmt(e));
        }
        r.metrics["laplacian_rel_err"] = errs;
    }
    // Harmonic oscillator: 2j - 1.
    {
        const OperatorSpec s = make_oscillator_1d(0.0, 2.0);
        const auto ev = detail::spectrum_of(assemble_P(s, make_grid(s, 12.0, 1200)));
        json errs = json::array();
        for (int j = 1; j <= 5; ++j) {
            const double want = 2.0 * j - 1.0;
            const double e = std::abs(ev[j - 1] - want) / want;
            errs.push_back(e);
            check(e <= 1e-3, "oscillator lambda_" + std::to_string(j) + " relative error " + detail::fmt(e));
        }
        r.metrics["oscillator_rel_err"] = errs;
    }
    // Complex Airy on the half line: |a_j| e^{i pi/3}.
    {
        const OperatorSpec s = make_airy_half_line(pi / 2.0);
        const auto ev = detail::spectrum_of(assemble_P(s, make_grid(s, 30.0, 3000)));
        json errs = json::array();
        for (int j = 1; j <= 3; ++j) {
            const double a = oracle::airy_zero(j);
            const complex_t want = std::polar(std::fabs(a), pi / 3.0);
            const double e = std::abs(ev[j - 1] - want) / std::abs(want);
            errs.push_back(e);
            check(e <= 1e-3, "airy lambda_" + std::to_string(j) + " relative error " + detail::fmt(e));
        }
        r.metrics["airy_rel_err"] = errs;
    }
    // Complex cubic ground state.
    {
        const OperatorSpec s = make_oscillator_1d(pi / 2.0, 3.0, 1.0, true);
        const auto ev = detail::spectrum_of(assemble_P(s, make_grid(s, 14.0, 2000)));
        const double e = std::abs(ev[0] - oracle::cubic_ground_state) / oracle::cubic_ground_state;
        check(e <= 1e-3, "cubic ground state relative error " + detail::fmt(e));
        r.metrics["cubic"] = json{{"re", ev[0].real()}, {"im", ev[0].imag()}, {"rel_err", e}};
    }
    return r;
}

inline CriterionResult criterion_decay(detail::DilatedDecay& dd) {
    CriterionResult r{5, "decay_exponents"};
    detail::Checker check(r);
    auto fit1d = [&](const OperatorSpec& s, double L, int n, const std::string& label, double lo, double hi) {
        const complex_t shift = default_shift(detail::lambda_star(s));
        const auto v1 = detail::resolvent_values(s, make_grid(s, L, n), OperatorKind::P, Stencil::expanded, shift);
        const auto v2 = detail::resolvent_values(s, make_grid(s, L, 2 * n), OperatorKind::P, Stencil::expanded, shift);
        const DecayFit f = decay_fit(v1, &v2);
        check(f.p_estimate >= lo && f.p_estimate <= hi,
              label + " p_estimate " + detail::fmt(f.p_estimate) + " outside [" + detail::fmt(lo) + ", " + detail::fmt(hi) + "]");
        check(f.grid_converged, label + " not grid converged (slope change " + detail::fmt(f.slope_change) + ")");
        r.metrics[label] = detail::fit_json(f);
    };
    fit1d(make_oscillator_1d(0.0, 2.0), 16.0, 400, "harmonic", 0.9, 1.1);
    fit1d(make_oscillator_1d(0.0, 4.0), 6.0, 400, "quartic", 0.64, 0.86);

    if (!dd.computed) {
        const OperatorSpec s = make_dilated_model(2, 1, optimal_alpha(2, 1));
        const complex_t shift = default_shift(detail::lambda_star(s));
        const Grid g = make_grid(s, dd.L, dd.n);
        dd.fit_P = decay_fit(detail::resolvent_values(s, g, OperatorKind::P, Stencil::peierls, shift));
        dd.fit_absV = decay_fit(detail::resolvent_values(s, g, OperatorKind::selfadjoint_absV, Stencil::peierls, shift));
        dd.computed = true;
    }
    check(dd.fit_P.p_estimate >= 2.0 && dd.fit_P.p_estimate <= 3.0,
          "dilated p_estimate " + detail::fmt(dd.fit_P.p_estimate) + " outside [2, 3]");
    r.metrics["dilated_2d"] = detail::fit_json(dd.fit_P);
    r.metrics["dilated_2d"]["grid"] = json{{"n", dd.n}, {"L", dd.L}, {"stencil", "peierls"}};
    return r;
}

inline CriterionResult criterion_transfer(detail::DilatedDecay& dd) {
    CriterionResult r{6, "schatten_transfer"};
    detail::Checker check(r);
    {
        const OperatorSpec s = make_oscillator_1d(std::numbers::pi / 2.0, 3.0, 1.0, true);
        const complex_t shift = default_shift(detail::lambda_star(s));
        const Grid g = make_grid(s, 8.0, 400);
        const DecayFit fp = decay_fit(detail::resolvent_values(s, g, OperatorKind::P, Stencil::expanded, shift));
        const DecayFit fa = decay_fit(detail::resolvent_values(s, g, OperatorKind::selfadjoint_absV, Stencil::expanded, shift));
        const double rel = detail::rel_err(fp.p_estimate, fa.p_estimate);
        check(rel <= 0.15, "cubic p_estimate P " + detail::fmt(fp.p_estimate) + " vs absV " + detail::fmt(fa.p_estimate));
        r.metrics["cubic"] = json{{"P", fp.p_estimate}, {"absV", fa.p_estimate}, {"relative_gap", rel}};
    }
    if (!dd.computed) criterion_decay(dd);
    const double rel = detail::rel_err(dd.fit_P.p_estimate, dd.fit_absV.p_estimate);
    check(rel <= 0.15, "dilated p_estimate P " + detail::fmt(dd.fit_P.p_estimate) + " vs absV " +
                           detail::fmt(dd.fit_absV.p_estimate));
    r.metrics["dilated_2d"] = json{{"P", dd.fit_P.p_estimate}, {"absV", dd.fit_absV.p_estimate}, {"relative_gap", rel}};
    return r;
}

inline CriterionResult criterion_sector() {
    CriterionResult r{7, "sector_containment"};
    detail::Checker check(r);
    const double pi = std::numbers::pi, tol = 0.02;
    {
        const OperatorSpec s = make_oscillator_1d(pi / 3.0, 2.0);
        const AssembledOperator P = assemble_P(s, make_grid(s, 10.0, 400));
        const FieldOfValues f = field_of_values_boundary(P.matrix, 128);
        check(f.sector.theta_min >= -tol && f.sector.theta_max <= pi / 3.0 + tol,
              "oscillator sector [" + detail::fmt(f.sector.theta_min) + ", " + detail::fmt(f.sector.theta_max) + "]");
        r.metrics["oscillator"] = json{{"theta_min", f.sector.theta_min}, {"theta_max", f.sector.theta_max}};
    }
    {
        const double a = optimal_alpha(2, 1);
        const OperatorSpec s = make_dilated_model(2, 1, a);
        const AssembledOperator P = assemble_P(s, make_grid(s, 4.0, 24));
        const FieldOfValues f = field_of_values_boundary(P.matrix, 128, {}, -2.0 * a);
        check(f.sector.theta_min >= -tol && f.sector.theta_max <= 3.0 * pi / 8.0 + tol,
              "dilated sector [" + detail::fmt(f.sector.theta_min) + ", " + detail::fmt(f.sector.theta_max) + "]");
        r.metrics["dilated"] = json{{"theta_min", f.sector.theta_min}, {"theta_max", f.sector.theta_max},
                                    {"rotation", -2.0 * a}};
    }
    return r;
}

inline CriterionResult criterion_inequalities(std::uint64_t seed) {
    CriterionResult r{8, "inequality_chain"};
    detail::Checker check(r);
    const double pi = std::numbers::pi;

    // Lax-Milgram chain on random matrices with contractive multipliers.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(4, 24);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int lm_pass = 0;
    double worst_slack = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 50; ++t) {
        const int n = dim(rng);
        Eigen::MatrixXcd A(n, n), Phi(n, n);
        for (int j = 0; j < n; ++j) A.col(j) = random_complex_vector(n, rng);
        for (int j = 0; j < n; ++j) Phi.col(j) = random_complex_vector(n, rng);
        Phi *= unit(rng) / linalg::singular_values(Phi)(0);
        const LaxMilgramResult lm = laxmilgram_bound_check(A, Phi, 200, seed + static_cast<std::uint64_t>(t));
        worst_slack = std::min(worst_slack, lm.sigma_min - lm.bound);
        if (check(lm.holds, "random matrix " + std::to_string(t) + " violates the chain")) ++lm_pass;
    }
    r.metrics["laxmilgram_random"] = json{{"passed", lm_pass}, {"worst_slack", worst_slack}};

    struct Catalog {
        std::string name;
        OperatorSpec spec;
        double L;
        int n;
    };
    const std::vector<Catalog> catalog{
        {"oscillator_1d", make_oscillator_1d(pi / 3.0, 2.0), 6.0, 60},
        {"complex_cubic", make_oscillator_1d(pi / 2.0, 3.0, 1.0, true), 6.0, 60},
        {"airy_half_line", make_airy_half_line(pi / 2.0), 10.0, 60},
        {"holomorphic_2d", make_holomorphic_2d(1), 3.0, 12},
        {"dilated_model", make_dilated_model(2, 1, optimal_alpha(2, 1)), 3.0, 12},
        {"half_plane_model", make_half_plane_model(pi / 4.0), 3.0, 12},
    };
    json forms = json::object();
    for (const auto& c : catalog) {
        const FormAssembly fa = assemble_form(c.spec, make_grid(c.spec, c.L, c.n), 1.0);
        const LaxMilgramResult lm = laxmilgram_bound_check(fa.form.matrix, fa.phi1.matrix, 200, seed);
        check(lm.holds, c.name + " form violates the chain");
        forms[c.name] = json{{"holds", lm.holds}, {"sigma_min", lm.sigma_min}, {"bound", lm.bound}};
    }
    r.metrics["laxmilgram_forms"] = forms;

    // Coercivity constants under n-doubling.
    auto coercivity = [&](const OperatorSpec& s, double L, int n) {
        const FormAssembly fa = assemble_form(s, make_grid(s, L, n), 1.0);
        const Eigen::MatrixXcd N = fa.gradient_gram + Eigen::MatrixXcd(fa.weight.cast<complex_t>().asDiagonal());
        const Eigen::VectorXd phi = fa.phi1.matrix.diagonal().real();
        return coercivity_check(fa.form.matrix, phi, N, 200, seed, 1.0);
    };
    auto stable = [&](const std::string& label, double c1, double c2) {
        const bool finite = std::isfinite(c1) && std::isfinite(c2) && c1 > 0.0;
        const double ratio = finite ? c2 / c1 : std::numeric_limits<double>::infinity();
        check(finite, label + " not finite");
        check(finite && std::fabs(ratio - 1.0) <= 0.2, label + " unstable under doubling: " + detail::fmt(c1) +
                                                           " -> " + detail::fmt(c2));
        return json{{"coarse", c1}, {"fine", c2}, {"ratio", ratio}};
    };
    const OperatorSpec cubic = make_oscillator_1d(pi / 2.0, 3.0, 1.0, true);
    const OperatorSpec dil = make_dilated_model(2, 1, optimal_alpha(2, 1));
    {
        const CoercivityResult a = coercivity(cubic, 8.0, 200), b = coercivity(cubic, 8.0, 400);
        check(!a.counterexample && !b.counterexample, "cubic coercivity counterexample");
        r.metrics["coercivity_cubic"] = stable("cubic coercivity", a.constant, b.constant);
        r.metrics["coercivity_cubic"]["sampled"] = {a.sampled_sup, b.sampled_sup};
    }
    {
        const CoercivityResult a = coercivity(dil, 3.0, 16), b = coercivity(dil, 3.0, 32);
        check(!a.counterexample && !b.counterexample, "dilated coercivity counterexample");
        r.metrics["coercivity_dilated"] = stable("dilated coercivity", a.constant, b.constant);
        r.metrics["coercivity_dilated"]["sampled"] = {a.sampled_sup, b.sampled_sup};
    }

    // Comparison sups on a common index window.
    auto compare = [&](const OperatorSpec& s, SelfAdjointVariant v, double L, int n) {
        const complex_t shift = default_shift(detail::lambda_star(s));
        const Grid g1 = make_grid(s, L, n), g2 = make_grid(s, L, 2 * n);
        const Window w1{10, 0.25}, w2{10, s.dimension == 1 ? 0.125 : 0.0625};
        const ComparisonResult c1 = eigen_comparison(assemble_selfadjoint(s, g1, v).matrix, assemble_P(s, g1).matrix, shift, w1);
        const ComparisonResult c2 = eigen_comparison(assemble_selfadjoint(s, g2, v).matrix, assemble_P(s, g2).matrix, shift, w2);
        return std::pair{c1, c2};
    };
    {
        const auto [c1, c2] = compare(cubic, SelfAdjointVariant::absV, 8.0, 200);
        r.metrics["comparison_cubic"] = json{{"nu_over_mu", stable("cubic sup nu/(1+mu)", c1.sup_nu_mu, c2.sup_nu_mu)},
                                             {"mu_over_nu", stable("cubic sup mu/(1+nu)", c1.sup_mu_nu, c2.sup_mu_nu)}};
    }
    {
        const auto [c1, c2] = compare(dil, SelfAdjointVariant::weight, 4.0, 24);
        r.metrics["comparison_dilated"] = json{{"nu_over_mu", stable("dilated sup nu/(1+mu)", c1.sup_nu_mu, c2.sup_nu_mu)},
                                               {"mu_over_nu", stable("dilated sup mu/(1+nu)", c1.sup_mu_nu, c2.sup_mu_nu)}};
    }
    return r;
}

inline CriterionResult criterion_identities() {
    CriterionResult r{9, "exact_identities"};
    detail::Checker check(r);
    double worst = 0.0;
    for (int d : {1, 2})
        for (double p : {1.25, 1.5, 2.0, 2.5, 3.75})
            for (double m : {0.5, 1.0, 3.0, 10.0}) {
                if (!(p > 0.5 * d)) continue;
                const double closed = xi_integral_constant(p, d) * std::pow(m, 0.5 * d - p);
                const double num = oracle::xi_integral_numeric(p, d, m);
                const double e = detail::rel_err(closed, num);
                worst = std::max(worst, e);
                check(e <= 1e-6, "xi integral d=" + std::to_string(d) + " p=" + detail::fmt(p) + " m=" + detail::fmt(m) +
                                     " relative error " + detail::fmt(e));
            }
    r.metrics["xi_worst_rel_err"] = worst;

    int eq49 = 0;
    for (int m = 2; m <= 6; ++m)
        for (int k = 1; k <= 6; ++k)
            if (check(eq49_check(m, k).holds, "dilated-model inequality fails at (" + std::to_string(m) + "," + std::to_string(k) + ")")) ++eq49;
    r.metrics["eq49_holds"] = eq49;

    const double pi = std::numbers::pi;
    const double a = optimal_alpha(2, 1);
    check(std::fabs(a + pi / 16.0) <= 1e-14, "optimal_alpha(2,1) = " + detail::fmt(a));
    // Coefficients of the dilated (2,1) model: -e^{2i alpha} d_x^2, -e^{-2im alpha} d_{A_y}^2, e^{2ikm alpha + i pi/2} y^2.
    const OperatorSpec s = dilate(make_dilated_model(2, 1), a);
    const int m = 2, k = 1;
    const complex_t cx = std::polar(1.0, 2.0 * s.angles[0]), cy = std::polar(1.0, 2.0 * s.angles[1]);
    const double yy[2] = {0.0, 1.0};
    const complex_t cv = s.V1.eval(yy);
    const complex_t want_x = std::polar(1.0, -pi / (2.0 * m * (k + 1)));
    const complex_t want_y = std::polar(1.0, pi / (2.0 * (k + 1)));
    const double ex = std::abs(cx - want_x), ey = std::abs(cy - want_y), ev = std::abs(cv - want_y);
    check(ex <= 1e-14, "x coefficient off by " + detail::fmt(ex));
    check(ey <= 1e-14, "y coefficient off by " + detail::fmt(ey));
    check(ev <= 1e-14, "potential coefficient off by " + detail::fmt(ev));
    const OperatorSpec back = dilate(s, -a);
    check(std::fabs(back.angles[0]) <= 1e-14 && std::fabs(back.angles[1]) <= 1e-14, "dilate round trip drifted");
    r.metrics["dilation_coefficient_err"] = {ex, ey, ev};
    return r;
}

struct SuiteRun {
    std::vector<CriterionResult> results;
    bool passed() const {
        return std::all_of(results.begin(), results.end(), [](const CriterionResult& c) { return c.passed; });
    }
};

inline std::string criterion_label(const CriterionResult& c) {
    std::ostringstream s;
    s << "C" << (c.id < 10 ? "0" : "") << c.id << "_" << c.name;
    return s.str();
}

inline std::string report_json(const SuiteRun& run, std::uint64_t seed) {
    json j{{"tool", "sectoral"}, {"version", SECTORAL_VERSION}, {"seed", seed}, {"passed", run.passed()}};
    j["criteria"] = json::array();
    for (const auto& c : run.results)
        j["criteria"].push_back(
            json{{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"failures", c.failures}, {"metrics", c.metrics}});
    return j.dump(2) + "\n";
}

inline std::string junit_xml(const SuiteRun& run) {
    int failures = 0;
    for (const auto& c : run.results) failures += c.passed ? 0 : 1;
    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<testsuite name=\"sectoral-acceptance\" tests=\"" << run.results.size() << "\" failures=\"" << failures
      << "\">\n";
    for (const auto& c : run.results) {
        s << "  <testcase classname=\"acceptance\" name=\"" << criterion_label(c) << "\"";
        if (c.passed) {
            s << "/>\n";
            continue;
        }
        s << ">\n    <failure message=\"" << xml_escape(c.failures.empty() ? "failed" : c.failures.front()) << "\">";
        for (const auto& f : c.failures) s << xml_escape(f) << "\n";
        s << "</failure>\n  </testcase>\n";
    }
    s << "</testsuite>\n";
    return s.str();
}

namespace detail {

inline CriterionResult timed(double budget, const std::function<CriterionResult()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = body();
    } catch (const std::exception& e) {
        r.failures.push_back(std::string("exception: ") + e.what());
    }
    r.passed = r.failures.empty();
    r.budget_seconds = budget;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace detail

/// Criteria 1 to 9.
inline SuiteRun run_numeric_criteria(const SuiteOptions& opt) {
    SuiteRun run;
    detail::DilatedDecay dd;
    auto add = [&](int id, const char* name, double budget, const std::function<CriterionResult()>& body) {
        CriterionResult r = detail::timed(budget, body);
        r.id = id;
        r.name = name;
        run.results.push_back(r);
        if (opt.on_result) opt.on_result(run.results.back());
    };
    add(1, "threshold_formulas", 1, criterion_thresholds);
    add(2, "quadrature_probe", 10, criterion_probe);
    add(3, "completeness_table", 1, criterion_completeness_table);
    add(4, "eigenvalue_oracles", 180, criterion_eigen_oracles);
    add(5, "decay_exponents", 600, [&] { return criterion_decay(dd); });
    add(6, "schatten_transfer", 600, [&] { return criterion_transfer(dd); });
    add(7, "sector_containment", 120, criterion_sector);
    add(8, "inequality_chain", 600, [&] { return criterion_inequalities(opt.seed); });
    add(9, "exact_identities", 5, criterion_identities);
    return run;
}

struct VerifyArtifacts {
    std::string report, junit, manifest;
};

inline VerifyArtifacts render_artifacts(const SuiteRun& run, std::uint64_t seed) {
    VerifyArtifacts a;
    a.report = report_json(run, seed);
    a.junit = junit_xml(run);
    const json files = json::array(
        {json{{"path", "report.json"}, {"kind", "report"}, {"sha256", sha256_hex(a.report)}, {"bytes", a.report.size()}},
         json{{"path", "junit.xml"}, {"kind", "junit"}, {"sha256", sha256_hex(a.junit)}, {"bytes", a.junit.size()}}});
    a.manifest = json{{"tool", "sectoral"}, {"version", SECTORAL_VERSION}, {"command", "verify"},
                      {"config", {{"seed", seed}}}, {"files", files}}
                     .dump(2) +
                 "\n";
    return a;
}

/// Full suite: criteria 1-9, then a second independent pass whose artifacts
/// must match the first byte for byte (criterion 10).
inline SuiteRun run_acceptance(const SuiteOptions& opt, VerifyArtifacts* final_artifacts = nullptr) {
    SuiteRun first = run_numeric_criteria(opt);
    const VerifyArtifacts a1 = render_artifacts(first, opt.seed);

    SuiteOptions quiet = opt;
    quiet.on_result = nullptr;
    CriterionResult c10 = detail::timed(0, [&] {
        CriterionResult r;
        detail::Checker check(r);
        const SuiteRun second = run_numeric_criteria(quiet);
        const VerifyArtifacts a2 = render_artifacts(second, opt.seed);
        check(a1.report == a2.report, "report.json differs between runs");
        check(a1.junit == a2.junit, "junit.xml differs between runs");
        check(a1.manifest == a2.manifest, "manifest.json differs between runs");
        r.metrics = json{{"report_sha256", sha256_hex(a1.report)}, {"manifest_sha256", sha256_hex(a1.manifest)}};
        return r;
    });
    c10.id = 10;
    c10.name = "reproducibility";
    first.results.push_back(c10);
    if (opt.on_result) opt.on_result(first.results.back());
    if (final_artifacts) *final_artifacts = render_artifacts(first, opt.seed);
    return first;
}

/// One human-readable line per criterion; timings go here and never into artifacts.
inline std::string summary_line(const CriterionResult& c) {
    std::ostringstream s;
    s << (c.passed ? "PASS " : "FAIL ") << criterion_label(c) << "  (" << std::fixed;
    s.precision(1);
    s << c.seconds << " s";
    if (c.budget_seconds > 0.0) s << ", budget " << c.budget_seconds << " s" << (c.seconds > c.budget_seconds ? " EXCEEDED" : "");
    s << ")";
    for (const auto& f : c.failures) s << "\n      " << f;
    return s.str();
}

} // namespace sectoral
