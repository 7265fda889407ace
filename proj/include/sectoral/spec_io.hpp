#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sectoral/digest.hpp"
#include "sectoral/errors.hpp"
#include "sectoral/operator_spec.hpp"

namespace sectoral {

using json = nlohmann::json;

// Term: {"re", "im", "exponents": [..], "abs": [..]} with an optional
// "sign": [..] marking sgn(x)|x|^e factors. "sign" is emitted only when set.

inline json term_to_json(const MonomialTerm& t) {
    json e = json::array(), a = json::array(), s = json::array();
    bool any_sign = false;
    for (const auto& f : t.factors) {
        e.push_back(f.exponent);
        a.push_back(f.kind != FactorKind::power);
        s.push_back(f.kind == FactorKind::signed_power);
        any_sign = any_sign || f.kind == FactorKind::signed_power;
    }
    json j{{"re", t.coeff.real()}, {"im", t.coeff.imag()}, {"exponents", e}, {"abs", a}};
    if (any_sign) j["sign"] = s;
    return j;
}

inline MonomialTerm term_from_json(const json& j, std::size_t dim) {
    if (!j.is_object()) throw SpecError("term must be an object");
    MonomialTerm t;
    t.coeff = {j.value("re", 0.0), j.value("im", 0.0)};
    const auto& e = j.at("exponents");
    if (!e.is_array() || e.size() != dim) throw DimensionError("term needs one exponent per coordinate");
    std::vector<bool> abs(dim, false), sign(dim, false);
    if (j.contains("abs")) {
        if (j["abs"].size() != dim) throw DimensionError("term needs one abs flag per coordinate");
        for (std::size_t i = 0; i < dim; ++i) abs[i] = j["abs"][i].get<bool>();
    }
    if (j.contains("sign")) {
        if (j["sign"].size() != dim) throw DimensionError("term needs one sign flag per coordinate");
        for (std::size_t i = 0; i < dim; ++i) sign[i] = j["sign"][i].get<bool>();
    }
    for (std::size_t i = 0; i < dim; ++i) {
        Factor f;
        f.exponent = e[i].get<double>();
        f.kind = sign[i] ? FactorKind::signed_power : abs[i] ? FactorKind::abs_power : FactorKind::power;
        t.factors.push_back(f);
    }
    t.check();
    return t;
}

inline json field_to_json(const ScalarField& f) {
    json out = json::array();
    for (const auto& t : f.terms()) out.push_back(term_to_json(t));
    return out;
}

inline ScalarField field_from_json(const json& j, std::size_t dim) {
    if (!j.is_array()) throw SpecError("field must be a list of terms");
    std::vector<MonomialTerm> terms;
    for (const auto& t : j) terms.push_back(term_from_json(t, dim));
    return ScalarField(dim, std::move(terms));
}

inline json complex_to_json(complex_t z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline complex_t complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    return {j.value("re", 0.0), j.value("im", 0.0)};
}

inline json family_to_json(const FamilyParams& p) {
    json j{{"tag", std::string(to_string(p.tag))}};
    switch (p.tag) {
    case FamilyTag::oscillator_1d:
        j["theta"] = p.theta;
        j["alpha"] = p.alpha;
        j["c"] = p.c;
        j["sign_changing"] = p.sign_changing;
        j["beta1"] = complex_to_json(p.beta1);
        j["beta2"] = complex_to_json(p.beta2);
        break;
    case FamilyTag::airy_half_line:
        j["theta"] = p.theta;
        j["alpha"] = p.alpha;
        j["c"] = p.c;
        break;
    case FamilyTag::holomorphic_2d: j["n"] = p.n; break;
    case FamilyTag::dilated_model:
        j["m"] = p.m;
        j["k"] = p.k;
        j["alpha"] = p.alpha;
        break;
    case FamilyTag::half_plane_model:
        j["theta"] = p.theta;
        j["n"] = p.n;
        break;
    case FamilyTag::custom: break;
    }
    return j;
}

inline FamilyParams family_from_json(const json& j) {
    FamilyParams p;
    p.tag = family_from_string(j.at("tag").get<std::string>());
    p.theta = j.value("theta", 0.0);
    p.alpha = j.value("alpha", p.tag == FamilyTag::airy_half_line ? 1.0 : 0.0);
    p.c = j.value("c", 1.0);
    p.n = j.value("n", p.tag == FamilyTag::half_plane_model ? 1 : 0);
    p.m = j.value("m", 0);
    p.k = j.value("k", 0);
    p.sign_changing = j.value("sign_changing", false);
    if (j.contains("beta1")) p.beta1 = complex_from_json(j["beta1"]);
    if (j.contains("beta2")) p.beta2 = complex_from_json(j["beta2"]);
    return p;
}

inline json spec_to_json(const OperatorSpec& s) {
    json A = json::array();
    for (const auto& c : s.A.components) A.push_back(field_to_json(c));
    json j{{"dimension", s.dimension},
           {"domain", std::string(to_string(s.domain))},
           {"angles", s.angles},
           {"A", A},
           {"V1", field_to_json(s.V1)},
           {"V2", field_to_json(s.V2)}};
    if (s.family) j["family"] = family_to_json(*s.family);
    return j;
}

/// Parses and validates a spec. A spec that carries only a family object
/// (no operator data) is expanded from the family parameters.
inline OperatorSpec spec_from_json(const json& j) {
    try {
        if (!j.is_object()) throw SpecError("spec must be a JSON object");
        std::optional<FamilyParams> fam;
        if (j.contains("family") && !j["family"].is_null()) fam = family_from_json(j["family"]);
        if (fam && fam->tag != FamilyTag::custom && !j.contains("V1")) {
            OperatorSpec s = from_family(*fam);
            validate(s);
            return s;
        }
        OperatorSpec s;
        s.dimension = j.at("dimension").get<int>();
        if (s.dimension != 1 && s.dimension != 2) throw DimensionError("dimension must be 1 or 2");
        const auto d = static_cast<std::size_t>(s.dimension);
        const std::string dom = j.value("domain", "full_space");
        if (dom == "full_space")
            s.domain = DomainKind::full_space;
        else if (dom == "half_space")
            s.domain = DomainKind::half_space;
        else
            throw SpecError("unknown domain '" + dom + "'");
        s.angles = j.contains("angles") ? j["angles"].get<std::vector<double>>() : std::vector<double>(d, 0.0);
        if (j.contains("A")) {
            if (!j["A"].is_array() || j["A"].size() != d) throw DimensionError("A needs one component per coordinate");
            for (const auto& c : j["A"]) s.A.components.push_back(field_from_json(c, d));
        } else {
            s.A.components.assign(d, ScalarField(d));
        }
        s.V1 = field_from_json(j.value("V1", json::array()), d);
        s.V2 = field_from_json(j.value("V2", json::array()), d);
        s.family = fam;
        validate(s);
        return s;
    } catch (const json::exception& e) {
        throw SpecError(std::string("malformed spec JSON: ") + e.what());
    }
}

inline std::string canonical_spec_string(const OperatorSpec& s) { return spec_to_json(s).dump(); }

inline std::string spec_hash(const OperatorSpec& s) { return sha256_hex(canonical_spec_string(s)); }

/// Overridable run configuration. Precedence: CLI flags > spec-file "config" > defaults.
struct RunConfig {
    std::vector<double> box;        // per-axis halfwidth; empty means the default rule
    std::vector<int> n;             // per-axis interior points
    std::optional<complex_t> shift; // resolvent shift
    std::optional<double> p;        // probe exponent
    int angles = 128;               // field-of-values directions
    std::uint64_t seed = 20240601;
    double gamma = 1.0;
    std::vector<double> rect;       // pseudospectrum rectangle re_min, re_max, im_min, im_max
    std::vector<int> res;           // pseudospectrum resolution nx, ny

    json to_json() const {
        json j{{"angles", angles}, {"seed", seed}, {"gamma", gamma}};
        j["box"] = box;
        j["n"] = n;
        j["shift"] = shift ? complex_to_json(*shift) : json(nullptr);
        j["p"] = p ? json(*p) : json(nullptr);
        j["rect"] = rect;
        j["res"] = res;
        return j;
    }
};

inline void merge_config(RunConfig& c, const json& j) {
    if (!j.is_object()) throw SpecError("config must be an object");
    auto as_vec = [](const json& v) {
        return v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
    };
    if (j.contains("box")) c.box = as_vec(j["box"]);
    if (j.contains("n")) {
        c.n.clear();
        for (double v : as_vec(j["n"])) c.n.push_back(static_cast<int>(v));
    }
    if (j.contains("shift") && !j["shift"].is_null()) c.shift = complex_from_json(j["shift"]);
    if (j.contains("p") && !j["p"].is_null()) c.p = j["p"].get<double>();
    if (j.contains("angles")) c.angles = j["angles"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("rect")) c.rect = j["rect"].get<std::vector<double>>();
    if (j.contains("res")) {
        c.res.clear();
        for (double v : as_vec(j["res"])) c.res.push_back(static_cast<int>(v));
    }
}

struct LoadedSpec {
    OperatorSpec spec;
    RunConfig config;
};

inline LoadedSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw SpecError(std::string("spec file is not valid JSON: ") + e.what());
    }
    LoadedSpec out{spec_from_json(j), {}};
    if (j.contains("config")) merge_config(out.config, j["config"]);
    return out;
}

} // namespace sectoral
