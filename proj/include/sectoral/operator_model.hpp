#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sectoral/errors.hpp"
#include "sectoral/field.hpp"
#include "sectoral/operator_spec.hpp"

namespace sectoral {

inline complex_t eval_field(const ScalarField& f, std::span<const double> x) { return f.eval(x); }

/// B_jk = d_k A_j - d_j A_k, derived symbolically.
inline FieldMatrix magnetic_matrix(const VectorField& A) {
    const std::size_t d = A.dimension();
    FieldMatrix B{d, std::vector<ScalarField>(d * d, ScalarField(d))};
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k) {
            ScalarField b = A.components[j].derivative(k) - A.components[k].derivative(j);
            B(k, j) = -b;
            B(j, k) = std::move(b);
        }
    return B;
}

/// |B|^2 summed over the independent entries j < k.
inline double magnetic_norm2(const FieldMatrix& B, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t j = 0; j < B.dimension; ++j)
        for (std::size_t k = j + 1; k < B.dimension; ++k) s += std::norm(B(j, k).eval(x));
    return s;
}

/// Precomputed pieces of the weight m = sqrt(|V1|^2 + |B|^2 + 1).
class Weight {
  public:
    explicit Weight(const OperatorSpec& s) : V1_(s.V1), B_(magnetic_matrix(s.A)) {}

    double operator()(std::span<const double> x) const {
        return std::sqrt(std::norm(V1_.eval(x)) + magnetic_norm2(B_, x) + 1.0);
    }

    const FieldMatrix& B() const noexcept { return B_; }

  private:
    ScalarField V1_;
    FieldMatrix B_;
};

inline double weight_m(const OperatorSpec& s, std::span<const double> x) { return Weight(s)(x); }

struct SampleBox {
    std::vector<double> lower, upper;
};

/// Box [-L, L]^d, with the last axis [0, L] on half spaces.
inline SampleBox default_box(const OperatorSpec& s, std::vector<double> L) {
    const auto d = static_cast<std::size_t>(s.dimension);
    if (L.empty()) L.assign(d, 8.0);
    if (L.size() == 1 && d > 1) L.assign(d, L[0]);
    if (L.size() != d) throw DimensionError("box needs one halfwidth per coordinate");
    SampleBox b{std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t i = 0; i < d; ++i) {
        if (!(L[i] > 0.0)) throw ParameterError("box halfwidth must be positive");
        b.lower[i] = -L[i];
        b.upper[i] = L[i];
    }
    if (s.domain == DomainKind::half_space) b.lower[d - 1] = 0.0;
    return b;
}

/// Tensor lattice with about n points inside the box (row-major, last axis fastest).
inline std::vector<std::vector<double>> lattice_samples(const SampleBox& b, int n) {
    const std::size_t d = b.lower.size();
    const int per = d == 1 ? n : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    std::vector<std::vector<double>> axes(d);
    for (std::size_t i = 0; i < d; ++i)
        for (int j = 0; j < per; ++j) axes[i].push_back(b.lower[i] + (b.upper[i] - b.lower[i]) * j / (per - 1));
    std::vector<std::vector<double>> pts;
    if (d == 1) {
        for (double x : axes[0]) pts.push_back({x});
    } else {
        for (double x : axes[0])
            for (double y : axes[1]) pts.push_back({x, y});
    }
    return pts;
}

/// Points on the boundary of the box scaled by r (restricted to the domain).
inline std::vector<std::vector<double>> shell_samples(const SampleBox& b, double r, int per_edge = 64) {
    const std::size_t d = b.lower.size();
    std::vector<std::vector<double>> pts;
    if (d == 1) {
        if (b.lower[0] < 0.0) pts.push_back({r * b.lower[0]});
        pts.push_back({r * b.upper[0]});
        return pts;
    }
    const double x0 = r * b.lower[0], x1 = r * b.upper[0], y0 = r * b.lower[1], y1 = r * b.upper[1];
    for (int j = 0; j <= per_edge; ++j) {
        const double t = static_cast<double>(j) / per_edge;
        const double x = x0 + (x1 - x0) * t, y = y0 + (y1 - y0) * t;
        pts.push_back({x, y1});
        pts.push_back({x1, y});
        pts.push_back({x0, y});
        if (y0 < 0.0) pts.push_back({x, y0});
    }
    return pts;
}

struct GrowthSignature {
    std::vector<double> gammas;
    std::vector<double> constants;
    bool valid = false;
    double kappa = 1.0; // comparability factor achieved on the sample set
};

namespace detail {

inline std::vector<double> dyadic_axis(double halfwidth, bool nonnegative) {
    std::vector<double> v{0.0};
    for (int j = -2;; ++j) {
        const double t = std::ldexp(1.0, j);
        if (t > 4.0 * halfwidth * (1.0 + 1e-12)) break;
        v.push_back(t);
        if (!nonnegative) v.push_back(-t);
    }
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace detail

/// Per-axis growth exponents of m, validated against 1 + sum c_i |x_i|^gamma_i
/// on a dyadic sample set reaching 4x the box.
inline GrowthSignature growth_signature(const OperatorSpec& s, double kappa = 10.0, std::vector<double> box = {}) {
    const auto d = static_cast<std::size_t>(s.dimension);
    if (box.empty()) box.assign(d, 8.0);
    if (box.size() == 1) box.assign(d, box[0]);
    const Weight w(s);
    GrowthSignature g;
    g.gammas.assign(d, 0.0);
    g.constants.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<std::pair<double, double>> cand; // (degree, leading |coeff|)
        double c = 0.0;
        double e = s.V1.axis_degree(i, &c);
        if (c > 0.0) cand.emplace_back(e, c);
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = j + 1; k < d; ++k) {
                e = w.B()(j, k).axis_degree(i, &c);
                if (c > 0.0) cand.emplace_back(e, c);
            }
        double best = 0.0, c2 = 0.0;
        for (auto [deg, cf] : cand) {
            if (deg > best) {
                best = deg;
                c2 = 0.0;
            }
            if (deg == best) c2 += cf * cf;
        }
        g.gammas[i] = best;
        g.constants[i] = std::sqrt(c2);
    }
    const bool positive = std::all_of(g.gammas.begin(), g.gammas.end(), [](double v) { return v > 0.0; });

    std::vector<std::vector<double>> axes(d);
    for (std::size_t i = 0; i < d; ++i)
        axes[i] = detail::dyadic_axis(box[i], s.domain == DomainKind::half_space && i + 1 == d);
    double worst = 1.0;
    std::vector<double> x(d);
    auto visit = [&](auto&& self, std::size_t i) -> void {
        if (i == d) {
            double model = 1.0;
            for (std::size_t a = 0; a < d; ++a) model += g.constants[a] * std::pow(std::fabs(x[a]), g.gammas[a]);
            const double mv = w(x);
            worst = std::max(worst, std::max(mv / model, model / mv));
            return;
        }
        for (double v : axes[i]) {
            x[i] = v;
            self(self, i + 1);
        }
    };
    visit(visit, 0);
    g.kappa = worst;
    g.valid = positive && worst <= kappa;
    return g;
}

struct HypothesisReport {
    double lambda_star_estimate = 0.0;
    double eq2_ratio_sup = 0.0;
    bool eq4_relative_growth_ok = false;
    bool eq5_proper = false;
    int sample_count = 0;
    SampleBox box;
    std::string eq4_method; // "degree" or "sampled"
    std::vector<std::string> notes;
};

/// Sampled checks of the standing hypotheses on a reproducible lattice.
inline HypothesisReport validate_hypotheses(const OperatorSpec& s, std::vector<double> box = {}, int n_samples = 400) {
    if (n_samples < 100) throw ParameterError("validate_hypotheses needs at least 100 samples");
    const auto d = static_cast<std::size_t>(s.dimension);
    HypothesisReport r;
    r.box = default_box(s, box);
    const auto pts = lattice_samples(r.box, n_samples);
    r.sample_count = static_cast<int>(pts.size());
    const Weight w(s);

    double min_re = std::numeric_limits<double>::infinity();
    for (const auto& x : pts) min_re = std::min(min_re, s.V1.eval(x).real());
    r.lambda_star_estimate = 0.0 - min_re;

    try {
        std::vector<ScalarField> dV;
        for (std::size_t i = 0; i < d; ++i) dV.push_back(s.V1.derivative(i));
        std::vector<ScalarField> dB;
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = j + 1; k < d; ++k)
                for (std::size_t i = 0; i < d; ++i) dB.push_back(w.B()(j, k).derivative(i));
        double sup = 0.0;
        for (const auto& x : pts) {
            double gv = 0.0;
            for (const auto& f : dV) gv += std::norm(f.eval(x));
            double gb = 0.0;
            for (std::size_t e = 0; e + d <= dB.size(); e += d) {
                double g = 0.0;
                for (std::size_t i = 0; i < d; ++i) g += std::norm(dB[e + i].eval(x));
                gb = std::max(gb, std::sqrt(g));
            }
            sup = std::max(sup, (std::sqrt(gv) + gb) / w(x));
        }
        r.eq2_ratio_sup = sup;
    } catch (const NonDifferentiableError& e) {
        r.eq2_ratio_sup = std::numeric_limits<double>::infinity();
        r.notes.push_back(std::string("eq2: ") + e.what());
    }

    const GrowthSignature g = growth_signature(s, 10.0, box);
    if (g.valid) {
        r.eq4_method = "degree";
        bool ok = true;
        for (const auto& t : s.V2.terms())
            for (std::size_t i = 0; i < d; ++i)
                if (!(t.factors[i].exponent < g.gammas[i])) ok = false;
        r.eq4_relative_growth_ok = ok;
    } else {
        r.eq4_method = "sampled";
        double prev = std::numeric_limits<double>::infinity();
        bool decreasing = true;
        for (double scale : {1.0, 2.0, 4.0}) {
            double ratio = 0.0;
            for (const auto& x : shell_samples(r.box, scale)) ratio = std::max(ratio, std::abs(s.V2.eval(x)) / w(x));
            if (ratio > prev * (1.0 + 1e-12) && ratio > 1e-14) decreasing = false;
            prev = ratio;
        }
        r.eq4_relative_growth_ok = decreasing;
        r.notes.push_back("eq4: signature invalid, used sampled |V2|/m trend");
    }

    double mins[3];
    int idx = 0;
    for (double scale : {1.0, 2.0, 4.0}) {
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& x : shell_samples(r.box, scale)) mn = std::min(mn, w(x));
        mins[idx++] = mn;
    }
    r.eq5_proper = mins[1] > mins[0] && mins[2] > mins[1] && mins[2] >= 2.0 * mins[0];
    return r;
}

inline double optimal_alpha(int m, int k) {
    if (m < 2 || k < 1) throw ParameterError("optimal_alpha needs m >= 2 and k >= 1");
    return -std::numbers::pi / (4.0 * m * (k + 1));
}

/// Analytic dilation of a dilated_model spec; angles compose additively.
inline OperatorSpec dilate(const OperatorSpec& s, double alpha) {
    if (s.family_tag() != FamilyTag::dilated_model) throw ParameterError("dilate applies only to dilated_model specs");
    const int m = s.family->m;
    const double limit = std::numbers::pi / (4.0 * m);
    const double total = s.family->alpha + alpha;
    if (!(std::fabs(alpha) < limit) || !(std::fabs(total) < limit))
        throw AngleRangeError("dilation angle must satisfy |alpha| < pi/(4m)");
    return make_dilated_model(m, s.family->k, total);
}

} // namespace sectoral
