#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sectoral/errors.hpp"
#include "sectoral/operator_model.hpp"
#include "sectoral/operator_spec.hpp"
#include "sectoral/parallel.hpp"
#include "sectoral/rational.hpp"

namespace sectoral {

/// c_{d,p} with  int_{R^d} (|xi|^2 + m)^{-p} dxi = c_{d,p} m^{d/2-p}.
inline double xi_integral_constant(double p, int d) {
    if (!(p > 0.5 * d)) throw DivergentXiIntegral("xi integral diverges for p <= d/2");
    return std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(p - 0.5 * d) / std::tgamma(p);
}

/// p_crit = d/2 + sum 1/gamma_i for separated growth (same on half spaces).
inline Rational schatten_threshold(const GrowthSignature& sig, int d, DomainKind = DomainKind::full_space) {
    if (!sig.valid) throw SignatureInvalid("growth signature is not valid; use the quadrature probe");
    if (sig.gammas.size() != static_cast<std::size_t>(d)) throw SignatureInvalid("signature dimension mismatch");
    Rational p(d, 2);
    for (double g : sig.gammas) {
        if (!(g > 0.0)) throw SignatureInvalid("growth exponent must be positive");
        const auto q = rationalize(g);
        if (!q) throw SignatureInvalid("growth exponent is not a recognizable rational");
        p = p + Rational(1) / *q;
    }
    return p;
}

enum class ConvergenceClass { convergent, divergent, inconclusive };

inline std::string to_string(ConvergenceClass c) {
    switch (c) {
    case ConvergenceClass::convergent: return "convergent";
    case ConvergenceClass::divergent: return "divergent";
    case ConvergenceClass::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct ProbeOptions {
    int shells = 12;
    double factor = 0.9; // geometric decay needed for "convergent"
    int window = 4;      // trailing shells used for classification
};

struct SchattenVerdict {
    double p = 0.0;
    ConvergenceClass convergence = ConvergenceClass::inconclusive;
    std::vector<double> shell_integrals;
    double fitted_ratio = 0.0;
};

/// Integrates c_{d,p} m^{d/2-p} over dyadic shells |x| in [2^j, 2^{j+1}).
inline SchattenVerdict schatten_integral_probe(const OperatorSpec& s, double p, ProbeOptions opt = {}) {
    if (opt.shells < 6) throw ParameterError("the probe needs at least 6 shells");
    const int d = s.dimension;
    SchattenVerdict v;
    v.p = p;
    if (!(p > 0.5 * d)) {
        v.convergence = ConvergenceClass::divergent;
        return v;
    }
    const double c = xi_integral_constant(p, d);
    const double expo = 0.5 * d - p;
    const Weight w(s);
    const bool half = s.domain == DomainKind::half_space;
    using boost::math::quadrature::gauss_kronrod;
    v.shell_integrals.assign(static_cast<std::size_t>(opt.shells), 0.0);
    parallel_for(static_cast<std::size_t>(opt.shells), [&](std::size_t j) {
        const double r0 = std::ldexp(1.0, static_cast<int>(j)), r1 = 2.0 * r0;
        double total = 0.0;
        if (d == 1) {
            auto f = [&](double x) {
                const double pt[1] = {x};
                return std::pow(w(pt), expo);
            };
            total = gauss_kronrod<double, 31>::integrate(f, r0, r1, 12, 1e-12);
            if (!half) total += gauss_kronrod<double, 31>::integrate(f, -r1, -r0, 12, 1e-12);
        } else {
            const double phi_hi = half ? std::numbers::pi : 2.0 * std::numbers::pi;
            auto radial = [&](double r) {
                auto ang = [&](double phi) {
                    const double pt[2] = {r * std::cos(phi), r * std::sin(phi)};
                    return std::pow(w(pt), expo);
                };
                return r * gauss_kronrod<double, 31>::integrate(ang, 0.0, phi_hi, 10, 1e-11);
            };
            total = gauss_kronrod<double, 31>::integrate(radial, r0, r1, 10, 1e-10);
        }
        v.shell_integrals[j] = c * total;
    });

    const auto& I = v.shell_integrals;
    const int n = opt.shells, wlen = std::min(opt.window, n);
    // Least-squares slope of log I_j over the trailing window.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = n - wlen; j < n; ++j) {
        const double y = std::log(std::max(I[j], 1e-300));
        sx += j;
        sy += y;
        sxx += double(j) * j;
        sxy += j * y;
    }
    const double slope = (wlen * sxy - sx * sy) / (wlen * sxx - sx * sx);
    v.fitted_ratio = std::exp(slope);
    bool non_decreasing = true;
    for (int j = n - wlen + 1; j < n; ++j)
        if (I[j] < I[j - 1]) non_decreasing = false;
    if (v.fitted_ratio < opt.factor)
        v.convergence = ConvergenceClass::convergent;
    else if (non_decreasing)
        v.convergence = ConvergenceClass::divergent;
    else
        v.convergence = ConvergenceClass::inconclusive;
    return v;
}

/// Smallest p for which the probe reports convergence, by bisection on (d/2, p_hi].
inline double probe_threshold(const OperatorSpec& s, double p_hi = 20.0, double tol = 0.02, ProbeOptions opt = {}) {
    double lo = 0.5 * s.dimension, hi = p_hi;
    if (schatten_integral_probe(s, hi, opt).convergence != ConvergenceClass::convergent)
        throw SignatureInvalid("probe does not converge even at p = " + std::to_string(p_hi));
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (schatten_integral_probe(s, mid, opt).convergence == ConvergenceClass::convergent)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// Angular region {vertex + r e^{i phi} : theta_min <= phi <= theta_max}.
/// `shift` is the real translation applied to put the vertex at 0 and
/// `rotation` the angle by which the operator was rotated before reporting.
struct Sector {
    complex_t vertex{0.0, 0.0};
    double theta_min = 0.0;
    double theta_max = 0.0;
    double shift = 0.0;
    double rotation = 0.0;
    std::string note;

    double opening() const noexcept { return theta_max - theta_min; }
};

namespace detail {

inline Sector ordered_sector(double a, double b) {
    Sector s;
    s.theta_min = std::min(a, b);
    s.theta_max = std::max(a, b);
    return s;
}

inline double wrap_pi(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

} // namespace detail

/// Smallest sector containing the given phases (all assumed within an open half plane).
inline Sector phase_hull(const std::vector<double>& phases) {
    const double ref = detail::wrap_pi(phases.front());
    double lo = 0.0, hi = 0.0;
    for (double ph : phases) {
        const double rel = detail::wrap_pi(ph - ref);
        lo = std::min(lo, rel);
        hi = std::max(hi, rel);
    }
    return detail::ordered_sector(ref + lo, ref + hi);
}

/// Phases of the three coefficient blocks of a dilated_model spec.
inline std::vector<double> dilated_phases(const OperatorSpec& s) {
    const double a = s.family->alpha;
    const int m = s.family->m, k = s.family->k;
    return {2.0 * a, -2.0 * m * a, 2.0 * k * m * a + std::numbers::pi / 2.0};
}

/// Numerical-range sector of a cataloged family, vertex at 0 after the shift.
inline Sector analytic_sector(const OperatorSpec& s, double lambda_star = 0.0) {
    const double shift = std::max(0.0, lambda_star);
    Sector out;
    switch (s.family_tag()) {
    case FamilyTag::oscillator_1d: {
        const double th = s.family->theta;
        if (s.family->sign_changing)
            out = th >= 0.0 ? detail::ordered_sector(th - std::numbers::pi, th)
                            : detail::ordered_sector(th, th + std::numbers::pi);
        else
            out = detail::ordered_sector(0.0, th);
        break;
    }
    case FamilyTag::airy_half_line:
    case FamilyTag::half_plane_model: out = detail::ordered_sector(0.0, s.family->theta); break;
    case FamilyTag::dilated_model: {
        out = phase_hull(dilated_phases(s));
        out.rotation = 0.0 - out.theta_min;
        out.theta_max -= out.theta_min;
        out.theta_min = 0.0;
        break;
    }
    case FamilyTag::holomorphic_2d:
        out = detail::ordered_sector(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
        out.note = "completeness holds on sub-sector domains of opening < pi/" + std::to_string(s.family->n + 2);
        break;
    case FamilyTag::custom: throw NoAnalyticSector("custom operators have no tabulated sector");
    }
    out.shift = shift;
    return out;
}

enum class Outcome { complete_span, infinite_discrete_spectrum_via_dilation, inconclusive };

inline std::string to_string(Outcome o) {
    switch (o) {
    case Outcome::complete_span: return "complete_span";
    case Outcome::infinite_discrete_spectrum_via_dilation: return "infinite_discrete_spectrum_via_dilation";
    case Outcome::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct CompletenessVerdict {
    Outcome outcome = Outcome::inconclusive;
    double p_used = 0.0;
    Sector sector_used;
    double margin = 0.0;
};

inline constexpr double margin_tolerance = 1e-12;

inline CompletenessVerdict completeness_verdict(double p_crit, const Sector& sector, bool dilation_used) {
    if (!(p_crit > 0.0)) throw ParameterError("p_crit must be positive");
    CompletenessVerdict v;
    v.p_used = p_crit;
    v.sector_used = sector;
    v.margin = std::numbers::pi / p_crit - sector.opening();
    if (v.margin > margin_tolerance)
        v.outcome = dilation_used ? Outcome::infinite_discrete_spectrum_via_dilation : Outcome::complete_span;
    return v;
}

/// Sign-definite: largest admissible |theta|, 2 pi alpha/(alpha+2).
/// Sign-changing: the exponent alpha must exceed, namely 2.
inline double oscillator_completeness_threshold(double alpha, bool sign_definite) {
    if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
    if (sign_definite) return 2.0 * std::numbers::pi * alpha / (alpha + 2.0);
    return 2.0;
}

struct Eq49Result {
    Rational lhs; // dilated opening / pi
    Rational rhs; // 1 / p_crit
    bool holds = false;
};

inline Eq49Result eq49_check(int m, int k) {
    if (m < 2 || k < 1) throw ParameterError("eq49_check needs m >= 2 and k >= 1");
    Eq49Result r{Rational(m + 1, 2 * m * (k + 1)), Rational(2 * k * (m - 1), (2 * k + 1) * m - 1)};
    r.holds = r.lhs < r.rhs;
    return r;
}

/// Whether completeness follows for the undilated model: k > (m-1)/(2(m-2)).
inline bool no_dilation_condition(int m, int k) {
    if (m < 2 || k < 1) throw ParameterError("no_dilation_condition needs m >= 2 and k >= 1");
    if (m == 2) return false;
    return Rational(k) > Rational(m - 1, 2 * (m - 2));
}

} // namespace sectoral
