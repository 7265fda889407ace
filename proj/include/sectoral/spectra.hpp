#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "sectoral/criterion.hpp"
#include "sectoral/discretize.hpp"
#include "sectoral/errors.hpp"
#include "sectoral/linalg.hpp"
#include "sectoral/parallel.hpp"

namespace sectoral {

inline constexpr double machine_eps = std::numeric_limits<double>::epsilon();

/// Orders complex numbers by modulus, then real part, then imaginary part.
inline bool modulus_less(complex_t a, complex_t b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

struct SpectrumResult {
    std::vector<complex_t> eigenvalues; // sorted by modulus
    double backward_error_bound = 0.0;
    double matrix_norm = 0.0; // Frobenius
    std::vector<bool> converged;
};

/// All eigenvalues; Hermitian kinds go through the symmetric solver.
inline SpectrumResult eigenvalues(const Eigen::MatrixXcd& M, bool hermitian = false) {
    SpectrumResult r;
    r.matrix_norm = M.norm();
    r.backward_error_bound = static_cast<double>(M.rows()) * machine_eps * r.matrix_norm;
    if (hermitian) {
        const Eigen::VectorXd w = linalg::eigenvalues_hermitian(M);
        for (Eigen::Index i = 0; i < w.size(); ++i) r.eigenvalues.emplace_back(w(i), 0.0);
    } else {
        r.eigenvalues = linalg::eigenvalues(M);
    }
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), modulus_less);
    r.converged.assign(r.eigenvalues.size(), false);
    return r;
}

inline SpectrumResult eigenvalues(const AssembledOperator& op) { return eigenvalues(op.matrix, is_hermitian_kind(op.kind)); }

/// Flags eigenvalues of `fine` that have a partner in `coarse` within rtol relative distance.
inline void mark_grid_convergence(SpectrumResult& fine, const SpectrumResult& coarse, double rtol = 1e-3) {
    for (std::size_t i = 0; i < fine.eigenvalues.size(); ++i) {
        const complex_t z = fine.eigenvalues[i];
        double best = std::numeric_limits<double>::infinity();
        for (complex_t w : coarse.eigenvalues) best = std::min(best, std::abs(z - w));
        fine.converged[i] = best <= rtol * std::max(1.0, std::abs(z));
    }
}

inline Eigen::MatrixXcd shifted(const Eigen::MatrixXcd& M, complex_t lambda) {
    Eigen::MatrixXcd A = M;
    A.diagonal().array() -= lambda;
    return A;
}

/// Singular values of the resolvent (M - lambda)^{-1}, descending.
inline std::vector<double> resolvent_singular_values(const Eigen::MatrixXcd& M, complex_t lambda) {
    const Eigen::VectorXd s = linalg::singular_values(shifted(M, lambda));
    const Eigen::Index n = s.size();
    if (n == 0) return {};
    if (!(s(n - 1) > 1e-12 * std::max(s(0), 1e-300)))
        throw SingularShift("shift lies numerically on the spectrum");
    std::vector<double> mu(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) mu[static_cast<std::size_t>(k)] = 1.0 / s(n - 1 - k);
    return mu;
}

inline complex_t default_shift(double lambda_star) { return {-(1.0 + std::max(0.0, lambda_star)), 0.0}; }

struct DecayFit {
    double slope = 0.0;
    double p_estimate = 0.0;
    int window_lo = 0; // 1-based, inclusive
    int window_hi = 0;
    double residual_rms = 0.0;
    bool grid_converged = false;
    std::optional<double> slope_doubled;
    double slope_change = std::numeric_limits<double>::infinity();
};

struct Window {
    int lo = 10;
    double hi_fraction = 0.25;
};

namespace detail {

inline std::pair<double, double> fit_loglog(const std::vector<double>& v, int lo, int hi, double* rms = nullptr) {
    const int cnt = hi - lo + 1;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = lo; k <= hi; ++k) {
        const double x = std::log(static_cast<double>(k)), y = std::log(v[static_cast<std::size_t>(k - 1)]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / cnt;
    if (rms) {
        double r2 = 0.0;
        for (int k = lo; k <= hi; ++k) {
            const double e = std::log(v[static_cast<std::size_t>(k - 1)]) - (icpt + slope * std::log(static_cast<double>(k)));
            r2 += e * e;
        }
        *rms = std::sqrt(r2 / cnt);
    }
    return {slope, icpt};
}

} // namespace detail

/// Least-squares power law on (log n, log mu_n) over n in [lo, floor(frac N)].
/// The grid-doubled sequence is refit on the same index window.
inline DecayFit decay_fit(const std::vector<double>& values, const std::vector<double>* doubled = nullptr, Window w = {}) {
    if (values.size() < 100) throw ParameterError("decay_fit needs at least 100 values");
    DecayFit f;
    f.window_lo = w.lo;
    f.window_hi = static_cast<int>(std::floor(w.hi_fraction * static_cast<double>(values.size())));
    if (f.window_hi - f.window_lo + 1 < 2) throw WindowError("decay-fit window is empty");
    for (int k = f.window_lo; k <= f.window_hi; ++k)
        if (!(values[static_cast<std::size_t>(k - 1)] > 0.0)) throw WindowError("non-positive value inside the window");
    f.slope = detail::fit_loglog(values, f.window_lo, f.window_hi, &f.residual_rms).first;
    f.p_estimate = -1.0 / f.slope;
    if (doubled) {
        if (static_cast<int>(doubled->size()) < f.window_hi) throw WindowError("doubled sequence is too short");
        f.slope_doubled = detail::fit_loglog(*doubled, f.window_lo, f.window_hi).first;
        f.slope_change = std::fabs(*f.slope_doubled - f.slope) / std::fabs(f.slope);
        f.grid_converged = f.slope_change < 0.05;
    }
    return f;
}

struct FieldOfValues {
    std::vector<double> angles;
    std::vector<complex_t> boundary_points;
    std::vector<double> support; // max Re(e^{-i phi} z) over W
    Sector sector;               // arg range of boundary points about the vertex
};

/// Enclosing sector (about `vertex`) of a set of points, unwrapped around their mean direction.
inline Sector enclosing_sector(const std::vector<complex_t>& pts, complex_t vertex, double scale) {
    complex_t mean{};
    for (complex_t z : pts) {
        const complex_t d = z - vertex;
        if (std::abs(d) > 1e-12 * scale) mean += d / std::abs(d);
    }
    const double ref = std::abs(mean) > 0.0 ? std::arg(mean) : 0.0;
    double lo = 0.0, hi = 0.0;
    for (complex_t z : pts) {
        const complex_t d = z - vertex;
        if (std::abs(d) <= 1e-12 * scale) continue;
        const double rel = std::remainder(std::arg(d) - ref, 2.0 * std::numbers::pi);
        lo = std::min(lo, rel);
        hi = std::max(hi, rel);
    }
    Sector s;
    s.vertex = vertex;
    s.theta_min = ref + lo;
    s.theta_max = ref + hi;
    return s;
}

/// Boundary of W(e^{i rotation} M) from the top eigenvectors of Hermitian parts.
inline FieldOfValues field_of_values_boundary(const Eigen::MatrixXcd& M, int n_angles = 128, complex_t vertex = {},
                                              double rotation = 0.0) {
    if (n_angles < 64) throw ParameterError("field of values needs at least 64 angles");
    const Eigen::MatrixXcd R = std::polar(1.0, rotation) * M;
    FieldOfValues fov;
    fov.angles.resize(static_cast<std::size_t>(n_angles));
    fov.boundary_points.resize(fov.angles.size());
    fov.support.resize(fov.angles.size());
    parallel_for(fov.angles.size(), [&](std::size_t j) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / n_angles;
        const Eigen::MatrixXcd rot = std::polar(1.0, -phi) * R;
        const Eigen::MatrixXcd H = 0.5 * (rot + rot.adjoint());
        const auto top = linalg::extreme_eigenpair(H, true);
        const Eigen::VectorXcd& v = top.vector;
        fov.angles[j] = phi;
        fov.boundary_points[j] = v.dot(R * v) / v.squaredNorm();
        fov.support[j] = top.value;
    });
    fov.sector = enclosing_sector(fov.boundary_points, vertex, R.norm());
    fov.sector.rotation = rotation;
    return fov;
}

struct PseudospectrumGrid {
    double re_min = 0, re_max = 0, im_min = 0, im_max = 0;
    int nx = 0, ny = 0;
    std::vector<double> sigma_min; // row-major over (iy, ix)

    complex_t node(int ix, int iy) const {
        const double x = nx > 1 ? re_min + (re_max - re_min) * ix / (nx - 1) : re_min;
        const double y = ny > 1 ? im_min + (im_max - im_min) * iy / (ny - 1) : im_min;
        return {x, y};
    }
};

namespace detail {

// Solves (T - z) x = b (transpose = false) or (T - z)^* x = b for upper triangular T.
inline void triangular_solve(const Eigen::MatrixXcd& T, complex_t z, Eigen::VectorXcd& b, bool adjoint, double floor) {
    const Eigen::Index n = T.rows();
    auto pivot = [&](Eigen::Index i) {
        complex_t p = T(i, i) - z;
        if (std::abs(p) < floor) p = floor;
        return adjoint ? std::conj(p) : p;
    };
    if (!adjoint) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            complex_t s = b(i);
            for (Eigen::Index j = i + 1; j < n; ++j) s -= T(i, j) * b(j);
            b(i) = s / pivot(i);
        }
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            complex_t s = b(i);
            for (Eigen::Index j = 0; j < i; ++j) s -= std::conj(T(j, i)) * b(j);
            b(i) = s / pivot(i);
        }
    }
}

inline double sigma_min_triangular(const Eigen::MatrixXcd& T, complex_t z, double scale) {
    const Eigen::Index n = T.rows();
    double diag_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) diag_min = std::min(diag_min, std::abs(T(i, i) - z));
    const double floor = machine_eps * scale;
    if (diag_min <= floor) return diag_min;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_t{1.0 + 0.1 * std::sin(1.0 + i), 0.3 * std::cos(2.0 + i)};
    v.normalize();
    double est = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 300; ++it) {
        Eigen::VectorXcd w = v;
        triangular_solve(T, z, w, true, floor);
        triangular_solve(T, z, w, false, floor);
        const double nw = w.norm();
        const double next = 1.0 / std::sqrt(nw);
        v = w / nw;
        const bool done = std::fabs(next - est) <= 1e-14 * next;
        est = next;
        if (done) break;
    }
    // Exact residual of the final unit vector is an upper bound on sigma_min.
    Eigen::VectorXcd r = T.triangularView<Eigen::Upper>() * v - z * v;
    return std::min({est, r.norm(), diag_min});
}

} // namespace detail

inline PseudospectrumGrid pseudospectrum(const Eigen::MatrixXcd& M, double re_min, double re_max, double im_min,
                                         double im_max, int nx, int ny) {
    if (nx < 1 || ny < 1 || nx > 200 || ny > 200) throw BudgetError("pseudospectrum grid is limited to 200 x 200 nodes");
    PseudospectrumGrid g{re_min, re_max, im_min, im_max, nx, ny, {}};
    const Eigen::MatrixXcd T = linalg::schur_triangular(M);
    const double scale = std::max(M.norm(), 1e-300);
    g.sigma_min.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    parallel_for(g.sigma_min.size(), [&](std::size_t k) {
        const int iy = static_cast<int>(k / nx), ix = static_cast<int>(k % nx);
        g.sigma_min[k] = detail::sigma_min_triangular(T, g.node(ix, iy), scale);
    });
    return g;
}

inline Eigen::VectorXcd random_complex_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = nd(rng);
        const double b = nd(rng);
        v(i) = {a, b};
    }
    return v;
}

struct CoercivityResult {
    double constant = std::numeric_limits<double>::infinity(); // certified sup of the ratio
    double sampled_sup = 0.0;                                   // best sampled + refined ratio (lower bound)
    double dual_value = 0.0;                                    // max_t lambda_min, = 1 / constant
    std::array<double, 2> dual_t{0.0, 0.0};
    bool counterexample = false;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    int trials = 0;
};

namespace detail {

// Golden-section maximization of a concave function on [a, b].
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol = 1e-7) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        }
    }
    const double fa = f(a), fb = f(b);
    double best = fc, arg = c;
    if (fd > best) best = fd, arg = d;
    if (fa > best) best = fa, arg = a;
    if (fb > best) best = fb, arg = b;
    return {arg, best};
}

} // namespace detail

/// sup over u of (||D_A u||^2 + <W u, u>) / (|Im <F u, Phi u>| + |Re <F u, u>|).
///
/// The denominator is max over s in {-1,1}^2 of the Hermitian form
/// s1 H_im + s2 H_re, so by convexity of the joint numerical range the infimum
/// of the inverse ratio equals max over t in [-1,1]^2 of
/// lambda_min(L^{-1}(t1 H_im + t2 H_re)L^{-*}) with N = L L^*; that
/// function is concave and positively homogeneous, so the maximum sits on the
/// boundary of the square. Seeded random trials with gradient refinement give
/// an independent lower bound.
inline CoercivityResult coercivity_check(const Eigen::MatrixXcd& F, const Eigen::VectorXd& phi, const Eigen::MatrixXcd& N,
                                         int trials = 200, std::uint64_t seed = 20240601, double gamma = 0.0) {
    if (trials < 200) throw ParameterError("coercivity_check needs at least 200 trials");
    const Eigen::Index n = F.rows();
    if (F.cols() != n || N.rows() != n || phi.size() != n) throw DimensionError("coercivity inputs have mismatched sizes");
    CoercivityResult res;
    res.gamma = gamma;
    res.seed = seed;
    res.trials = trials;
    const complex_t I{0.0, 1.0};
    const Eigen::MatrixXcd PF = phi.asDiagonal() * F;
    const Eigen::MatrixXcd Him = (PF - PF.adjoint()) / (2.0 * I);
    const Eigen::MatrixXcd Hre = 0.5 * (F + F.adjoint());
    Eigen::LLT<Eigen::MatrixXcd> llt(N);
    if (llt.info() != Eigen::Success) throw NumericError("norm matrix is not positive definite");
    const Eigen::MatrixXcd L = llt.matrixL();
    auto congruence = [&](const Eigen::MatrixXcd& H) {
        Eigen::MatrixXcd X = L.triangularView<Eigen::Lower>().solve(H);
        Eigen::MatrixXcd Y = L.triangularView<Eigen::Lower>().solve(X.adjoint()).adjoint();
        return Eigen::MatrixXcd(0.5 * (Y + Y.adjoint()));
    };
    const Eigen::MatrixXcd A1 = congruence(Him), A2 = congruence(Hre);
    auto g = [&](double t1, double t2) { return linalg::extreme_eigenpair(t1 * A1 + t2 * A2, false).value; };

    // Edges of the square, each parametrized by s in [-1, 1].
    struct Edge {
        double fixed;
        bool first_fixed;
    };
    const Edge edges[4] = {{1.0, true}, {-1.0, true}, {1.0, false}, {-1.0, false}};
    double best = -std::numeric_limits<double>::infinity();
    for (const Edge& e : edges) {
        auto f = [&](double s) { return e.first_fixed ? g(e.fixed, s) : g(s, e.fixed); };
        const auto [arg, val] = detail::golden_max(f, -1.0, 1.0);
        if (val > best) {
            best = val;
            res.dual_t = e.first_fixed ? std::array<double, 2>{e.fixed, arg} : std::array<double, 2>{arg, e.fixed};
        }
    }
    res.dual_value = best;
    const double normN = N.norm();
    if (best <= 1e-14) {
        res.counterexample = true;
        res.constant = std::numeric_limits<double>::infinity();
    } else {
        res.constant = 1.0 / best;
    }

    // Sampled lower bound.
    auto ratio = [&](const Eigen::VectorXcd& u, double* den_out = nullptr) {
        const double num = u.dot(N * u).real();
        const double a = u.dot(Him * u).real(), b = u.dot(Hre * u).real();
        const double den = std::fabs(a) + std::fabs(b);
        if (den_out) *den_out = den;
        return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
    };
    std::mt19937_64 rng(seed);
    std::vector<std::pair<double, Eigen::VectorXcd>> cand;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXcd u = random_complex_vector(n, rng);
        u.normalize();
        double den = 0.0;
        const double r = ratio(u, &den);
        if (den < 1e-14 * std::max(1.0, normN)) res.counterexample = true;
        cand.emplace_back(r, std::move(u));
    }
    std::stable_sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    const std::size_t top = std::min<std::size_t>(5, cand.size());
    for (std::size_t c = 0; c < top; ++c) {
        Eigen::VectorXcd u = cand[c].second;
        double r = cand[c].first;
        double step = 0.1;
        for (int it = 0; it < 50; ++it) {
            const double num = u.dot(N * u).real();
            const double a = u.dot(Him * u).real(), b = u.dot(Hre * u).real();
            const double den = std::fabs(a) + std::fabs(b);
            const Eigen::VectorXcd gd = (N * u) * den - (std::copysign(1.0, a) * (Him * u) + std::copysign(1.0, b) * (Hre * u)) * num;
            const double gn = gd.norm();
            if (!(gn > 0.0)) break;
            Eigen::VectorXcd trial = u + step * gd / gn;
            trial.normalize();
            const double rt = ratio(trial);
            if (rt > r) {
                u = trial;
                r = rt;
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
        cand[c].first = r;
    }
    for (const auto& c : cand) res.sampled_sup = std::max(res.sampled_sup, c.first);
    return res;
}

struct LaxMilgramResult {
    double alpha_emp = 0.0;
    double sigma_min = 0.0;
    double phi_norm = 0.0;
    double bound = 0.0; // alpha_emp / (1 + ||Phi||)
    bool holds = false;
};

/// Checks sigma_min(A) >= alpha_emp/(1 + ||Phi||) - 1e-10, where alpha_emp is
/// the minimum of (|<Au,u>| + |<Au,Phi u>|)/||u||^2 over random vectors and the
/// right singular vectors of the five smallest singular values of A.
inline LaxMilgramResult laxmilgram_bound_check(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& Phi, int samples = 200,
                                               std::uint64_t seed = 20240601) {
    const Eigen::Index n = A.rows();
    LaxMilgramResult r;
    const auto sv = linalg::svd(A);
    r.sigma_min = sv.s(n - 1);
    r.phi_norm = linalg::singular_values(Phi)(0);
    auto q = [&](const Eigen::VectorXcd& u) {
        const Eigen::VectorXcd Au = A * u;
        return (std::abs(u.dot(Au)) + std::abs((Phi * u).dot(Au))) / u.squaredNorm();
    };
    double amin = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    for (int t = 0; t < samples; ++t) amin = std::min(amin, q(random_complex_vector(n, rng)));
    for (Eigen::Index k = std::max<Eigen::Index>(0, n - 5); k < n; ++k) amin = std::min(amin, q(sv.V.col(k)));
    r.alpha_emp = amin;
    r.bound = amin / (1.0 + r.phi_norm);
    r.holds = r.sigma_min >= r.bound - 1e-10;
    return r;
}

struct ComparisonResult {
    std::vector<double> nu, mu;       // ascending
    std::vector<double> ratio_nu_mu;  // nu_n / (1 + mu_n) over the window
    std::vector<double> ratio_mu_nu;  // mu_n / (1 + nu_n) over the window
    double sup_nu_mu = 0.0, sup_mu_nu = 0.0;
    int window_lo = 0, window_hi = 0;
};

/// Eigenvalues of S against singular values of P - lambda, compared index by index.
inline ComparisonResult eigen_comparison(const Eigen::MatrixXcd& S, const Eigen::MatrixXcd& P, complex_t lambda,
                                         Window w = {}) {
    if (S.rows() != P.rows()) throw DimensionError("comparison needs matched grids");
    ComparisonResult c;
    const Eigen::VectorXd ev = linalg::eigenvalues_hermitian(S);
    const Eigen::VectorXd sv = linalg::singular_values(shifted(P, lambda));
    const Eigen::Index n = ev.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        c.nu.push_back(ev(i));
        c.mu.push_back(sv(n - 1 - i));
    }
    c.window_lo = w.lo;
    c.window_hi = static_cast<int>(std::floor(w.hi_fraction * static_cast<double>(n)));
    if (c.window_hi < c.window_lo) throw WindowError("comparison window is empty");
    for (int k = c.window_lo; k <= c.window_hi; ++k) {
        const double nu = c.nu[static_cast<std::size_t>(k - 1)], mu = c.mu[static_cast<std::size_t>(k - 1)];
        c.ratio_nu_mu.push_back(nu / (1.0 + mu));
        c.ratio_mu_nu.push_back(mu / (1.0 + nu));
        c.sup_nu_mu = std::max(c.sup_nu_mu, c.ratio_nu_mu.back());
        c.sup_mu_nu = std::max(c.sup_mu_nu, c.ratio_mu_nu.back());
    }
    return c;
}

} // namespace sectoral
