#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sectoral/errors.hpp"
#include "sectoral/operator_model.hpp"
#include "sectoral/operator_spec.hpp"
#include "sectoral/parallel.hpp"
#include "sectoral/spec_io.hpp"

namespace sectoral {

inline constexpr std::size_t dof_budget = 5000;

/// Uniform Dirichlet grid; interior nodes only, last axis varies fastest.
struct Grid {
    std::vector<double> lower, upper;
    std::vector<int> n;

    std::size_t dimension() const noexcept { return n.size(); }
    double h(std::size_t a) const { return (upper[a] - lower[a]) / (n[a] + 1); }
    double node(std::size_t a, int i) const { return lower[a] + (i + 1) * h(a); }
    std::size_t dof() const {
        std::size_t s = 1;
        for (int v : n) s *= static_cast<std::size_t>(v);
        return s;
    }
    double cell_volume() const {
        double v = 1.0;
        for (std::size_t a = 0; a < dimension(); ++a) v *= h(a);
        return v;
    }
    std::size_t stride(std::size_t a) const {
        std::size_t s = 1;
        for (std::size_t b = a + 1; b < dimension(); ++b) s *= static_cast<std::size_t>(n[b]);
        return s;
    }
    std::array<int, 2> index(std::size_t p) const {
        if (dimension() == 1) return {static_cast<int>(p), 0};
        return {static_cast<int>(p / n[1]), static_cast<int>(p % n[1])};
    }
    std::vector<double> point(std::size_t p) const {
        const auto ij = index(p);
        std::vector<double> x(dimension());
        for (std::size_t a = 0; a < dimension(); ++a) x[a] = node(a, ij[a]);
        return x;
    }

    friend bool operator==(const Grid&, const Grid&) = default;
};

inline Grid make_grid(const OperatorSpec& s, std::vector<double> L, std::vector<int> n) {
    const auto d = static_cast<std::size_t>(s.dimension);
    if (L.size() == 1) L.assign(d, L[0]);
    if (n.size() == 1) n.assign(d, n[0]);
    if (L.size() != d || n.size() != d) throw DimensionError("grid needs one halfwidth and one count per axis");
    Grid g;
    for (std::size_t a = 0; a < d; ++a) {
        if (!(L[a] > 0.0) || !std::isfinite(L[a])) throw ParameterError("box halfwidth must be positive");
        if (n[a] < 8) throw ParameterError("at least 8 interior points per axis are required");
        const bool half = s.domain == DomainKind::half_space && a + 1 == d;
        g.lower.push_back(half ? 0.0 : -L[a]);
        g.upper.push_back(L[a]);
        g.n.push_back(n[a]);
    }
    if (g.dof() > dof_budget)
        throw BudgetError("grid has " + std::to_string(g.dof()) + " unknowns, budget is " + std::to_string(dof_budget));
    return g;
}

inline Grid make_grid(const OperatorSpec& s, double L, int n) { return make_grid(s, std::vector<double>{L}, std::vector<int>{n}); }

/// Smallest halfwidth (searched on a 0.25 lattice up to Lmax) with
/// min over the box boundary of Re(e^{-i theta_mid} V1) + |B| + gamma >= 25 |lambda_target|.
inline double default_halfwidth(const OperatorSpec& s, double theta_mid, double lambda_target, double gamma = 1.0,
                                double Lmax = 60.0) {
    const Weight w(s);
    const complex_t rot = std::polar(1.0, -theta_mid);
    const double need = 25.0 * std::abs(lambda_target);
    for (double L = 1.0; L <= Lmax; L += 0.25) {
        const SampleBox b = default_box(s, {L});
        double mn = 1e300;
        for (const auto& x : shell_samples(b, 1.0, 32)) {
            // Confinement proxy; the zero boundary face of a half space is exact and skipped.
            if (s.domain == DomainKind::half_space && x.back() == 0.0) continue;
            const double conf = (rot * s.V1.eval(x)).real() + std::sqrt(magnetic_norm2(w.B(), x)) + gamma;
            mn = std::min(mn, conf);
        }
        if (mn >= need) return L;
    }
    return Lmax;
}

enum class OperatorKind { P, selfadjoint_absV, selfadjoint_weight, form_a_gamma, multiplier_phi1 };

inline std::string to_string(OperatorKind k) {
    switch (k) {
    case OperatorKind::P: return "P";
    case OperatorKind::selfadjoint_absV: return "selfadjoint_absV";
    case OperatorKind::selfadjoint_weight: return "selfadjoint_weight";
    case OperatorKind::form_a_gamma: return "form_a_gamma";
    case OperatorKind::multiplier_phi1: return "multiplier_phi1";
    }
    return "P";
}

inline bool is_hermitian_kind(OperatorKind k) {
    return k == OperatorKind::selfadjoint_absV || k == OperatorKind::selfadjoint_weight ||
           k == OperatorKind::multiplier_phi1;
}

/// Magnetic stencil. expanded: -D2 + 2iA D1 + i dA + A^2 (symmetrized for
/// Hermitian kinds); peierls: link phases exp(-i int A) on every edge.
enum class Stencil { expanded, peierls };

inline std::string to_string(Stencil s) { return s == Stencil::expanded ? "expanded" : "peierls"; }

inline Stencil stencil_from_string(const std::string& s) {
    if (s == "expanded") return Stencil::expanded;
    if (s == "peierls") return Stencil::peierls;
    throw ParameterError("unknown stencil '" + s + "'");
}

struct AssembledOperator {
    Eigen::MatrixXcd matrix;
    Grid grid;
    std::string spec_hash;
    OperatorKind kind = OperatorKind::P;
    Stencil stencil = Stencil::expanded;
};

namespace detail {

// Line integral of A_a along the edge from x to x + h e_a (3-point Gauss).
inline double edge_flux(const ScalarField& Aa, std::vector<double> x, std::size_t a, double h) {
    static constexpr double nodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double x0 = x[a];
    double sum = 0.0;
    for (int q = 0; q < 3; ++q) {
        x[a] = x0 + 0.5 * h * (1.0 + nodes[q]);
        sum += weights[q] * Aa.eval(x).real();
    }
    return 0.5 * h * sum;
}

struct KineticTerms {
    std::vector<ScalarField> A, dA;
    std::vector<complex_t> coeff;
};

inline KineticTerms kinetic_terms(const OperatorSpec& s, bool hermitian) {
    KineticTerms t;
    for (std::size_t a = 0; a < s.A.components.size(); ++a) {
        t.A.push_back(s.A.components[a]);
        t.dA.push_back(s.A.components[a].derivative(a));
        t.coeff.push_back(hermitian ? complex_t{1.0, 0.0} : std::polar(1.0, 2.0 * s.angles[a]));
    }
    return t;
}

template <class Diagonal>
AssembledOperator assemble_kinetic(const OperatorSpec& s, const Grid& g, OperatorKind kind, Stencil st, bool hermitian,
                                   Diagonal&& diag) {
    validate(s);
    if (g.dimension() != static_cast<std::size_t>(s.dimension)) throw DimensionError("grid and spec dimensions differ");
    const KineticTerms kt = kinetic_terms(s, hermitian);
    const std::size_t N = g.dof(), d = g.dimension();
    AssembledOperator op;
    op.matrix = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    op.grid = g;
    op.spec_hash = spec_hash(s);
    op.kind = kind;
    op.stencil = st;
    const complex_t I{0.0, 1.0};
    parallel_for(N, [&](std::size_t p) {
        const auto ij = g.index(p);
        const std::vector<double> x = g.point(p);
        complex_t dsum = diag(x);
        for (std::size_t a = 0; a < d; ++a) {
            const double h = g.h(a);
            const complex_t c = kt.coeff[a];
            const std::size_t str = g.stride(a);
            const bool has_next = ij[a] + 1 < g.n[a], has_prev = ij[a] > 0;
            complex_t up, dn;
            if (st == Stencil::peierls) {
                const double th_up = edge_flux(kt.A[a], x, a, h);
                std::vector<double> xm = x;
                xm[a] -= h;
                const double th_dn = edge_flux(kt.A[a], xm, a, h);
                dsum += c * (2.0 / (h * h));
                up = -c * std::polar(1.0, -th_up) / (h * h);
                dn = -c * std::polar(1.0, th_dn) / (h * h);
            } else {
                const double Ax = kt.A[a].eval(x).real();
                if (hermitian) {
                    std::vector<double> xn = x, xp = x;
                    xn[a] += h;
                    xp[a] -= h;
                    const double An = kt.A[a].eval(xn).real(), Ap = kt.A[a].eval(xp).real();
                    dsum += c * (2.0 / (h * h) + Ax * Ax);
                    up = c * (-1.0 / (h * h) + I * (Ax + An) / (2.0 * h));
                    dn = c * (-1.0 / (h * h) - I * (Ax + Ap) / (2.0 * h));
                } else {
                    const double dAx = kt.dA[a].eval(x).real();
                    dsum += c * (2.0 / (h * h) + I * dAx + Ax * Ax);
                    up = c * (-1.0 / (h * h) + I * Ax / h);
                    dn = c * (-1.0 / (h * h) - I * Ax / h);
                }
            }
            const auto row = static_cast<Eigen::Index>(p);
            if (has_next) op.matrix(row, static_cast<Eigen::Index>(p + str)) = up;
            if (has_prev) op.matrix(row, static_cast<Eigen::Index>(p - str)) = dn;
        }
        op.matrix(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) = dsum;
    });
    return op;
}

} // namespace detail

/// Dense matrix of sum_k e^{2i alpha_k}(-d_{A_k}^2) + V1 + V2 with Dirichlet conditions.
inline AssembledOperator assemble_P(const OperatorSpec& s, const Grid& g, Stencil st = Stencil::expanded) {
    const ScalarField V = s.V1 + s.V2;
    return detail::assemble_kinetic(s, g, OperatorKind::P, st, false, [&](const std::vector<double>& x) { return V.eval(x); });
}

enum class SelfAdjointVariant { absV, weight };

/// -Delta_A + |V| or -Delta_A + m, Hermitian by construction.
inline AssembledOperator assemble_selfadjoint(const OperatorSpec& s, const Grid& g, SelfAdjointVariant v,
                                              Stencil st = Stencil::expanded) {
    if (v == SelfAdjointVariant::absV) {
        const ScalarField V = s.V1 + s.V2;
        return detail::assemble_kinetic(s, g, OperatorKind::selfadjoint_absV, st, true,
                                        [&](const std::vector<double>& x) { return complex_t{std::abs(V.eval(x)), 0.0}; });
    }
    const Weight w(s);
    return detail::assemble_kinetic(s, g, OperatorKind::selfadjoint_weight, st, true,
                                    [&](const std::vector<double>& x) { return complex_t{w(x), 0.0}; });
}

using SparseC = Eigen::SparseMatrix<complex_t>;

/// Everything needed to evaluate the sesquilinear form and its norms on a grid.
struct FormAssembly {
    AssembledOperator form;         // F = sum e^{2i alpha_k} D_k^* D_k + diag(V + gamma)
    AssembledOperator phi1;         // diag(Im V1 / m)
    std::vector<SparseC> D;         // edge difference operators D_k
    Eigen::VectorXd weight;         // m at the nodes
    Eigen::VectorXd re_v1;          // Re V1 at the nodes
    Eigen::MatrixXcd gradient_gram; // sum D_k^* D_k
    double gamma = 0.0;
    double K = 1.0;
};

inline FormAssembly assemble_form(const OperatorSpec& s, const Grid& g, double gamma, Stencil st = Stencil::expanded) {
    if (!(gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
    validate(s);
    if (g.dimension() != static_cast<std::size_t>(s.dimension)) throw DimensionError("grid and spec dimensions differ");
    const std::size_t N = g.dof(), d = g.dimension();
    const Weight w(s);
    const ScalarField V = s.V1 + s.V2;
    FormAssembly fa;
    fa.gamma = gamma;
    fa.K = s.ellipticity();
    fa.weight.resize(static_cast<Eigen::Index>(N));
    fa.re_v1.resize(static_cast<Eigen::Index>(N));
    Eigen::VectorXcd vdiag(static_cast<Eigen::Index>(N));
    Eigen::VectorXcd phidiag(static_cast<Eigen::Index>(N));
    for (std::size_t p = 0; p < N; ++p) {
        const auto x = g.point(p);
        const double m = w(x);
        const complex_t v1 = s.V1.eval(x);
        const auto i = static_cast<Eigen::Index>(p);
        fa.weight(i) = m;
        fa.re_v1(i) = v1.real();
        vdiag(i) = V.eval(x) + gamma;
        phidiag(i) = v1.imag() / m;
    }
    const complex_t I{0.0, 1.0};
    Eigen::MatrixXcd F = vdiag.asDiagonal();
    fa.gradient_gram = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    for (std::size_t a = 0; a < d; ++a) {
        const double h = g.h(a);
        const std::size_t str = g.stride(a);
        // Edges along axis a: n_a + 1 per line, including the two touching the Dirichlet faces.
        std::vector<Eigen::Triplet<complex_t>> trip;
        std::size_t e = 0;
        for (std::size_t p = 0; p < N; ++p) {
            const auto ij = g.index(p);
            if (ij[a] != 0) continue;
            for (int j = -1; j < g.n[a]; ++j, ++e) {
                // Edge between node j and j+1 along the line through p (j = -1 and n_a are boundary nodes).
                std::vector<double> xl = g.point(p);
                xl[a] = g.node(a, j);
                const bool left = j >= 0, right = j + 1 < g.n[a];
                const std::size_t pl = p + static_cast<std::size_t>(std::max(j, 0)) * str;
                const std::size_t pr = p + static_cast<std::size_t>(j + 1) * str;
                complex_t cl, cr;
                if (st == Stencil::peierls) {
                    const double th = detail::edge_flux(s.A.components[a], xl, a, h);
                    cl = -1.0 / h;
                    cr = std::polar(1.0, -th) / h;
                } else {
                    std::vector<double> xm = xl;
                    xm[a] += 0.5 * h;
                    const double Am = s.A.components[a].eval(xm).real();
                    cl = -1.0 / h - 0.5 * I * Am;
                    cr = 1.0 / h - 0.5 * I * Am;
                }
                if (left) trip.emplace_back(static_cast<int>(e), static_cast<int>(pl), cl);
                if (right) trip.emplace_back(static_cast<int>(e), static_cast<int>(pr), cr);
            }
        }
        SparseC Dk(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(N));
        Dk.setFromTriplets(trip.begin(), trip.end());
        const Eigen::MatrixXcd G = Eigen::MatrixXcd(SparseC(Dk.adjoint() * Dk));
        F += std::polar(1.0, 2.0 * s.angles[a]) * G;
        fa.gradient_gram += G;
        fa.D.push_back(std::move(Dk));
    }
    const std::string hash = spec_hash(s);
    fa.form = AssembledOperator{std::move(F), g, hash, OperatorKind::form_a_gamma, st};
    fa.phi1 = AssembledOperator{Eigen::MatrixXcd(phidiag.asDiagonal()), g, hash, OperatorKind::multiplier_phi1, st};
    return fa;
}

} // namespace sectoral
