#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "sectoral/discretize.hpp"
#include "sectoral/spectra.hpp"

using namespace sectoral;

namespace {

constexpr double pi = std::numbers::pi;

OperatorSpec free_1d() {
    OperatorSpec s;
    s.dimension = 1;
    s.angles = {0.0};
    s.A.components = {ScalarField(1)};
    s.V1 = ScalarField(1);
    s.V2 = ScalarField(1);
    return s;
}

double max_abs(const Eigen::MatrixXcd& M) { return M.cwiseAbs().maxCoeff(); }

std::vector<complex_t> lowest(const AssembledOperator& op, bool herm = false) {
    return eigenvalues(op.matrix, herm || is_hermitian_kind(op.kind)).eigenvalues;
}

} // namespace

TEST_CASE("grid geometry", "[discretize]") {
    const Grid g = make_grid(make_oscillator_1d(0.0, 2.0), 10.0, 999);
    CHECK(g.h(0) == Approx(0.02).epsilon(1e-14));
    const Grid a = make_grid(make_airy_half_line(pi / 2.0), 30.0, 2999);
    CHECK(a.h(0) == Approx(0.01).epsilon(1e-14));
    CHECK(a.node(0, 0) == Approx(0.01).epsilon(1e-14));
    const Grid d = make_grid(make_dilated_model(2, 1), 8.0, 60);
    CHECK(d.dof() == 3600);
    CHECK_THROWS_AS(make_grid(make_dilated_model(2, 1), 8.0, 80), BudgetError);
}

TEST_CASE("Dirichlet Laplacian eigenvalues converge at second order", "[discretize]") {
    const OperatorSpec s = free_1d();
    const auto e1 = lowest(assemble_P(s, make_grid(s, pi / 2.0, 100)), true);
    const auto e2 = lowest(assemble_P(s, make_grid(s, pi / 2.0, 201)), true);
    for (int k = 1; k <= 3; ++k) {
        CHECK(e2[k - 1].real() == Approx(k * k).epsilon(1e-3));
        // h halves exactly (n+1 doubles)
        const double r1 = std::fabs(e1[k - 1].real() - k * k), r2 = std::fabs(e2[k - 1].real() - k * k);
        const double order = std::log2(r1 / r2);
        CHECK(order >= 1.7);
    }
}

TEST_CASE("harmonic oscillator ground state", "[discretize]") {
    const OperatorSpec s = make_oscillator_1d(0.0, 2.0);
    const auto ev = lowest(assemble_P(s, make_grid(s, 12.0, 600)), true);
    CHECK(ev[0].real() == Approx(1.0).epsilon(1e-3));
    CHECK(ev[1].real() == Approx(3.0).epsilon(1e-3));
}

TEST_CASE("self-adjoint variants", "[discretize]") {
    const OperatorSpec cubic = make_oscillator_1d(pi / 2.0, 3.0, 1.0, true);
    const Grid g = make_grid(cubic, 4.0, 50);
    const AssembledOperator S = assemble_selfadjoint(cubic, g, SelfAdjointVariant::absV);
    CHECK(max_abs(S.matrix - S.matrix.adjoint()) <= 1e-12 * max_abs(S.matrix));
    const double h = g.h(0);
    for (int i = 0; i < 50; ++i) {
        const double x = g.node(0, i);
        CHECK(S.matrix(i, i).real() == Approx(2.0 / (h * h) + std::pow(std::fabs(x), 3)).epsilon(1e-13));
    }
    const OperatorSpec s0 = free_1d();
    const AssembledOperator W = assemble_selfadjoint(s0, make_grid(s0, 4.0, 50), SelfAdjointVariant::weight);
    const AssembledOperator L = assemble_P(s0, make_grid(s0, 4.0, 50));
    CHECK(max_abs(W.matrix - L.matrix - Eigen::MatrixXcd::Identity(50, 50)) <= 1e-12);
}

TEST_CASE("weight variant of the dilated model carries m on the diagonal", "[discretize]") {
    const OperatorSpec s = make_dilated_model(2, 1);
    OperatorSpec bare = s;
    bare.family.reset();
    bare.V1 = ScalarField(2);
    const Grid g = make_grid(s, 3.0, 12);
    const AssembledOperator W = assemble_selfadjoint(s, g, SelfAdjointVariant::weight);
    const AssembledOperator K = assemble_selfadjoint(bare, g, SelfAdjointVariant::absV);
    for (std::size_t p = 0; p < g.dof(); ++p) {
        const auto x = g.point(p);
        const auto i = static_cast<Eigen::Index>(p);
        const double want = std::sqrt(std::pow(x[1], 4) + x[0] * x[0] + 1.0);
        CHECK((W.matrix(i, i) - K.matrix(i, i)).real() == Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("Hermiticity of every self-adjoint assembly", "[discretize]") {
    for (const auto& s : {make_dilated_model(2, 1, -0.1), make_holomorphic_2d(1), make_half_plane_model(0.5)})
        for (Stencil st : {Stencil::expanded, Stencil::peierls})
            for (SelfAdjointVariant v : {SelfAdjointVariant::absV, SelfAdjointVariant::weight}) {
                const AssembledOperator S = assemble_selfadjoint(s, make_grid(s, 3.0, 10), v, st);
                CHECK(max_abs(S.matrix - S.matrix.adjoint()) <= 1e-12 * max_abs(S.matrix));
            }
}

TEST_CASE("stencils agree as the grid is refined", "[discretize]") {
    const OperatorSpec s = make_dilated_model(2, 1, optimal_alpha(2, 1));
    auto ground = [&](int n, Stencil st) { return lowest(assemble_P(s, make_grid(s, 4.0, n), st))[0]; };
    const double d1 = std::abs(ground(16, Stencil::expanded) - ground(16, Stencil::peierls));
    const double d2 = std::abs(ground(32, Stencil::expanded) - ground(32, Stencil::peierls));
    CHECK(d2 < d1);
}

TEST_CASE("form of a real coercive operator is Hermitian positive definite", "[discretize]") {
    const OperatorSpec s = make_oscillator_1d(0.0, 2.0);
    const FormAssembly fa = assemble_form(s, make_grid(s, 5.0, 80), 0.0);
    const Eigen::MatrixXcd& F = fa.form.matrix;
    CHECK(max_abs(F - F.adjoint()) <= 1e-12 * max_abs(F));
    CHECK(linalg::eigenvalues_hermitian(F)(0) > 0.0);
}

TEST_CASE("multiplier of the cubic", "[discretize]") {
    const OperatorSpec s = make_oscillator_1d(pi / 2.0, 3.0, 1.0, true);
    const Grid g = make_grid(s, 3.0, 40);
    const FormAssembly fa = assemble_form(s, g, 1.0);
    for (int i = 0; i < 40; ++i) {
        const double x = g.node(0, i);
        const double phi = fa.phi1.matrix(i, i).real();
        CHECK(phi == Approx(x * x * x / std::sqrt(std::pow(x, 6) + 1.0)).epsilon(1e-14));
        CHECK(std::fabs(phi) < 1.0);
    }
}

TEST_CASE("discrete ellipticity lower bound", "[discretize]") {
    const std::vector<OperatorSpec> specs{make_oscillator_1d(pi / 3.0, 2.0), make_oscillator_1d(pi / 2.0, 3.0, 1.0, true),
                                          make_dilated_model(2, 1, optimal_alpha(2, 1)), make_holomorphic_2d(1)};
    std::mt19937_64 rng(11);
    for (const auto& s : specs)
        for (Stencil st : {Stencil::expanded, Stencil::peierls}) {
            const double gamma = 1.0;
            const FormAssembly fa = assemble_form(s, make_grid(s, 3.0, s.dimension == 1 ? 60 : 10), gamma, st);
            const auto n = fa.form.matrix.rows();
            for (int t = 0; t < 200; ++t) {
                const Eigen::VectorXcd u = random_complex_vector(n, rng);
                double grad = 0.0;
                for (const auto& D : fa.D) grad += (D * u).squaredNorm();
                const double pot = (u.cwiseAbs2().array() * (fa.re_v1.array() + gamma)).sum();
                const double lhs = u.dot(fa.form.matrix * u).real() - fa.K * grad - pot;
                CHECK(lhs >= -1e-10 * u.squaredNorm() * (1.0 + fa.form.matrix.norm()));
            }
        }
}

TEST_CASE("constant gauge shifts barely move the spectrum", "[discretize]") {
    OperatorSpec s = make_oscillator_1d(0.0, 2.0);
    const int n = 400;
    const double L = 8.0;
    const auto e0 = lowest(assemble_P(s, make_grid(s, L, n)), true);
    const auto e0f = lowest(assemble_P(s, make_grid(s, L, 2 * n + 1)), true);
    const double trunc = std::abs(e0[0] - e0f[0]);
    OperatorSpec g = s;
    g.family.reset();
    g.A.components = {ScalarField(1, {make_term(0.5, {0.0})})};
    const auto eg = lowest(assemble_P(g, make_grid(g, L, n)));
    CHECK(std::abs(eg[0] - e0[0]) <= 10.0 * trunc);
}

TEST_CASE("enlarging the box leaves the ground state in place", "[discretize]") {
    const OperatorSpec s = make_oscillator_1d(0.0, 2.0);
    const auto a = lowest(assemble_P(s, make_grid(s, 8.0, 399)), true);
    const auto b = lowest(assemble_P(s, make_grid(s, 12.0, 599)), true);
    CHECK(std::abs(a[0] - b[0]) / std::abs(b[0]) < 1e-3);
}
