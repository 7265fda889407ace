#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "sectoral/field.hpp"
#include "sectoral/operator_model.hpp"
#include "sectoral/operator_spec.hpp"

using namespace sectoral;

namespace {

const complex_t I{0.0, 1.0};

ScalarField field1(complex_t c, double e, FactorKind k = FactorKind::power) {
    return ScalarField(1, {make_term(c, {e}, {k})});
}

} // namespace

TEST_CASE("monomial evaluation", "[field]") {
    const double x2[1] = {2.0}, xm4[1] = {-4.0}, x3[1] = {3.0};
    CHECK(field1(1.0, 3.0).eval(x2) == complex_t(8.0));
    const complex_t v = field1(I, 1.5, FactorKind::abs_power).eval(xm4);
    CHECK(v.real() == Approx(0.0).margin(1e-14));
    CHECK(v.imag() == Approx(8.0).epsilon(1e-14));
    const complex_t w = make_oscillator_1d(std::numbers::pi / 2.0, 2.0).V1.eval(x3);
    CHECK(w.real() == Approx(0.0).margin(1e-14));
    CHECK(w.imag() == Approx(9.0).epsilon(1e-14));
}

TEST_CASE("evaluation rejects a point of the wrong dimension", "[field]") {
    const double pt[2] = {1.0, 2.0};
    CHECK_THROWS_AS(field1(1.0, 2.0).eval(pt), DimensionError);
}

TEST_CASE("power factors need integer exponents", "[field]") {
    CHECK_THROWS_AS(field1(1.0, 1.5), SpecError);
    CHECK_NOTHROW(field1(1.0, 1.5, FactorKind::abs_power));
}

TEST_CASE("symbolic derivatives match central differences", "[field]") {
    const ScalarField f(2, {make_term({1.5, -0.5}, {3.0, 1.0}), make_term(2.0, {2.5, 0.0}, {FactorKind::abs_power}),
                            make_term({0.0, 1.0}, {0.0, 4.0})});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 10; ++t) {
        const double x[2] = {u(rng), u(rng)};
        for (std::size_t a = 0; a < 2; ++a) {
            const double h = 1e-5;
            double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
            xp[a] += h;
            xm[a] -= h;
            const complex_t fd = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
            const complex_t sym = f.derivative(a).eval(x);
            CHECK(std::abs(fd - sym) <= 1e-6 * (1.0 + std::abs(sym)));
        }
    }
}

TEST_CASE("abs powers below one are not differentiable", "[field]") {
    const ScalarField f = field1(1.0, 0.5, FactorKind::abs_power);
    CHECK_FALSE(f.differentiable());
    CHECK_THROWS_AS(f.derivative(0), NonDifferentiableError);
}

TEST_CASE("canonical form merges like terms and drops zeros", "[field]") {
    const ScalarField a(1, {make_term(1.0, {2.0}), make_term(2.0, {2.0}), make_term(1.0, {1.0}), make_term(-1.0, {1.0})});
    const ScalarField b(1, {make_term(3.0, {2.0})});
    CHECK(a == b);
    CHECK((a - b).empty());
}

TEST_CASE("magnetic matrix of the quadratic gauge", "[operator-model]") {
    VectorField A{{ScalarField(2), ScalarField(2, {make_term(0.5, {2.0, 0.0})})}};
    const FieldMatrix B = magnetic_matrix(A);
    CHECK(B.is_antisymmetric());
    for (double x : {-1.5, 0.0, 0.7, 2.0}) {
        const double pt[2] = {x, 0.3};
        CHECK(B(0, 1).eval(pt) == complex_t(-x));
        CHECK(B(1, 0).eval(pt) == complex_t(x));
    }
}

TEST_CASE("magnetic matrix matches a finite-difference curl", "[operator-model]") {
    for (int m : {2, 3, 4}) {
        const OperatorSpec s = make_dilated_model(m, 1);
        const FieldMatrix B = magnetic_matrix(s.A);
        CHECK(B.is_antisymmetric());
        std::mt19937_64 rng(static_cast<std::uint64_t>(m));
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int t = 0; t < 10; ++t) {
            const double x = u(rng), y = u(rng), h = 1e-5;
            auto Acomp = [&](std::size_t j, double px, double py) {
                const double pt[2] = {px, py};
                return s.A.components[j].eval(pt).real();
            };
            // B_12 = d_2 A_1 - d_1 A_2
            const double fd = (Acomp(0, x, y + h) - Acomp(0, x, y - h)) / (2 * h) -
                              (Acomp(1, x + h, y) - Acomp(1, x - h, y)) / (2 * h);
            const double pt[2] = {x, y};
            CHECK(B(0, 1).eval(pt).real() == Approx(fd).margin(1e-6));
            CHECK(B(0, 1).eval(pt).real() == Approx(-std::pow(x, m - 1)).margin(1e-12));
        }
    }
}

TEST_CASE("zero potential gives zero field", "[operator-model]") {
    VectorField A{{ScalarField(2), ScalarField(2)}};
    const FieldMatrix B = magnetic_matrix(A);
    CHECK(B(0, 1).empty());
    CHECK(B(1, 0).empty());
}
