#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>

#include "sectoral/operator_model.hpp"
#include "sectoral/operator_spec.hpp"

using namespace sectoral;

namespace {

OperatorSpec custom_1d(ScalarField V1, ScalarField V2 = ScalarField(1)) {
    OperatorSpec s;
    s.dimension = 1;
    s.angles = {0.0};
    s.A.components = {ScalarField(1)};
    s.V1 = std::move(V1);
    s.V2 = std::move(V2);
    return s;
}

} // namespace

TEST_CASE("weight examples", "[operator-model]") {
    const double x1[1] = {1.0}, x7[1] = {7.0};
    CHECK(weight_m(custom_1d(ScalarField(1)), x7) == 1.0);
    const OperatorSpec cubic = make_oscillator_1d(std::numbers::pi / 2.0, 3.0, 1.0, true);
    CHECK(weight_m(cubic, x1) == Approx(std::sqrt(2.0)).epsilon(1e-15));
    const double p11[2] = {1.0, 1.0};
    CHECK(weight_m(make_dilated_model(2, 1), p11) == Approx(std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("weight is at least one and even in abs coordinates", "[operator-model]") {
    const OperatorSpec s = make_oscillator_1d(0.7, 2.5);
    for (double x = -5.0; x <= 5.0; x += 0.37) {
        const double a[1] = {x}, b[1] = {-x};
        CHECK(weight_m(s, a) >= 1.0);
        CHECK(weight_m(s, a) == weight_m(s, b));
    }
}

TEST_CASE("hypotheses of the harmonic oscillator", "[operator-model]") {
    const HypothesisReport r = validate_hypotheses(make_oscillator_1d(0.0, 2.0));
    CHECK(r.lambda_star_estimate <= 0.0);
    CHECK(std::isfinite(r.eq2_ratio_sup));
    CHECK(r.eq5_proper);
    CHECK(r.sample_count >= 100);
}

TEST_CASE("hypotheses of the complex cubic", "[operator-model]") {
    const OperatorSpec cubic = make_oscillator_1d(std::numbers::pi / 2.0, 3.0, 1.0, true);
    CHECK(validate_hypotheses(cubic).lambda_star_estimate == 0.0);
    const OperatorSpec with_v2 = make_oscillator_1d(std::numbers::pi / 2.0, 3.0, 1.0, true, 0.0, 1.0);
    const HypothesisReport r = validate_hypotheses(with_v2);
    CHECK(r.eq4_relative_growth_ok);
    CHECK(r.eq4_method == "degree");
}

TEST_CASE("hypotheses need enough samples", "[operator-model]") {
    CHECK_THROWS_AS(validate_hypotheses(make_oscillator_1d(0.0, 2.0), {}, 10), ParameterError);
}

TEST_CASE("growth signatures of the catalog", "[operator-model]") {
    for (double a : {1.0, 2.0, 3.0, 4.0, 6.0}) {
        const GrowthSignature g = growth_signature(make_oscillator_1d(0.4, a));
        REQUIRE(g.valid);
        CHECK(g.gammas == std::vector<double>{a});
    }
    for (int m = 2; m <= 5; ++m)
        for (int k = 1; k <= 3; ++k) {
            const GrowthSignature g = growth_signature(make_dilated_model(m, k));
            REQUIRE(g.valid);
            CHECK(g.gammas == std::vector<double>{double(m - 1), double(2 * k)});
            CHECK(g.kappa <= 10.0);
        }
    for (int n = 1; n <= 3; ++n) {
        const GrowthSignature g = growth_signature(make_holomorphic_2d(n));
        REQUIRE(g.valid);
        CHECK(g.gammas == std::vector<double>{double(n), double(n)});
    }
}

TEST_CASE("cross terms invalidate the signature", "[operator-model]") {
    OperatorSpec s;
    s.dimension = 2;
    s.angles = {0.0, 0.0};
    s.A.components = {ScalarField(2), ScalarField(2)};
    s.V1 = ScalarField(2, {make_term(1.0, {2.0, 2.0}), make_term(1.0, {2.0, 0.0}), make_term(1.0, {0.0, 2.0})});
    s.V2 = ScalarField(2);
    CHECK_FALSE(growth_signature(s).valid);
}

TEST_CASE("dilation changes phases, never exponents", "[operator-model]") {
    const OperatorSpec s = make_dilated_model(3, 2);
    const double a = optimal_alpha(3, 2);
    const OperatorSpec d = dilate(s, a);
    CHECK(growth_signature(d).gammas == growth_signature(s).gammas);
    const OperatorSpec back = dilate(d, -a);
    CHECK(std::fabs(back.angles[0] - s.angles[0]) <= 1e-15);
    CHECK(std::fabs(back.angles[1] - s.angles[1]) <= 1e-15);
    const OperatorSpec same = dilate(s, 0.0);
    const double pt[2] = {1.3, -0.4};
    CHECK(std::abs(same.V1.eval(pt)) == Approx(std::abs(s.V1.eval(pt))).epsilon(1e-15));
}

TEST_CASE("optimal angles and dilation bookkeeping", "[operator-model]") {
    const double pi = std::numbers::pi;
    CHECK(optimal_alpha(2, 1) == Approx(-pi / 16.0).epsilon(1e-15));
    CHECK(optimal_alpha(3, 2) == Approx(-pi / 36.0).epsilon(1e-15));
    const OperatorSpec s = dilate(make_dilated_model(2, 1), -pi / 16.0);
    const double pt[2] = {0.0, 1.0};
    CHECK(std::abs(s.V1.eval(pt) - std::polar(1.0, pi / 4.0)) <= 1e-15);
    // alpha = 0: the undilated model with i y^{2k}
    const OperatorSpec s0 = make_dilated_model(2, 1);
    CHECK(std::abs(s0.V1.eval(pt) - complex_t(0.0, 1.0)) <= 1e-15);
    CHECK(s0.angles == std::vector<double>{0.0, 0.0});
}

TEST_CASE("dilation outside the admissible range throws", "[operator-model]") {
    CHECK_THROWS_AS(dilate(make_dilated_model(2, 1), std::numbers::pi / 7.0), AngleRangeError);
    CHECK_THROWS_AS(dilate(make_oscillator_1d(0.0, 2.0), 0.01), ParameterError);
}

TEST_CASE("family parameters regenerate the operator", "[operator-model]") {
    const std::vector<OperatorSpec> catalog{
        make_oscillator_1d(0.3, 2.0), make_oscillator_1d(std::numbers::pi / 2.0, 3.0, 1.0, true),
        make_airy_half_line(std::numbers::pi / 2.0), make_holomorphic_2d(2), make_dilated_model(3, 2, -0.05),
        make_half_plane_model(std::numbers::pi / 4.0)};
    for (const auto& s : catalog) {
        const OperatorSpec r = from_family(*s.family);
        CHECK(r.V1 == s.V1);
        CHECK(r.A == s.A);
        CHECK(growth_signature(r).gammas == growth_signature(s).gammas);
        CHECK_NOTHROW(validate(s));
    }
}

TEST_CASE("validation rejects bad angles", "[operator-model]") {
    OperatorSpec s = make_oscillator_1d(0.0, 2.0);
    s.family.reset();
    s.angles = {std::numbers::pi / 4.0};
    CHECK_THROWS_AS(validate(s), AngleRangeError);
    s.angles = {0.0, 0.0};
    CHECK_THROWS_AS(validate(s), DimensionError);
}
