#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>

#include "sectoral/acceptance.hpp"
#include "sectoral/analysis.hpp"
#include "sectoral/criterion.hpp"

using namespace sectoral;

namespace {

constexpr double pi = std::numbers::pi;

GrowthSignature sig(std::vector<double> g) {
    GrowthSignature s;
    s.gammas = std::move(g);
    s.constants.assign(s.gammas.size(), 1.0);
    s.valid = true;
    return s;
}

// Composite Simpson on [-R, R] after x = tan(t), an independent check of the closed form.
double xi_simpson_1d(double p, double m) {
    const int n = 200000;
    const double a = -pi / 2.0, b = pi / 2.0, h = (b - a) / n;
    auto f = [&](double t) {
        if (std::fabs(std::fabs(t) - pi / 2.0) < 1e-15) return 0.0;
        const double x = std::tan(t);
        return std::pow(x * x + m, -p) * (1.0 + x * x);
    };
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

} // namespace

TEST_CASE("xi integral closed form", "[criterion]") {
    CHECK(xi_integral_constant(1.0, 1) == Approx(pi).epsilon(1e-15));
    CHECK(xi_integral_constant(2.0, 2) == Approx(pi).epsilon(1e-15));
    const double want = std::sqrt(pi) * std::tgamma(0.25) / std::tgamma(0.75);
    CHECK(xi_integral_constant(0.75, 1) == Approx(want).epsilon(1e-15));
    CHECK(xi_integral_constant(0.75, 1) == Approx(oracle::xi_integral_numeric(0.75, 1, 1.0)).epsilon(1e-6));
    CHECK_THROWS_AS(xi_integral_constant(0.5, 1), DivergentXiIntegral);
    CHECK_THROWS_AS(xi_integral_constant(1.0, 2), DivergentXiIntegral);
}

TEST_CASE("xi integral against quadrature", "[criterion]") {
    for (int d : {1, 2})
        for (double p : {0.8, 1.0, 2.0, 3.0}) {
            if (!(p > 0.5 * d)) continue;
            CHECK(xi_integral_constant(p, d) == Approx(oracle::xi_integral_numeric(p, d, 1.0)).epsilon(1e-6));
        }
    CHECK(xi_integral_constant(1.5, 1) == Approx(xi_simpson_1d(1.5, 1.0)).epsilon(1e-8));
}

TEST_CASE("threshold instances", "[criterion]") {
    CHECK(schatten_threshold(sig({3.0}), 1) == Rational(5, 6));
    CHECK(schatten_threshold(sig({2.0, 2.0}), 2) == Rational(2));
    CHECK(schatten_threshold(sig({1.0, 2.0}), 2) == Rational(5, 2));
    GrowthSignature bad = sig({2.0});
    bad.valid = false;
    CHECK_THROWS_AS(schatten_threshold(bad, 1), SignatureInvalid);
}

TEST_CASE("probe brackets the threshold", "[criterion]") {
    const OperatorSpec quartic = make_oscillator_1d(0.0, 4.0);
    CHECK(schatten_integral_probe(quartic, 0.75 + 0.2).convergence == ConvergenceClass::convergent);
    CHECK(schatten_integral_probe(quartic, 0.75 - 0.2).convergence == ConvergenceClass::divergent);
    CHECK(schatten_integral_probe(quartic, 0.5).convergence == ConvergenceClass::divergent);
    const OperatorSpec dil = make_dilated_model(2, 1);
    CHECK(schatten_integral_probe(dil, 2.5 + 0.2).convergence == ConvergenceClass::convergent);
    CHECK(schatten_integral_probe(dil, 2.5 - 0.2).convergence == ConvergenceClass::divergent);
    CHECK(schatten_integral_probe(dil, 1.0).convergence == ConvergenceClass::divergent);
}

TEST_CASE("analytic sectors", "[criterion]") {
    const Sector d = analytic_sector(dilate(make_dilated_model(2, 1), optimal_alpha(2, 1)));
    CHECK(d.theta_min == Approx(0.0).margin(1e-15));
    CHECK(d.theta_max == Approx(3.0 * pi / 8.0).epsilon(1e-14));
    const Sector c = analytic_sector(make_oscillator_1d(pi / 2.0, 3.0, 1.0, true));
    CHECK(c.theta_min == Approx(-pi / 2.0));
    CHECK(c.theta_max == Approx(pi / 2.0));
    CHECK(c.opening() == Approx(pi));
    const Sector a = analytic_sector(make_airy_half_line(0.0));
    CHECK(a.opening() == 0.0);
    CHECK_THROWS_AS(analytic_sector(OperatorSpec{}), NoAnalyticSector);
}

TEST_CASE("sector openings never exceed pi", "[criterion]") {
    for (const auto& s : {make_oscillator_1d(0.5, 2.0), make_oscillator_1d(pi / 2.0, 3.0, 1.0, true),
                          make_airy_half_line(2.0), make_holomorphic_2d(1), make_dilated_model(4, 3),
                          make_half_plane_model(1.0)})
        CHECK(analytic_sector(s).opening() <= pi + 1e-15);
}

TEST_CASE("verdict boundaries", "[criterion]") {
    auto sector = [](double t) {
        Sector s;
        s.theta_max = t;
        return s;
    };
    CHECK(completeness_verdict(1.5, sector(2 * pi / 3 - 0.01), false).outcome == Outcome::complete_span);
    CHECK(completeness_verdict(1.5, sector(2 * pi / 3 + 0.01), false).outcome == Outcome::inconclusive);
    CHECK(completeness_verdict(3.0, sector(pi / 3 - 0.01), false).outcome == Outcome::complete_span);
    CHECK(completeness_verdict(3.0, sector(pi / 3 + 0.01), false).outcome == Outcome::inconclusive);
    Sector half;
    half.theta_min = -pi / 2;
    half.theta_max = pi / 2;
    CHECK(completeness_verdict(5.0 / 6.0, half, false).outcome == Outcome::complete_span);
    CHECK(completeness_verdict(1.0, half, false).outcome == Outcome::inconclusive);
    CHECK(completeness_verdict(2.5, sector(3 * pi / 8), true).outcome == Outcome::infinite_discrete_spectrum_via_dilation);
}

TEST_CASE("margin is antitone in opening and threshold", "[criterion]") {
    double prev = std::numeric_limits<double>::infinity();
    for (double t = 0.0; t < pi; t += 0.1) {
        Sector s;
        s.theta_max = t;
        const double m = completeness_verdict(2.0, s, false).margin;
        CHECK(m < prev);
        prev = m;
    }
    prev = std::numeric_limits<double>::infinity();
    for (double p = 0.6; p < 5.0; p += 0.2) {
        Sector s;
        s.theta_max = 0.5;
        const double m = completeness_verdict(p, s, false).margin;
        CHECK(m < prev);
        prev = m;
    }
}

TEST_CASE("oscillator thresholds", "[criterion]") {
    CHECK(oscillator_completeness_threshold(1.0, true) == Approx(2 * pi / 3));
    CHECK(oscillator_completeness_threshold(2.0, true) == Approx(pi));
    for (double a = 0.01; a < 1.0; a += 0.01) CHECK(pi * a / 2.0 < oscillator_completeness_threshold(a, true));
}

TEST_CASE("dilated-model inequality on the extended grid", "[criterion]") {
    const Eq49Result r = eq49_check(2, 1);
    CHECK(r.lhs == Rational(3, 8));
    CHECK(r.rhs == Rational(2, 5));
    CHECK(r.holds);
    const Eq49Result r3 = eq49_check(3, 1);
    CHECK(r3.lhs == Rational(1, 3));
    CHECK(r3.rhs == Rational(1, 2));
    for (int m = 2; m <= 10; ++m)
        for (int k = 1; k <= 10; ++k) {
            CHECK(eq49_check(m, k).holds);
            const Rational p((2 * k + 1) * m - 1, 2 * k * (m - 1));
            CHECK(Rational(1) / p > Rational(m + 1, 2 * m * (k + 1)));
        }
}

TEST_CASE("undilated completeness condition", "[criterion]") {
    for (int k = 1; k <= 8; ++k) CHECK_FALSE(no_dilation_condition(2, k));
    CHECK(no_dilation_condition(3, 2));
    CHECK(no_dilation_condition(4, 1));
    CHECK_FALSE(Rational(1, 2) < Rational(2, 5));
}

TEST_CASE("analyze reports", "[criterion]") {
    {
        const AnalysisReport r = analyze(make_airy_half_line(pi / 2.0));
        CHECK(*r.p_exact == Rational(3, 2));
        CHECK(r.report["sector"]["theta_max"].get<double>() == Approx(pi / 2));
        CHECK(r.report["verdict"] == "complete_span");
    }
    {
        const AnalysisReport r = analyze(make_dilated_model(2, 1));
        CHECK(*r.p_exact == Rational(5, 2));
        CHECK(r.report["sector"]["theta_max"].get<double>() == Approx(3 * pi / 8));
        CHECK(r.report["verdict"] == "infinite_discrete_spectrum_via_dilation");
        CHECK(r.report["dilation"]["used"] == true);
        CHECK(r.report["dilated_model"]["eq49"]["holds"] == true);
        CHECK(r.report["dilated_model"]["no_dilation_condition"] == false);
    }
    {
        const AnalysisReport r = analyze(make_half_plane_model(pi / 4.0));
        CHECK(*r.p_exact == Rational(3));
        CHECK(r.report["verdict"] == "complete_span");
    }
    {
        const AnalysisReport r = analyze(make_holomorphic_2d(2));
        CHECK(r.report.contains("metadata"));
    }
}
