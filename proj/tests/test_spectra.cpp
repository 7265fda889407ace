#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "sectoral/acceptance.hpp"
#include "sectoral/spectra.hpp"

using namespace sectoral;

namespace {

const complex_t I{0.0, 1.0};

Eigen::MatrixXcd diag(std::vector<complex_t> d) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) v(static_cast<Eigen::Index>(i)) = d[i];
    return v.asDiagonal();
}

Eigen::MatrixXcd random_matrix(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) M(i, j) = {g(rng), g(rng)};
    return M;
}

Eigen::MatrixXcd random_unitary(Eigen::Index n, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_matrix(n, rng));
    return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

bool inside_convex(const std::vector<complex_t>& poly, complex_t z, double tol) {
    complex_t c{};
    for (complex_t p : poly) c += p;
    c /= static_cast<double>(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const complex_t a = poly[i], b = poly[(i + 1) % poly.size()];
        const double side = std::imag(std::conj(b - a) * (z - a));
        const double ref = std::imag(std::conj(b - a) * (c - a));
        if (ref * side < -tol * std::abs(b - a)) return false;
    }
    return true;
}

} // namespace

TEST_CASE("resolvent singular values of a diagonal matrix", "[spectra]") {
    std::vector<complex_t> d;
    for (int k = 1; k <= 8; ++k) d.emplace_back(k, 0.0);
    const auto mu = resolvent_singular_values(diag(d), 0.0);
    for (int k = 1; k <= 8; ++k) CHECK(mu[static_cast<std::size_t>(k - 1)] == Approx(1.0 / k).epsilon(1e-14));
    CHECK_THROWS_AS(resolvent_singular_values(diag(d), 3.0), SingularShift);
}

TEST_CASE("largest resolvent singular value of a Hermitian matrix is the inverse distance", "[spectra]") {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXcd U = random_unitary(12, rng);
    std::vector<complex_t> d;
    for (int k = 0; k < 12; ++k) d.emplace_back(0.5 * k - 2.2, 0.0);
    const Eigen::MatrixXcd H = U * diag(d) * U.adjoint();
    const complex_t z{0.3, 0.4};
    double dist = 1e300;
    for (complex_t e : d) dist = std::min(dist, std::abs(e - z));
    CHECK(resolvent_singular_values(H, z)[0] == Approx(1.0 / dist).epsilon(1e-10));
}

TEST_CASE("operator singular values are reciprocal to resolvent ones", "[spectra]") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXcd M = random_matrix(20, rng);
    const complex_t z{0.1, -0.2};
    const auto mu = resolvent_singular_values(M, z);
    const Eigen::VectorXd s = linalg::singular_values(shifted(M, z));
    for (Eigen::Index k = 0; k < 20; ++k) CHECK(mu[static_cast<std::size_t>(k)] * s(19 - k) == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("decay fit of an exact power law", "[spectra]") {
    std::vector<double> v, w;
    for (int k = 1; k <= 400; ++k) v.push_back(std::pow(k, -2.0));
    for (int k = 1; k <= 800; ++k) w.push_back(std::pow(k, -2.0));
    const DecayFit f = decay_fit(v, &w);
    CHECK(f.slope == Approx(-2.0).epsilon(1e-12));
    CHECK(f.p_estimate == Approx(0.5).epsilon(1e-12));
    CHECK(f.window_lo == 10);
    CHECK(f.window_hi == 100);
    CHECK(f.grid_converged);
    CHECK(f.residual_rms < 1e-12);
    CHECK_THROWS_AS(decay_fit(std::vector<double>(50, 1.0)), ParameterError);
}

TEST_CASE("field of values of simple matrices", "[spectra]") {
    const FieldOfValues seg = field_of_values_boundary(diag({0.0, 1.0}), 128);
    for (complex_t z : seg.boundary_points) {
        CHECK(std::fabs(z.imag()) <= 1e-12);
        CHECK(z.real() >= -1e-12);
        CHECK(z.real() <= 1.0 + 1e-12);
    }
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(2, 2);
    J(0, 1) = 1.0;
    const FieldOfValues disk = field_of_values_boundary(J, 128);
    for (complex_t z : disk.boundary_points) CHECK(std::abs(z) == Approx(0.5).epsilon(1e-8));
    CHECK_THROWS_AS(field_of_values_boundary(J, 32), ParameterError);
}

TEST_CASE("field of values is convex and contains Rayleigh quotients", "[spectra]") {
    std::mt19937_64 rng(9);
    const Eigen::MatrixXcd M = random_matrix(10, rng);
    const FieldOfValues fov = field_of_values_boundary(M, 256);
    const double scale = M.norm();
    // boundary points turn consistently in one direction
    for (std::size_t i = 0; i < fov.boundary_points.size(); ++i) {
        const complex_t a = fov.boundary_points[i], b = fov.boundary_points[(i + 1) % fov.boundary_points.size()],
                        c = fov.boundary_points[(i + 2) % fov.boundary_points.size()];
        CHECK(std::imag(std::conj(b - a) * (c - b)) >= -1e-9 * scale * scale);
    }
    for (int t = 0; t < 200; ++t) {
        const Eigen::VectorXcd u = random_complex_vector(10, rng);
        const complex_t r = u.dot(M * u) / u.squaredNorm();
        // the polygon is inscribed, so allow the chord sagitta
        CHECK(inside_convex(fov.boundary_points, r, 1e-2 * scale));
    }
}

TEST_CASE("pseudospectrum values", "[spectra]") {
    std::mt19937_64 rng(13);
    const Eigen::MatrixXcd U = random_unitary(8, rng);
    std::vector<complex_t> d;
    for (int k = 0; k < 8; ++k) d.emplace_back(k - 3.5, 0.0);
    const Eigen::MatrixXcd H = U * diag(d) * U.adjoint();
    const PseudospectrumGrid ps = pseudospectrum(H, -4.0, 4.0, -1.0, 1.0, 9, 5);
    for (int iy = 0; iy < 5; ++iy)
        for (int ix = 0; ix < 9; ++ix) {
            const complex_t z = ps.node(ix, iy);
            double dist = 1e300;
            for (complex_t e : d) dist = std::min(dist, std::abs(e - z));
            CHECK(ps.sigma_min[static_cast<std::size_t>(iy * 9 + ix)] == Approx(dist).margin(1e-10));
        }
    const PseudospectrumGrid z0 = pseudospectrum(diag({I, -I}), 0.0, 0.0, 0.0, 0.0, 1, 1);
    CHECK(z0.sigma_min[0] == Approx(1.0).epsilon(1e-12));
    const SpectrumResult ev = eigenvalues(H, true);
    const PseudospectrumGrid at = pseudospectrum(H, ev.eigenvalues[0].real(), ev.eigenvalues[0].real(), 0.0, 0.0, 1, 1);
    CHECK(at.sigma_min[0] <= ev.backward_error_bound);
    CHECK_THROWS_AS(pseudospectrum(H, 0, 1, 0, 1, 201, 10), BudgetError);
}

TEST_CASE("spectral quantities are unitarily invariant", "[spectra]") {
    std::mt19937_64 rng(17);
    const Eigen::MatrixXcd M = random_matrix(16, rng);
    const Eigen::MatrixXcd U = random_unitary(16, rng);
    const Eigen::MatrixXcd W = U * M * U.adjoint();
    const auto a = eigenvalues(M).eigenvalues, b = eigenvalues(W).eigenvalues;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-8 * M.norm());
    const Eigen::VectorXd sm = linalg::singular_values(M), sw = linalg::singular_values(W),
                          sa = linalg::singular_values(M.adjoint());
    CHECK((sm - sw).norm() <= 1e-10 * M.norm());
    CHECK((sm - sa).norm() <= 1e-10 * M.norm());
}

TEST_CASE("eigenpairs have small residuals", "[spectra]") {
    std::mt19937_64 rng(19);
    const Eigen::MatrixXcd M = random_matrix(24, rng);
    const linalg::EigenPairs ep = linalg::eigenpairs(M);
    for (Eigen::Index k = 0; k < 24; ++k) {
        const Eigen::VectorXcd v = ep.vectors.col(k);
        CHECK((M * v - ep.values[static_cast<std::size_t>(k)] * v).norm() <= 1e-10 * M.norm() * v.norm());
    }
}

TEST_CASE("coercivity of the identity form", "[spectra]") {
    const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(6, 6);
    const CoercivityResult r = coercivity_check(Id, Eigen::VectorXd::Zero(6), Id, 200, 1, 0.0);
    CHECK(r.constant == Approx(1.0).epsilon(1e-6));
    CHECK(r.sampled_sup <= r.constant + 1e-9);
    CHECK_FALSE(r.counterexample);
    CHECK_THROWS_AS(coercivity_check(Id, Eigen::VectorXd::Zero(6), Id, 100), ParameterError);
}

TEST_CASE("coercivity certificate bounds the sampled ratio", "[spectra]") {
    const OperatorSpec s = make_oscillator_1d(std::numbers::pi / 2.0, 3.0, 1.0, true);
    const FormAssembly fa = assemble_form(s, make_grid(s, 6.0, 80), 1.0);
    const Eigen::MatrixXcd N = fa.gradient_gram + Eigen::MatrixXcd(fa.weight.cast<complex_t>().asDiagonal());
    const CoercivityResult r = coercivity_check(fa.form.matrix, fa.phi1.matrix.diagonal().real(), N, 200, 7, 1.0);
    CHECK(std::isfinite(r.constant));
    CHECK(r.sampled_sup <= r.constant * (1.0 + 1e-8));
    CHECK(r.dual_value * r.constant == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Lax-Milgram chain on small examples", "[spectra]") {
    const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(4, 4);
    const LaxMilgramResult id = laxmilgram_bound_check(Id, Eigen::MatrixXcd::Zero(4, 4));
    CHECK(id.holds);
    CHECK(id.sigma_min == Approx(1.0));
    CHECK(id.alpha_emp == Approx(1.0));

    const Eigen::MatrixXcd A = diag({I, -I}), Phi = diag({1.0, -1.0});
    const LaxMilgramResult r = laxmilgram_bound_check(A, Phi);
    CHECK(r.holds);
    // exhaustive mesh of the unit sphere of C^2 modulo phase
    double amin = 1e300;
    for (int a = 0; a <= 200; ++a)
        for (int b = 0; b < 200; ++b) {
            const double t = 0.5 * std::numbers::pi * a / 200.0, ph = 2.0 * std::numbers::pi * b / 200.0;
            Eigen::VectorXcd u(2);
            u << std::cos(t), std::polar(std::sin(t), ph);
            const Eigen::VectorXcd Au = A * u;
            amin = std::min(amin, std::abs(u.dot(Au)) + std::abs((Phi * u).dot(Au)));
        }
    CHECK(r.alpha_emp >= amin - 1e-12);
    CHECK(r.sigma_min >= amin / (1.0 + r.phi_norm) - 1e-12);
}

TEST_CASE("Lax-Milgram chain on the cubic form", "[spectra]") {
    const OperatorSpec s = make_oscillator_1d(std::numbers::pi / 2.0, 3.0, 1.0, true);
    const FormAssembly fa = assemble_form(s, make_grid(s, 6.0, 60), 1.0);
    CHECK(laxmilgram_bound_check(fa.form.matrix, fa.phi1.matrix).holds);
}

TEST_CASE("comparison of a self-adjoint operator with itself", "[spectra]") {
    const OperatorSpec s = make_oscillator_1d(0.0, 2.0);
    const Grid g = make_grid(s, 8.0, 200);
    const Eigen::MatrixXcd S = assemble_P(s, g).matrix;
    const ComparisonResult c = eigen_comparison(S, S, 0.0);
    for (std::size_t i = 0; i < c.ratio_nu_mu.size(); ++i) {
        CHECK(c.ratio_nu_mu[i] < 1.0);
        CHECK(c.ratio_nu_mu[i] > 0.9);
    }
    CHECK_THROWS_AS(eigen_comparison(S, S, 0.0, Window{10, 0.01}), WindowError);
}

TEST_CASE("Hermite-basis oracle for the cubic oscillator", "[oracle]") {
    const auto ev = oracle::cubic_hermite_spectrum(160, 2.0);
    CHECK(ev[0].real() == Approx(oracle::cubic_ground_state).epsilon(1e-9));
    CHECK(std::fabs(ev[0].imag()) <= 1e-8);
}

TEST_CASE("Airy zeros from Newton iteration", "[oracle]") {
    for (int j = 1; j <= 3; ++j)
        CHECK(oracle::airy_zero(j) == Approx(oracle::airy_zeros_frozen[static_cast<std::size_t>(j - 1)]).epsilon(1e-12));
    CHECK(oracle::airy_ai(0.0).first == Approx(0.355028053887817239260).epsilon(1e-15));
}
