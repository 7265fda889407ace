#pragma once

#include <algorithm>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "sectoral/errors.hpp"

extern "C" void openblas_set_num_threads(int);

namespace sectoral::linalg {

using cplx = std::complex<double>;

/// Keeps each dense kernel on one thread so results do not depend on the BLAS pool.
inline void single_threaded_blas() {
    static const bool once = [] {
        openblas_set_num_threads(1);
        return true;
    }();
    (void)once;
}

inline bool is_upper_hessenberg(const Eigen::MatrixXcd& M) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = j + 2; i < M.rows(); ++i)
            if (M(i, j) != cplx{}) return false;
    return true;
}

/// All eigenvalues of a general complex matrix. Hessenberg input skips the
/// reduction and goes straight to the shifted QR iteration.
inline std::vector<cplx> eigenvalues(Eigen::MatrixXcd M) {
    single_threaded_blas();
    const auto n = static_cast<lapack_int>(M.rows());
    std::vector<cplx> w(static_cast<std::size_t>(n));
    if (n == 0) return w;
    lapack_int info;
    if (is_upper_hessenberg(M)) {
        info = LAPACKE_zhseqr(LAPACK_COL_MAJOR, 'E', 'N', n, 1, n, M.data(), n, w.data(), nullptr, 1);
    } else {
        info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, M.data(), n, w.data(), nullptr, 1, nullptr, 1);
    }
    if (info < 0) throw NumericError("eigenvalue driver rejected argument " + std::to_string(-info));
    if (info > 0) {
        std::vector<cplx> partial(w.begin() + info, w.end());
        throw EigNoConverge("QR iteration failed to converge for " + std::to_string(info) + " eigenvalues", partial);
    }
    return w;
}

struct EigenPairs {
    std::vector<cplx> values;
    Eigen::MatrixXcd vectors; // right eigenvectors, unit 2-norm columns
};

inline EigenPairs eigenpairs(Eigen::MatrixXcd M) {
    single_threaded_blas();
    const auto n = static_cast<lapack_int>(M.rows());
    EigenPairs out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors.resize(n, n);
    const lapack_int info =
        LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, M.data(), n, out.values.data(), nullptr, 1, out.vectors.data(), n);
    if (info < 0) throw NumericError("zgeev rejected argument " + std::to_string(-info));
    if (info > 0)
        throw EigNoConverge("QR iteration failed to converge",
                            std::vector<cplx>(out.values.begin() + info, out.values.end()));
    return out;
}

/// Ascending eigenvalues of a Hermitian matrix (lower triangle referenced).
inline Eigen::VectorXd eigenvalues_hermitian(Eigen::MatrixXcd M) {
    single_threaded_blas();
    const auto n = static_cast<lapack_int>(M.rows());
    Eigen::VectorXd w(n);
    if (n == 0) return w;
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, M.data(), n, w.data());
    if (info < 0) throw NumericError("zheevd rejected argument " + std::to_string(-info));
    if (info > 0) throw EigNoConverge("Hermitian eigensolver failed to converge", {});
    return w;
}

struct HermitianPair {
    double value = 0.0;
    Eigen::VectorXcd vector;
};

/// Smallest (largest = false) or largest eigenpair of a Hermitian matrix.
inline HermitianPair extreme_eigenpair(Eigen::MatrixXcd M, bool largest) {
    single_threaded_blas();
    const auto n = static_cast<lapack_int>(M.rows());
    const lapack_int idx = largest ? n : 1;
    lapack_int found = 0;
    double w[1];
    HermitianPair out;
    out.vector.resize(n);
    std::vector<lapack_int> isuppz(2);
    const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, M.data(), n, 0.0, 0.0, idx, idx, 0.0,
                                           &found, w, out.vector.data(), n, isuppz.data());
    if (info != 0 || found != 1) throw EigNoConverge("zheevr failed", {});
    out.value = w[0];
    return out;
}

/// Singular values, descending.
inline Eigen::VectorXd singular_values(Eigen::MatrixXcd M) {
    single_threaded_blas();
    const auto m = static_cast<lapack_int>(M.rows()), n = static_cast<lapack_int>(M.cols());
    Eigen::VectorXd s(std::min(m, n));
    const lapack_int info =
        LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, M.data(), m, s.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw NumericError("zgesdd failed with info " + std::to_string(info));
    return s;
}

struct SVD {
    Eigen::VectorXd s; // descending
    Eigen::MatrixXcd U, V;
};

inline SVD svd(Eigen::MatrixXcd M) {
    single_threaded_blas();
    const auto m = static_cast<lapack_int>(M.rows()), n = static_cast<lapack_int>(M.cols());
    const lapack_int k = std::min(m, n);
    SVD out;
    out.s.resize(k);
    out.U.resize(m, k);
    Eigen::MatrixXcd VT(k, n);
    const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, M.data(), m, out.s.data(), out.U.data(), m,
                                           VT.data(), k);
    if (info != 0) throw NumericError("zgesdd failed with info " + std::to_string(info));
    out.V = VT.adjoint();
    return out;
}

/// Upper triangular Schur factor T with M = Z T Z^*.
inline Eigen::MatrixXcd schur_triangular(Eigen::MatrixXcd M) {
    single_threaded_blas();
    const auto n = static_cast<lapack_int>(M.rows());
    std::vector<cplx> w(static_cast<std::size_t>(n));
    lapack_int sdim = 0;
    const lapack_int info =
        LAPACKE_zgees(LAPACK_COL_MAJOR, 'N', 'N', nullptr, n, M.data(), n, &sdim, w.data(), nullptr, 1);
    if (info != 0) throw EigNoConverge("Schur factorization failed", {});
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) M(i, j) = cplx{};
    return M;
}

} // namespace sectoral::linalg
