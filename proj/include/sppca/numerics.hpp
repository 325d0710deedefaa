#ifndef SPPCA_NUMERICS_HPP
#define SPPCA_NUMERICS_HPP

#include "sppca/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <utility>

namespace sppca {

/// The M x M Gram matrix W^T W + sigma^2 I and its Cholesky factorization.
/// All covariance work routes through this so no D x D matrix is ever formed.
struct LatentGram {
    Matrix m_matrix;              // M x M
    Eigen::LLT<Matrix> chol;      // lower-triangular factor of m_matrix

    template <typename Rhs>
    typename Rhs::PlainObject solve(const Eigen::MatrixBase<Rhs>& rhs) const {
        return chol.solve(rhs);
    }

    double log_det() const {
        // |M| = prod(diag(L))^2
        return 2.0 * chol.matrixLLT().diagonal().array().log().sum();
    }
};

inline LatentGram compute_latent_gram(const ModelParams& params) {
    params.validate();
    const Eigen::Index m = params.latent_dim;
    LatentGram gram;
    gram.m_matrix = params.w.transpose() * params.w +
                    params.sigma2 * Matrix::Identity(m, m);
    gram.chol.compute(gram.m_matrix);
    if (gram.chol.info() != Eigen::Success)
        throw NumericalError("latent Gram matrix factorization failed (sigma2 too small or W not finite)");
    return gram;
}

/// C^{-1} y = sigma^{-2} (y - W M^{-1} W^T y), cost O(DM + M^3).
inline Vector c_inverse_apply(const ModelParams& params, const LatentGram& gram, const Vector& y) {
    if (y.size() != params.mu.size())
        throw DataError("c_inverse_apply: vector length does not match data dimension");
    const Vector wty = params.w.transpose() * y;
    return (y - params.w * gram.solve(wty)) / params.sigma2;
}

/// ln|C| via |C| = (sigma^2)^(D-M) |W^T W + sigma^2 I|.
inline double log_det_c(const ModelParams& params, const LatentGram& gram) {
    const auto d = static_cast<double>(params.mu.size());
    const auto m = static_cast<double>(params.latent_dim);
    return (d - m) * std::log(params.sigma2) + gram.log_det();
}

/// ln N(x | mu, W W^T + sigma^2 I).
inline double gaussian_log_density(const ModelParams& params, const LatentGram& gram, const Vector& x) {
    const auto d = static_cast<double>(params.mu.size());
    const Vector centered = x - params.mu;
    const double quad = centered.dot(c_inverse_apply(params, gram, centered));
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det_c(params, gram) + quad);
}

/// Eigendecomposition of a symmetric matrix: eigenvalues descending,
/// orthonormal column eigenvectors, first nonzero component of each
/// eigenvector made positive so outputs are deterministic.
inline std::pair<Vector, Matrix> symmetric_eigh(const Matrix& a) {
    if (a.rows() != a.cols()) throw DataError("symmetric_eigh: matrix must be square");
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw DataError("symmetric_eigh: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success)
        throw NumericalError("symmetric_eigh: eigendecomposition failed");

    const Eigen::Index n = a.rows();
    Vector vals(n);
    Matrix vecs(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // Eigen sorts ascending; reverse to descending.
        vals(i) = solver.eigenvalues()(n - 1 - i);
        vecs.col(i) = solver.eigenvectors().col(n - 1 - i);
        for (Eigen::Index r = 0; r < n; ++r) {
            if (vecs(r, i) != 0.0) {
                if (vecs(r, i) < 0.0) vecs.col(i) = -vecs.col(i);
                break;
            }
        }
    }
    return {std::move(vals), std::move(vecs)};
}

}  // namespace sppca

#endif
