#ifndef SPPCA_BASELINE_PCA_HPP
#define SPPCA_BASELINE_PCA_HPP

#include "sppca/numerics.hpp"
#include "sppca/ppca.hpp"

namespace sppca {

/// Classical PCA model: mean, top-M eigenvectors of the sample covariance
/// (divisor N), eigenvalues descending.
struct PcaModel {
    Vector mean;
    Matrix components;   // D x M, orthonormal columns
    Vector eigenvalues;  // M, descending
};

inline PcaModel fit_pca(const DataMatrix& data, Eigen::Index latent_dim) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (n < 2) throw DataError("fit_pca: need at least 2 samples");
    if (latent_dim < 1 || latent_dim > d)
        throw DataError("fit_pca: need 1 <= latent_dim <= feature count");

    PcaModel model;
    model.mean = weighted_mean(data, WeightVector::ones(n));
    const Matrix centered = data.values.rowwise() - model.mean.transpose();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(n);
    auto [vals, vecs] = symmetric_eigh(cov);
    model.eigenvalues = vals.head(latent_dim);
    model.components = vecs.leftCols(latent_dim);
    return model;
}

inline Matrix pca_transform(const DataMatrix& data, const PcaModel& model) {
    if (data.cols() != model.mean.size())
        throw DataError("pca_transform: data dimension does not match model");
    return (data.values.rowwise() - model.mean.transpose()) * model.components;
}

inline DataMatrix pca_reconstruct(const DataMatrix& data, const PcaModel& model) {
    Matrix x_hat = pca_transform(data, model) * model.components.transpose();
    x_hat.rowwise() += model.mean.transpose();
    return DataMatrix(std::move(x_hat));
}

}  // namespace sppca

#endif
