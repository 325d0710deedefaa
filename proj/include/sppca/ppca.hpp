#ifndef SPPCA_PPCA_HPP
#define SPPCA_PPCA_HPP

#include "sppca/numerics.hpp"
#include "sppca/rng.hpp"
#include "sppca/types.hpp"

#include <cmath>
#include <utility>

namespace sppca {

/// Per-sample weights entering the weighted EM updates. Binary {0,1} for
/// the self-paced loop; the all-ones vector recovers plain PPCA.
struct WeightVector {
    Vector w;

    static WeightVector ones(Eigen::Index n) { return WeightVector{Vector::Ones(n)}; }

    double sum() const { return w.sum(); }

    void validate(Eigen::Index n) const {
        if (w.size() != n) throw DataError("WeightVector: length does not match sample count");
        if (!w.allFinite() || (w.array() < 0.0).any())
            throw DataError("WeightVector: weights must be finite and >= 0");
        if (!(sum() >= 1.0)) throw DataError("WeightVector: weights must sum to >= 1");
    }
};

inline Vector weighted_mean(const DataMatrix& data, const WeightVector& weights) {
    weights.validate(data.rows());
    const double total = weights.sum();
    if (!(total > 0.0)) throw DataError("weighted_mean: all weights are zero");
    Vector acc = Vector::Zero(data.cols());
    for (Eigen::Index n = 0; n < data.rows(); ++n) {
        const double wn = weights.w(n);
        if (wn == 0.0) continue;
        acc += wn * data.values.row(n).transpose();
    }
    return acc / total;
}

/// mu = column mean, W ~ N(0, 1/M) entrywise (row-major draw order),
/// sigma2 = 1.
inline ModelParams init_params(const DataMatrix& data, Eigen::Index latent_dim, Rng& rng) {
    const Eigen::Index d = data.cols();
    if (latent_dim < 1 || latent_dim >= d)
        throw DataError("init_params: need 1 <= latent_dim < feature count");
    if (data.rows() < 2) throw DataError("init_params: need at least 2 samples");

    ModelParams p;
    p.latent_dim = latent_dim;
    p.mu = weighted_mean(data, WeightVector::ones(data.rows()));
    p.w.resize(d, latent_dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < latent_dim; ++k) p.w(i, k) = scale * rng.normal();
    p.sigma2 = 1.0;
    return p;
}

/// Posterior moments E[z_n] = M^{-1} W^T (x_n - mu) and
/// E[z_n z_n^T] = sigma2 M^{-1} + E[z_n] E[z_n]^T, for every row
/// (excluded samples included, so their losses stay inspectable).
inline LatentStats e_step(const DataMatrix& data, const ModelParams& params,
                          const LatentGram& gram) {
    const Eigen::Index n = data.rows();
    const Eigen::Index m = params.latent_dim;
    if (data.cols() != params.mu.size())
        throw DataError("e_step: data dimension does not match model");

    const Matrix sigma2_minv = params.sigma2 * gram.solve(Matrix::Identity(m, m));
    LatentStats stats;
    stats.ez.resize(n, m);
    stats.ezz.resize(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector centered = data.values.row(i).transpose() - params.mu;
        const Vector ez = gram.solve(params.w.transpose() * centered);
        stats.ez.row(i) = ez.transpose();
        stats.ezz[static_cast<size_t>(i)] = sigma2_minv + ez * ez.transpose();
    }
    return stats;
}

/// Weighted M-step re-estimation of W and sigma2; rows with weight zero
/// contribute nothing. sigma2 is clamped to sigma2_floor.
inline std::pair<Matrix, double> m_step(const DataMatrix& data, const LatentStats& stats,
                                        const WeightVector& weights, const Vector& mu,
                                        double sigma2_floor) {
    weights.validate(data.rows());
    const Eigen::Index d = data.cols();
    const Eigen::Index m = stats.ez.cols();

    Matrix cross = Matrix::Zero(d, m);   // sum w_n (x_n - mu) E[z_n]^T
    Matrix gram = Matrix::Zero(m, m);    // sum w_n E[z_n z_n^T]
    for (Eigen::Index n = 0; n < data.rows(); ++n) {
        const double wn = weights.w(n);
        if (wn == 0.0) continue;
        const Vector centered = data.values.row(n).transpose() - mu;
        cross += wn * centered * stats.ez.row(n);
        gram += wn * stats.ezz[static_cast<size_t>(n)];
    }

    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw NumericalError("m_step: singular weighted E[zz^T] sum (degenerate selection)");
    const Matrix w_new = llt.solve(cross.transpose()).transpose();

    const Matrix wtw = w_new.transpose() * w_new;
    double acc = 0.0;
    for (Eigen::Index n = 0; n < data.rows(); ++n) {
        const double wn = weights.w(n);
        if (wn == 0.0) continue;
        const Vector centered = data.values.row(n).transpose() - mu;
        const Vector ez = stats.ez.row(n).transpose();
        acc += wn * (centered.squaredNorm() +
                     (stats.ezz[static_cast<size_t>(n)] * wtw).trace() -
                     2.0 * ez.dot(w_new.transpose() * centered));
    }
    const double sigma2_new =
        std::max(acc / (static_cast<double>(d) * weights.sum()), sigma2_floor);
    return {w_new, sigma2_new};
}

/// l_n = -ln p(x_n | mu, W, sigma2) for every sample.
inline Vector per_sample_losses(const DataMatrix& data, const ModelParams& params) {
    const LatentGram gram = compute_latent_gram(params);
    Vector losses(data.rows());
    for (Eigen::Index n = 0; n < data.rows(); ++n)
        losses(n) = -gaussian_log_density(params, gram, data.values.row(n).transpose());
    return losses;
}

inline double weighted_log_likelihood(const DataMatrix& data, const ModelParams& params,
                                      const WeightVector& weights) {
    const LatentGram gram = compute_latent_gram(params);
    double acc = 0.0;
    for (Eigen::Index n = 0; n < data.rows(); ++n) {
        const double wn = weights.w(n);
        if (wn == 0.0) continue;
        acc += wn * gaussian_log_density(params, gram, data.values.row(n).transpose());
    }
    return acc;
}

namespace detail {

/// One (E-step, M-step) pair with mu held fixed.
inline void em_pair(const DataMatrix& data, ModelParams& params, const WeightVector& weights,
                    double sigma2_floor) {
    const LatentGram gram = compute_latent_gram(params);
    const LatentStats stats = e_step(data, params, gram);
    auto [w_new, sigma2_new] = m_step(data, stats, weights, params.mu, sigma2_floor);
    params.w = std::move(w_new);
    params.sigma2 = sigma2_new;
}

inline bool rel_change_below(double current, double previous, double tol) {
    return std::abs(current - previous) / (std::abs(current) + 1e-12) < tol;
}

}  // namespace detail

/// Plain PPCA via EM with all-ones weights.
inline std::pair<ModelParams, FitReport> fit_ppca(const DataMatrix& data, const FitConfig& config,
                                                  Rng& rng) {
    config.validate();
    ModelParams params = init_params(data, config.latent_dim, rng);
    const WeightVector weights = WeightVector::ones(data.rows());
    const int max_iters = config.em_iters_per_v_update * config.inner_max_iters;

    FitReport report;
    double prev_ll = std::numeric_limits<double>::quiet_NaN();
    for (int iter = 0; iter < max_iters; ++iter) {
        detail::em_pair(data, params, weights, config.sigma2_floor);
        const double ll = weighted_log_likelihood(data, params, weights);
        report.objective_trace.push_back(ll);
        ++report.inner_iterations_total;
        if (iter > 0 && detail::rel_change_below(ll, prev_ll, config.rel_tol)) {
            report.converged = true;
            break;
        }
        prev_ll = ll;
    }
    report.hit_inner_cap = !report.converged;
    return {std::move(params), std::move(report)};
}

/// Latent representation: row n is the posterior mean E[z | x_n].
inline Matrix transform(const DataMatrix& data, const ModelParams& params) {
    params.validate();
    if (data.cols() != params.mu.size())
        throw DataError("transform: data dimension does not match model");
    const LatentGram gram = compute_latent_gram(params);
    Matrix z(data.rows(), params.latent_dim);
    for (Eigen::Index n = 0; n < data.rows(); ++n) {
        const Vector centered = data.values.row(n).transpose() - params.mu;
        z.row(n) = gram.solve(params.w.transpose() * centered).transpose();
    }
    return z;
}

/// x_hat_n = W E[z | x_n] + mu.
inline DataMatrix reconstruct(const DataMatrix& data, const ModelParams& params) {
    const Matrix z = transform(data, params);
    Matrix x_hat = z * params.w.transpose();
    x_hat.rowwise() += params.mu.transpose();
    return DataMatrix(std::move(x_hat));
}

}  // namespace sppca

#endif
