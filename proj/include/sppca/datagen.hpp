#ifndef SPPCA_DATAGEN_HPP
#define SPPCA_DATAGEN_HPP

#include "sppca/rng.hpp"
#include "sppca/types.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace sppca {

/// Ground-truth record of which emitted rows are injected outliers.
struct ContaminationLabel {
    std::vector<bool> is_outlier;

    Eigen::Index true_count() const {
        return static_cast<Eigen::Index>(std::count(is_outlier.begin(), is_outlier.end(), true));
    }
};

struct Line2dParams {
    double slope = 0.8;
    double intercept = 5.0;
    double x_min = 0.0;
    double x_max = 150.0;
    double noise_std = 3.0;
    double outlier_min_distance = 30.0;  // vertical distance to the line
    double box_y_min = -40.0;
    double box_y_max = 160.0;
};

namespace detail {

/// One gross outlier for the 2-D line setup: uniform in the bounding box,
/// rejected until its vertical distance to the line exceeds the minimum.
inline Eigen::RowVector2d line2d_outlier(const Line2dParams& p, Rng& rng) {
    for (;;) {
        const double x = rng.uniform(p.x_min, p.x_max);
        const double y = rng.uniform(p.box_y_min, p.box_y_max);
        if (std::abs(y - (p.slope * x + p.intercept)) > p.outlier_min_distance)
            return {x, y};
    }
}

/// k distinct indices out of n, uniform without replacement, ascending.
inline std::vector<Eigen::Index> sample_indices(Eigen::Index n, Eigen::Index k, Rng& rng) {
    std::vector<Eigen::Index> pool(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
    // partial Fisher-Yates
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
    }
    pool.resize(static_cast<size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace detail

/// 2-D line data: x ~ U(x_min, x_max), y = slope*x + intercept + N(0, noise_std^2),
/// plus `outlier_count` gross outliers appended after the clean rows.
inline std::pair<DataMatrix, ContaminationLabel> gen_line2d(Eigen::Index n, Eigen::Index outlier_count,
                                                            Rng& rng, const Line2dParams& p = {}) {
    if (n < 2) throw DataError("gen_line2d: need n >= 2");
    if (outlier_count < 0) throw DataError("gen_line2d: outlier_count must be >= 0");
    Matrix m(n + outlier_count, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = rng.uniform(p.x_min, p.x_max);
        m(i, 0) = x;
        m(i, 1) = p.slope * x + p.intercept + rng.normal(0.0, p.noise_std);
    }
    for (Eigen::Index i = 0; i < outlier_count; ++i) m.row(n + i) = detail::line2d_outlier(p, rng);

    ContaminationLabel labels;
    labels.is_outlier.assign(static_cast<size_t>(n + outlier_count), false);
    for (Eigen::Index i = 0; i < outlier_count; ++i) labels.is_outlier[static_cast<size_t>(n + i)] = true;
    return {DataMatrix(std::move(m)), std::move(labels)};
}

/// Low-rank matrix U V^T + 0.01 * E with standard-normal U, V, E.
inline DataMatrix gen_lowrank(Eigen::Index n, Eigen::Index d, Eigen::Index rank, Rng& rng,
                              double noise_scale = 0.01) {
    if (rank < 1 || rank > std::min(n, d)) throw DataError("gen_lowrank: need 1 <= rank <= min(n, d)");
    Matrix u(n, rank), v(d, rank);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < rank; ++k) u(i, k) = rng.normal();
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < rank; ++k) v(j, k) = rng.normal();
    Matrix x = u * v.transpose();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) += noise_scale * rng.normal();
    return DataMatrix(std::move(x));
}

/// Replaces floor(fraction*N) distinct rows with draws from
/// N(1_D, cov_scale * I_D).
inline std::pair<DataMatrix, ContaminationLabel> inject_gaussian_outliers(const DataMatrix& data,
                                                                          double fraction, Rng& rng,
                                                                          double cov_scale = 5.0) {
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw DataError("inject_gaussian_outliers: fraction must be in [0, 1)");
    const Eigen::Index n = data.rows();
    const auto count = static_cast<Eigen::Index>(fraction * static_cast<double>(n));
    const double std_dev = std::sqrt(cov_scale);

    DataMatrix out = data;
    ContaminationLabel labels;
    labels.is_outlier.assign(static_cast<size_t>(n), false);
    for (Eigen::Index idx : detail::sample_indices(n, count, rng)) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) out.values(idx, j) = rng.normal(1.0, std_dev);
        labels.is_outlier[static_cast<size_t>(idx)] = true;
    }
    return {std::move(out), std::move(labels)};
}

/// Appends `count` rows whose feature j is uniform over the per-column
/// [min, max] range of the input.
inline std::pair<DataMatrix, ContaminationLabel> inject_uniform_outliers(const DataMatrix& data,
                                                                         Eigen::Index count, Rng& rng) {
    if (count < 0) throw DataError("inject_uniform_outliers: count must be >= 0");
    const Vector lo = data.values.colwise().minCoeff();
    const Vector hi = data.values.colwise().maxCoeff();

    Matrix m(data.rows() + count, data.cols());
    m.topRows(data.rows()) = data.values;
    for (Eigen::Index i = 0; i < count; ++i)
        for (Eigen::Index j = 0; j < data.cols(); ++j)
            m(data.rows() + i, j) = rng.uniform(lo(j), hi(j));

    ContaminationLabel labels;
    labels.is_outlier.assign(static_cast<size_t>(m.rows()), false);
    for (Eigen::Index i = 0; i < count; ++i)
        labels.is_outlier[static_cast<size_t>(data.rows() + i)] = true;
    DataMatrix out(std::move(m));
    out.column_names = data.column_names;
    return {std::move(out), std::move(labels)};
}

/// Occludes `count` distinct rows (square images of side `image_side`)
/// with a block of i.i.d. fair-coin {0, 255} pixels at a uniform position.
inline std::pair<DataMatrix, ContaminationLabel> occlude_blocks(const DataMatrix& data,
                                                                Eigen::Index image_side,
                                                                Eigen::Index block_side,
                                                                Eigen::Index count, Rng& rng) {
    if (image_side < 1 || data.cols() != image_side * image_side)
        throw DataError("occlude_blocks: feature count must equal image_side^2");
    if (block_side < 0 || block_side > image_side)
        throw DataError("occlude_blocks: need 0 <= block_side <= image_side");
    if (count < 0 || count > data.rows())
        throw DataError("occlude_blocks: need 0 <= count <= row count");

    DataMatrix out = data;
    ContaminationLabel labels;
    labels.is_outlier.assign(static_cast<size_t>(data.rows()), false);
    if (block_side == 0) return {std::move(out), std::move(labels)};

    for (Eigen::Index idx : detail::sample_indices(data.rows(), count, rng)) {
        const auto top = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(image_side - block_side + 1)));
        const auto left = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(image_side - block_side + 1)));
        for (Eigen::Index r = 0; r < block_side; ++r)
            for (Eigen::Index c = 0; c < block_side; ++c)
                out.values(idx, (top + r) * image_side + (left + c)) =
                    rng.next_u64() & 1 ? 255.0 : 0.0;
        labels.is_outlier[static_cast<size_t>(idx)] = true;
    }
    return {std::move(out), std::move(labels)};
}

/// Uniform permutation, first floor(train_fraction*N) rows to train.
inline std::pair<DataMatrix, DataMatrix> train_test_split(const DataMatrix& data,
                                                          double train_fraction, Rng& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DataError("train_test_split: fraction must be in (0, 1)");
    const Eigen::Index n = data.rows();
    if (n < 2) throw DataError("train_test_split: need at least 2 rows");
    const auto n_train = static_cast<Eigen::Index>(train_fraction * static_cast<double>(n));
    if (n_train < 1 || n_train >= n)
        throw DataError("train_test_split: split would leave one side empty");

    std::vector<Eigen::Index> perm(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    }

    Matrix train(n_train, data.cols()), test(n - n_train, data.cols());
    for (Eigen::Index i = 0; i < n_train; ++i) train.row(i) = data.values.row(perm[static_cast<size_t>(i)]);
    for (Eigen::Index i = n_train; i < n; ++i) test.row(i - n_train) = data.values.row(perm[static_cast<size_t>(i)]);
    DataMatrix train_out(std::move(train)), test_out(std::move(test));
    train_out.column_names = data.column_names;
    test_out.column_names = data.column_names;
    return {std::move(train_out), std::move(test_out)};
}

}  // namespace sppca

#endif
