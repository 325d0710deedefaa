#ifndef SPPCA_TYPES_HPP
#define SPPCA_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sppca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Malformed or inconsistent input data (bad CSV, shape mismatch, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure during fitting (singular M-step, failed factorization).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// N x D matrix of observations; rows are samples, columns are features.
struct DataMatrix {
    Matrix values;                          // N x D
    std::vector<std::string> column_names;  // empty when the source had no header

    DataMatrix() = default;
    explicit DataMatrix(Matrix v) : values(std::move(v)) { validate(); }

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    void validate() const {
        if (values.rows() < 1 || values.cols() < 1)
            throw DataError("DataMatrix: need at least one row and one column");
        if (!values.allFinite())
            throw DataError("DataMatrix: non-finite entry");
    }
};

/// PPCA parameter triple {mu, W, sigma^2} with latent dimension M.
struct ModelParams {
    Vector mu;       // D
    Matrix w;        // D x M
    double sigma2 = 1.0;
    Eigen::Index latent_dim = 0;

    Eigen::Index data_dim() const { return mu.size(); }

    void validate() const {
        if (latent_dim < 1)
            throw DataError("ModelParams: latent_dim must be >= 1");
        if (w.rows() != mu.size() || w.cols() != latent_dim)
            throw DataError("ModelParams: w must be D x latent_dim");
        if (!(sigma2 > 0.0))
            throw DataError("ModelParams: sigma2 must be positive");
        if (!w.allFinite() || !mu.allFinite() || !std::isfinite(sigma2))
            throw DataError("ModelParams: non-finite parameter");
    }
};

/// Per-sample posterior moments E[z_n] and E[z_n z_n^T].
struct LatentStats {
    Matrix ez;                  // N x M, row n is E[z_n]
    std::vector<Matrix> ezz;    // N matrices of shape M x M
};

/// Inlier selection: binary flags v, threshold beta, per-sample losses l_n.
struct SelectionState {
    Vector v;       // entries in {0,1}
    double beta = 0.0;
    Vector losses;  // l_n = -ln p(x_n | mu, W, sigma2)
};

enum class LoopMode { nested, outer_only };

struct FitConfig {
    Eigen::Index latent_dim = 1;
    double eta = 1.1;                    // beta growth factor, > 1
    int inner_max_iters = 50;
    int outer_max_iters = 100;
    int em_iters_per_v_update = 1;
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;
    LoopMode loop_mode = LoopMode::nested;
    double sigma2_floor = 1e-9;
    // When finite, overrides the median-of-losses beta initialization.
    // +infinity disables filtering entirely (every sample stays selected).
    double beta_init = std::numeric_limits<double>::quiet_NaN();

    void validate() const {
        if (latent_dim < 1) throw DataError("FitConfig: latent_dim must be >= 1");
        if (!(eta > 1.0)) throw DataError("FitConfig: eta must be > 1");
        if (!(rel_tol > 0.0)) throw DataError("FitConfig: rel_tol must be > 0");
        if (inner_max_iters < 1 || outer_max_iters < 1 || em_iters_per_v_update < 1)
            throw DataError("FitConfig: iteration counts must be >= 1");
        if (!(sigma2_floor > 0.0)) throw DataError("FitConfig: sigma2_floor must be > 0");
    }
};

/// Iteration trace of a fit.
struct FitReport {
    std::vector<double> objective_trace;     // objective after each inner step
    std::vector<double> beta_trace;          // beta per outer iteration
    std::vector<Eigen::Index> inlier_count_trace;  // sum(v) per v-update
    bool converged = false;
    int outer_iterations = 0;
    int inner_iterations_total = 0;          // EM pairs for plain PPCA fits
    std::vector<int> inner_iters_per_outer;  // segments objective_trace by beta
    bool hit_inner_cap = false;
    bool hit_outer_cap = false;
};

}  // namespace sppca

#endif
