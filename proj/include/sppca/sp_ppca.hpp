#ifndef SPPCA_SP_PPCA_HPP
#define SPPCA_SP_PPCA_HPP

#include "sppca/ppca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace sppca {

struct SpFitResult {
    ModelParams params;
    SelectionState selection;
    FitReport report;
};

/// Self-paced objective: sum_n v_n l_n - beta * sum_n v_n.
inline double objective(const Vector& losses, const Vector& v, double beta) {
    if (losses.size() != v.size()) throw DataError("objective: length mismatch");
    double data_term = 0.0;
    double count = 0.0;
    for (Eigen::Index n = 0; n < v.size(); ++n) {
        if (v(n) == 0.0) continue;
        data_term += losses(n);
        count += 1.0;
    }
    return data_term - beta * count;
}

/// v_n = 1 iff l_n <= beta; if that excludes everything, the minimum-loss
/// sample is kept so the weighted mean stays defined.
inline Vector select_inliers(const Vector& losses, double beta) {
    Vector v(losses.size());
    bool any = false;
    for (Eigen::Index n = 0; n < losses.size(); ++n) {
        v(n) = losses(n) <= beta ? 1.0 : 0.0;
        any = any || v(n) == 1.0;
    }
    if (!any && losses.size() > 0) {
        Eigen::Index argmin = 0;
        losses.minCoeff(&argmin);
        v(argmin) = 1.0;
    }
    return v;
}

namespace detail {

inline double median(std::vector<double> values) {
    if (values.empty()) throw DataError("median: empty input");
    const size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    if (values.size() % 2 == 1) return values[mid];
    const double upper = values[mid];
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

// Objective for convergence checks. With beta = +inf the full objective
// is -inf for any nonempty selection, so the data term alone drives the
// stop decision (which then coincides with the PPCA log-likelihood check).
inline double convergence_objective(const Vector& losses, const Vector& v, double beta) {
    return std::isfinite(beta) ? objective(losses, v, beta) : objective(losses, v, 0.0);
}

}  // namespace detail

/// Warm start: one unweighted EM pair from a fresh initialization, then
/// beta0 = median of the resulting per-sample losses.
inline std::pair<double, ModelParams> init_beta(const DataMatrix& data, Eigen::Index latent_dim,
                                                Rng& rng, double sigma2_floor = 1e-9) {
    ModelParams params = init_params(data, latent_dim, rng);
    detail::em_pair(data, params, WeightVector::ones(data.rows()), sigma2_floor);
    const Vector losses = per_sample_losses(data, params);
    std::vector<double> values(losses.data(), losses.data() + losses.size());
    return {detail::median(std::move(values)), std::move(params)};
}

/// The alternating loop from a given warm start: v-update, weighted mean,
/// weighted EM at fixed beta, then beta grown by eta until the objective
/// settles. Samples excluded at every v-update never touch the parameters.
inline SpFitResult continue_sp_ppca(const DataMatrix& data, const FitConfig& config,
                                    ModelParams params, double beta) {
    config.validate();
    Vector losses = per_sample_losses(data, params);

    SpFitResult result;
    FitReport& report = result.report;
    Vector v = Vector::Ones(data.rows());
    double prev_outer_obj = std::numeric_limits<double>::quiet_NaN();
    int stable_outers = 0;
    const int inner_iters_cap = config.loop_mode == LoopMode::outer_only ? 1 : config.inner_max_iters;

    for (int outer = 0; outer < config.outer_max_iters; ++outer) {
        report.beta_trace.push_back(beta);
        ++report.outer_iterations;

        const Vector v_before_outer = v;
        double inner_obj = std::numeric_limits<double>::quiet_NaN();
        bool inner_converged = false;
        int inner_steps = 0;
        for (int inner = 0; inner < inner_iters_cap; ++inner) {
            v = select_inliers(losses, beta);
            report.inlier_count_trace.push_back(static_cast<Eigen::Index>(v.sum()));
            if (inner == 0) {
                // Baseline for the first comparison: the objective right
                // after the v-update, before any parameter change.
                inner_obj = detail::convergence_objective(losses, v, beta);
            }
            const WeightVector weights{v};
            params.mu = weighted_mean(data, weights);
            for (int k = 0; k < config.em_iters_per_v_update; ++k)
                detail::em_pair(data, params, weights, config.sigma2_floor);
            losses = per_sample_losses(data, params);

            const double obj = detail::convergence_objective(losses, v, beta);
            report.objective_trace.push_back(objective(losses, v, beta));
            ++report.inner_iterations_total;
            ++inner_steps;
            if (detail::rel_change_below(obj, inner_obj, config.rel_tol)) {
                inner_converged = true;
                inner_obj = obj;
                break;
            }
            inner_obj = obj;
        }
        report.inner_iters_per_outer.push_back(inner_steps);
        if (!inner_converged && inner_iters_cap > 1) report.hit_inner_cap = true;

        const bool all_selected = (v.array() == 1.0).all();
        const bool v_stable = (v.array() == v_before_outer.array()).all();
        stable_outers = v_stable ? stable_outers + 1 : 0;
        // The beta-dependent term of the objective changes by (eta-1)*beta
        // every outer step no matter what, so the outer stop watches the
        // selected-loss sum together with the selection itself.
        const double outer_obj = objective(losses, v, 0.0);
        if (all_selected && v_stable && outer > 0) {
            // beta already exceeds every loss; growing it further cannot
            // change the selection or the parameters.
            report.converged = true;
        } else if (outer > 0 && v_stable &&
                   detail::rel_change_below(outer_obj, prev_outer_obj, config.rel_tol)) {
            report.converged = true;
        } else if (stable_outers >= 3) {
            // Three beta increases in a row admitted nothing new: beta sits
            // in a wide loss gap (eta^3 relative), so the schedule has
            // partitioned the samples and further growth only risks
            // swallowing the high-loss group wholesale.
            report.converged = true;
        }
        prev_outer_obj = outer_obj;
        if (report.converged) break;
        beta *= config.eta;
    }
    report.hit_outer_cap = !report.converged;

    result.params = std::move(params);
    result.selection.v = std::move(v);
    result.selection.beta = beta;
    result.selection.losses = std::move(losses);
    return result;
}

/// Full self-paced PPCA: warm start + median beta (unless overridden),
/// then the alternating loop.
inline SpFitResult fit_sp_ppca(const DataMatrix& data, const FitConfig& config, Rng& rng) {
    config.validate();
    auto [beta0, params] = init_beta(data, config.latent_dim, rng, config.sigma2_floor);
    const double beta = std::isnan(config.beta_init) ? beta0 : config.beta_init;
    return continue_sp_ppca(data, config, std::move(params), beta);
}

}  // namespace sppca

#endif
