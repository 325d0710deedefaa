#ifndef SPPCA_EVALUATION_HPP
#define SPPCA_EVALUATION_HPP

#include "sppca/baseline_pca.hpp"
#include "sppca/datagen.hpp"
#include "sppca/io.hpp"
#include "sppca/sp_ppca.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace sppca {

/// ||X - X_hat||_F / ||X||_F.
inline double reconstruction_error(const DataMatrix& x_test, const DataMatrix& x_hat) {
    if (x_test.rows() != x_hat.rows() || x_test.cols() != x_hat.cols())
        throw DataError("reconstruction_error: shape mismatch");
    const double denom = x_test.values.norm();
    if (!(denom > 0.0)) throw DataError("reconstruction_error: zero-norm test matrix");
    return (x_test.values - x_hat.values).norm() / denom;
}

/// Principal angles (radians, descending) between the column spans of a
/// and b. Inputs are orthonormalized internally.
inline Vector principal_angles(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DataError("principal_angles: shape mismatch");
    auto orthonormalize = [](const Matrix& m) {
        Eigen::HouseholderQR<Matrix> qr(m);
        const Matrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
        for (Eigen::Index i = 0; i < m.cols(); ++i)
            if (std::abs(r(i, i)) < 1e-12)
                throw DataError("principal_angles: rank-deficient basis");
        return Matrix(qr.householderQ() * Matrix::Identity(m.rows(), m.cols()));
    };
    const Matrix qa = orthonormalize(a);
    const Matrix qb = orthonormalize(b);
    Eigen::JacobiSVD<Matrix> svd(qa.transpose() * qb);
    Vector angles(a.cols());
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
        const double s = std::clamp(svd.singularValues()(i), 0.0, 1.0);
        // singular values descend, so angles come out ascending; reverse.
        angles(a.cols() - 1 - i) = std::acos(s);
    }
    return angles;
}

/// Precision/recall of outlier flagging, where v_n = 0 means "flagged".
/// Empty denominators count as perfect (0/0 -> 1).
inline std::pair<double, double> selection_metrics(const ContaminationLabel& labels, const Vector& v) {
    if (static_cast<Eigen::Index>(labels.is_outlier.size()) != v.size())
        throw DataError("selection_metrics: length mismatch");
    Eigen::Index flagged = 0, truth = 0, hits = 0;
    for (Eigen::Index n = 0; n < v.size(); ++n) {
        const bool f = v(n) == 0.0;
        const bool t = labels.is_outlier[static_cast<size_t>(n)];
        flagged += f;
        truth += t;
        hits += f && t;
    }
    const double precision = flagged == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(flagged);
    const double recall = truth == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth);
    return {precision, recall};
}

enum class Generator { line2d, lowrank, external_csv };
enum class Method { pca, ppca, sp_ppca };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::pca: return "pca";
        case Method::ppca: return "ppca";
        case Method::sp_ppca: return "sp-ppca";
    }
    throw DataError("unknown method");
}

enum class ContaminationKind { none, gaussian_replace, uniform_append, line2d_outliers };

struct ContaminationSpec {
    ContaminationKind kind = ContaminationKind::none;
    double fraction = 0.0;       // gaussian_replace
    Eigen::Index count = 0;      // uniform_append / line2d_outliers
    double cov_scale = 5.0;      // gaussian_replace covariance scale
};

struct ExperimentSpec {
    Generator generator = Generator::lowrank;
    Eigen::Index n = 100;
    Eigen::Index d = 20;
    Eigen::Index rank = 3;
    Line2dParams line;
    std::string train_csv;       // external_csv: pre-split inputs
    std::string test_csv;
    bool csv_has_header = false;
    double train_fraction = 0.7;
    ContaminationSpec contamination;
    std::vector<Method> methods = {Method::ppca, Method::sp_ppca};
    Eigen::Index latent_dim = 3;
    int trials = 5;
    std::uint64_t seed = 0;
    FitConfig fit;               // latent_dim/seed overridden per trial

    void validate() const {
        if (trials < 1) throw DataError("ExperimentSpec: trials must be >= 1");
        if (methods.empty()) throw DataError("ExperimentSpec: methods must be nonempty");
        if (latent_dim < 1) throw DataError("ExperimentSpec: latent_dim must be >= 1");
    }
};

struct TrialOutcome {
    double error = 0.0;
    double seconds = 0.0;
    double precision = -1.0;  // sp-ppca only; -1 when not applicable
    double recall = -1.0;
};

struct MethodSummary {
    Method method = Method::ppca;
    std::vector<TrialOutcome> trials;
    double mean_error = 0.0;
    double std_error = 0.0;  // sample standard deviation (divisor trials-1)
    double mean_precision = -1.0;
    double mean_recall = -1.0;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<MethodSummary> methods;
};

namespace detail {

struct TrialData {
    DataMatrix train;
    DataMatrix test;
    ContaminationLabel labels;  // over train rows
};

inline TrialData make_trial_data(const ExperimentSpec& spec, Rng& rng) {
    TrialData td;
    DataMatrix full;
    switch (spec.generator) {
        case Generator::lowrank:
            full = gen_lowrank(spec.n, spec.d, spec.rank, rng);
            break;
        case Generator::line2d:
            full = gen_line2d(spec.n, 0, rng, spec.line).first;
            break;
        case Generator::external_csv:
            td.train = load_csv(spec.train_csv, spec.csv_has_header);
            td.test = load_csv(spec.test_csv, spec.csv_has_header);
            break;
    }
    if (spec.generator != Generator::external_csv)
        std::tie(td.train, td.test) = train_test_split(full, spec.train_fraction, rng);

    // Contaminate the train split only; the test set stays clean.
    switch (spec.contamination.kind) {
        case ContaminationKind::none:
            td.labels.is_outlier.assign(static_cast<size_t>(td.train.rows()), false);
            break;
        case ContaminationKind::gaussian_replace:
            std::tie(td.train, td.labels) = inject_gaussian_outliers(
                td.train, spec.contamination.fraction, rng, spec.contamination.cov_scale);
            break;
        case ContaminationKind::uniform_append:
            std::tie(td.train, td.labels) = inject_uniform_outliers(td.train, spec.contamination.count, rng);
            break;
        case ContaminationKind::line2d_outliers: {
            const Eigen::Index base = td.train.rows();
            Matrix m(base + spec.contamination.count, 2);
            m.topRows(base) = td.train.values;
            for (Eigen::Index i = 0; i < spec.contamination.count; ++i)
                m.row(base + i) = line2d_outlier(spec.line, rng);
            td.train = DataMatrix(std::move(m));
            td.labels.is_outlier.assign(static_cast<size_t>(td.train.rows()), false);
            for (Eigen::Index i = 0; i < spec.contamination.count; ++i)
                td.labels.is_outlier[static_cast<size_t>(base + i)] = true;
            break;
        }
    }
    return td;
}

inline TrialOutcome run_single_fit(const ExperimentSpec& spec, Method method,
                                   const TrialData& td, std::uint64_t fit_seed) {
    FitConfig config = spec.fit;
    config.latent_dim = spec.latent_dim;
    config.seed = fit_seed;

    TrialOutcome outcome;
    const auto t0 = std::chrono::steady_clock::now();
    DataMatrix recon;
    switch (method) {
        case Method::pca: {
            const PcaModel model = fit_pca(td.train, spec.latent_dim);
            recon = pca_reconstruct(td.test, model);
            break;
        }
        case Method::ppca: {
            Rng rng(fit_seed);
            auto [params, report] = fit_ppca(td.train, config, rng);
            recon = reconstruct(td.test, params);
            break;
        }
        case Method::sp_ppca: {
            Rng rng(fit_seed);
            const SpFitResult fit = fit_sp_ppca(td.train, config, rng);
            recon = reconstruct(td.test, fit.params);
            std::tie(outcome.precision, outcome.recall) = selection_metrics(td.labels, fit.selection.v);
            break;
        }
    }
    const auto t1 = std::chrono::steady_clock::now();
    outcome.seconds = std::chrono::duration<double>(t1 - t0).count();
    outcome.error = reconstruction_error(td.test, recon);
    return outcome;
}

}  // namespace detail

/// Per-trial seeds come from splitmix64 indexing of the base seed, so
/// raising the trial count never changes earlier trials.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult result;
    result.spec = spec;
    result.methods.resize(spec.methods.size());
    for (size_t m = 0; m < spec.methods.size(); ++m) result.methods[m].method = spec.methods[m];

    for (int t = 0; t < spec.trials; ++t) {
        const std::uint64_t trial_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(t));
        Rng data_rng(derive_seed(trial_seed, 0));
        const detail::TrialData td = detail::make_trial_data(spec, data_rng);
        for (size_t m = 0; m < spec.methods.size(); ++m) {
            const std::uint64_t fit_seed = derive_seed(trial_seed, 1 + static_cast<std::uint64_t>(m));
            result.methods[m].trials.push_back(
                detail::run_single_fit(spec, spec.methods[m], td, fit_seed));
        }
    }

    for (auto& summary : result.methods) {
        double sum = 0.0, sum_p = 0.0, sum_r = 0.0;
        for (const auto& trial : summary.trials) {
            sum += trial.error;
            sum_p += trial.precision;
            sum_r += trial.recall;
        }
        const auto k = static_cast<double>(summary.trials.size());
        summary.mean_error = sum / k;
        double ss = 0.0;
        for (const auto& trial : summary.trials) {
            const double dev = trial.error - summary.mean_error;
            ss += dev * dev;
        }
        summary.std_error = summary.trials.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
        if (summary.method == Method::sp_ppca) {
            summary.mean_precision = sum_p / k;
            summary.mean_recall = sum_r / k;
        }
    }
    return result;
}

inline nlohmann::json result_to_json(const ExperimentResult& result) {
    nlohmann::json j;
    j["trials"] = result.spec.trials;
    j["seed"] = result.spec.seed;
    j["latent_dim"] = result.spec.latent_dim;
    auto& methods = j["methods"] = nlohmann::json::array();
    for (const auto& summary : result.methods) {
        nlohmann::json m;
        m["method"] = method_name(summary.method);
        m["mean_error"] = summary.mean_error;
        m["std_error"] = summary.std_error;
        if (summary.mean_precision >= 0.0) {
            m["mean_precision"] = summary.mean_precision;
            m["mean_recall"] = summary.mean_recall;
        }
        auto& trials = m["trials"] = nlohmann::json::array();
        // wall-clock stays in-memory only; exported files must be
        // bit-identical across reruns with the same seed.
        for (const auto& trial : summary.trials) {
            nlohmann::json tj;
            tj["error"] = trial.error;
            if (trial.precision >= 0.0) {
                tj["precision"] = trial.precision;
                tj["recall"] = trial.recall;
            }
            trials.push_back(std::move(tj));
        }
        methods.push_back(std::move(m));
    }
    return j;
}

inline constexpr int kSpecFormatVersion = 1;

/// Experiment spec file schema used by the CLI `compare` subcommand.
inline ExperimentSpec spec_from_json(const nlohmann::json& j) {
    ExperimentSpec spec;
    if (j.contains("format_version") && j["format_version"].get<int>() != kSpecFormatVersion)
        throw DataError("experiment spec: unknown format_version " + j["format_version"].dump());

    const std::string gen = j.value("generator", "lowrank");
    if (gen == "lowrank") spec.generator = Generator::lowrank;
    else if (gen == "line2d") spec.generator = Generator::line2d;
    else if (gen == "external-csv") spec.generator = Generator::external_csv;
    else throw DataError("experiment spec: unknown generator '" + gen + "'");

    spec.n = j.value("n", spec.n);
    spec.d = j.value("d", spec.d);
    spec.rank = j.value("rank", spec.rank);
    spec.train_csv = j.value("train_csv", spec.train_csv);
    spec.test_csv = j.value("test_csv", spec.test_csv);
    spec.csv_has_header = j.value("csv_has_header", spec.csv_has_header);
    spec.train_fraction = j.value("train_fraction", spec.train_fraction);
    spec.latent_dim = j.value("latent_dim", spec.latent_dim);
    spec.trials = j.value("trials", spec.trials);
    spec.seed = j.value("seed", spec.seed);
    spec.line.noise_std = j.value("noise_std", spec.line.noise_std);

    if (j.contains("contamination")) {
        const auto& c = j["contamination"];
        const std::string kind = c.value("kind", "none");
        if (kind == "none") spec.contamination.kind = ContaminationKind::none;
        else if (kind == "gaussian-replace") spec.contamination.kind = ContaminationKind::gaussian_replace;
        else if (kind == "uniform-append") spec.contamination.kind = ContaminationKind::uniform_append;
        else if (kind == "line2d-outliers") spec.contamination.kind = ContaminationKind::line2d_outliers;
        else throw DataError("experiment spec: unknown contamination kind '" + kind + "'");
        spec.contamination.fraction = c.value("fraction", spec.contamination.fraction);
        spec.contamination.count = c.value("count", spec.contamination.count);
        spec.contamination.cov_scale = c.value("cov_scale", spec.contamination.cov_scale);
    }

    if (j.contains("methods")) {
        spec.methods.clear();
        for (const auto& name : j["methods"]) {
            const std::string s = name.get<std::string>();
            if (s == "pca") spec.methods.push_back(Method::pca);
            else if (s == "ppca") spec.methods.push_back(Method::ppca);
            else if (s == "sp-ppca") spec.methods.push_back(Method::sp_ppca);
            else throw DataError("experiment spec: unknown method '" + s + "'");
        }
    }

    if (j.contains("fit")) {
        const auto& f = j["fit"];
        spec.fit.eta = f.value("eta", spec.fit.eta);
        spec.fit.rel_tol = f.value("rel_tol", spec.fit.rel_tol);
        spec.fit.inner_max_iters = f.value("inner_max_iters", spec.fit.inner_max_iters);
        spec.fit.outer_max_iters = f.value("outer_max_iters", spec.fit.outer_max_iters);
        spec.fit.em_iters_per_v_update = f.value("em_iters_per_v_update", spec.fit.em_iters_per_v_update);
        spec.fit.sigma2_floor = f.value("sigma2_floor", spec.fit.sigma2_floor);
        if (f.value("loop_mode", "nested") == std::string("outer-only"))
            spec.fit.loop_mode = LoopMode::outer_only;
    }
    spec.validate();
    return spec;
}

enum class ResultFormat { csv, json };

/// CSV: one row per (method, trial), then one summary row per method.
inline void export_results(const ExperimentResult& result, const std::string& path,
                           ResultFormat format) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    if (format == ResultFormat::json) {
        out << result_to_json(result).dump(2) << '\n';
    } else {
        out << "method,trial,error,error_std,precision,recall\n";
        for (const auto& summary : result.methods) {
            for (size_t t = 0; t < summary.trials.size(); ++t) {
                const auto& trial = summary.trials[t];
                out << method_name(summary.method) << ',' << t << ','
                    << detail::format_g17(trial.error) << ",,";
                if (trial.precision >= 0.0)
                    out << detail::format_g17(trial.precision) << ',' << detail::format_g17(trial.recall);
                else
                    out << ',';
                out << '\n';
            }
        }
        for (const auto& summary : result.methods) {
            out << method_name(summary.method) << ",mean,"
                << detail::format_g17(summary.mean_error) << ','
                << detail::format_g17(summary.std_error) << ',';
            if (summary.mean_precision >= 0.0)
                out << detail::format_g17(summary.mean_precision) << ','
                    << detail::format_g17(summary.mean_recall);
            else
                out << ',';
            out << '\n';
        }
    }
    if (!out) throw DataError("write failure: " + path);
}

}  // namespace sppca

#endif
