// Command-line front end: data synthesis, contamination, fitting,
// projection, reconstruction, and experiment runs. All numerics live in
// the library headers; this file only parses flags and moves files.

#include "sppca/sppca.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace sppca;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

void save_labels(const ContaminationLabel& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    for (bool b : labels.is_outlier) out << (b ? 1 : 0) << '\n';
    if (!out) throw DataError("write failure: " + path);
}

// Fit flags shared between `fit` and `compare`.
struct FitFlags {
    FitConfig config;
    std::string loop_mode = "nested";
    double beta_init = std::numeric_limits<double>::quiet_NaN();
    bool beta_inf = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--eta", config.eta, "beta growth factor (> 1)");
        cmd->add_option("--rel-tol", config.rel_tol, "relative convergence tolerance");
        cmd->add_option("--inner-max-iters", config.inner_max_iters, "inner loop cap");
        cmd->add_option("--outer-max-iters", config.outer_max_iters, "outer loop cap");
        cmd->add_option("--em-iters", config.em_iters_per_v_update, "EM pairs per v-update");
        cmd->add_option("--sigma2-floor", config.sigma2_floor, "lower clamp for sigma2");
        cmd->add_option("--loop-mode", loop_mode, "nested | outer-only")
            ->check(CLI::IsMember({"nested", "outer-only"}));
        cmd->add_option("--beta-init", beta_init, "override the median-based beta0");
        cmd->add_flag("--beta-inf", beta_inf, "start with beta = +infinity (no filtering)");
    }

    FitConfig resolve(Eigen::Index latent_dim, std::uint64_t seed) const {
        FitConfig c = config;
        c.latent_dim = latent_dim;
        c.seed = seed;
        c.loop_mode = loop_mode == "outer-only" ? LoopMode::outer_only : LoopMode::nested;
        c.beta_init = beta_inf ? std::numeric_limits<double>::infinity() : beta_init;
        return c;
    }
};

nlohmann::json report_to_json(const FitReport& report) {
    nlohmann::json j;
    j["objective_trace"] = report.objective_trace;
    j["beta_trace"] = report.beta_trace;
    j["inlier_count_trace"] = report.inlier_count_trace;
    j["converged"] = report.converged;
    j["outer_iterations"] = report.outer_iterations;
    j["inner_iterations_total"] = report.inner_iterations_total;
    j["hit_inner_cap"] = report.hit_inner_cap;
    j["hit_outer_cap"] = report.hit_outer_cap;
    return j;
}

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failure: " + path);
}

void save_pca_model(const PcaModel& model, const std::string& path) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = "pca";
    j["latent_dim"] = model.components.cols();
    j["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());
    j["eigenvalues"] = std::vector<double>(model.eigenvalues.data(),
                                           model.eigenvalues.data() + model.eigenvalues.size());
    auto& comps = j["components"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.components.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < model.components.cols(); ++k) row.push_back(model.components(i, k));
        comps.push_back(std::move(row));
    }
    write_json(j, path);
}

PcaModel load_pca_model(const nlohmann::json& j) {
    PcaModel model;
    for (const char* key : {"latent_dim", "mean", "components", "eigenvalues"})
        if (!j.contains(key)) throw DataError(std::string("pca model file: missing key '") + key + "'");
    const auto m = j["latent_dim"].get<Eigen::Index>();
    const auto& mean = j["mean"];
    model.mean.resize(static_cast<Eigen::Index>(mean.size()));
    for (Eigen::Index i = 0; i < model.mean.size(); ++i) model.mean(i) = mean[static_cast<size_t>(i)].get<double>();
    const auto& ev = j["eigenvalues"];
    model.eigenvalues.resize(static_cast<Eigen::Index>(ev.size()));
    for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i)
        model.eigenvalues(i) = ev[static_cast<size_t>(i)].get<double>();
    const auto& comps = j["components"];
    if (comps.size() != static_cast<size_t>(model.mean.size()))
        throw DataError("pca model file: 'components' must have one row per entry of 'mean'");
    model.components.resize(model.mean.size(), m);
    for (size_t i = 0; i < comps.size(); ++i) {
        const auto& row = comps[i];
        if (row.size() != static_cast<size_t>(m))
            throw DataError("pca model file: 'components' row length does not match latent_dim");
        for (size_t k = 0; k < row.size(); ++k)
            model.components(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
    return model;
}

// Either flavor of saved model, dispatched on the optional "kind" key.
struct AnyModel {
    std::optional<ModelParams> ppca;
    std::optional<PcaModel> pca;

    Eigen::Index data_dim() const { return ppca ? ppca->mu.size() : pca->mean.size(); }

    Matrix do_transform(const DataMatrix& data) const {
        return ppca ? transform(data, *ppca) : pca_transform(data, *pca);
    }
    DataMatrix do_reconstruct(const DataMatrix& data) const {
        return ppca ? reconstruct(data, *ppca) : pca_reconstruct(data, *pca);
    }
};

AnyModel load_any_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    AnyModel model;
    if (j.value("kind", "ppca") == std::string("pca"))
        model.pca = load_pca_model(j);
    else
        model.ppca = load_model(path);
    return model;
}

void check_dims(Eigen::Index expected, Eigen::Index actual) {
    if (expected != actual)
        throw DataError("data has " + std::to_string(actual) + " columns but the model expects " +
                        std::to_string(expected));
}

int run(int argc, char** argv) {
    CLI::App app{"Self-paced probabilistic PCA toolkit"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate synthetic data");
    std::string synth_gen, synth_out, synth_labels;
    Eigen::Index synth_n = 100, synth_d = 20, synth_rank = 3, synth_outliers = 0;
    double synth_noise_std = 3.0;
    std::uint64_t synth_seed = 0;
    synth->add_option("--gen", synth_gen, "line2d | lowrank")->required()
        ->check(CLI::IsMember({"line2d", "lowrank"}));
    synth->add_option("--n", synth_n, "sample count");
    synth->add_option("--d", synth_d, "feature count (lowrank)");
    synth->add_option("--rank", synth_rank, "true rank (lowrank)");
    synth->add_option("--outliers", synth_outliers, "outlier count (line2d)");
    synth->add_option("--noise-std", synth_noise_std, "noise standard deviation (line2d)");
    synth->add_option("--seed", synth_seed, "rng seed");
    synth->add_option("--out", synth_out, "output data CSV")->required();
    synth->add_option("--labels", synth_labels, "output labels CSV (0/1 per row)");

    // ---- contaminate ----
    auto* cont = app.add_subcommand("contaminate", "inject outliers into a CSV");
    std::string cont_in, cont_out, cont_labels, cont_mode;
    double cont_fraction = 0.1, cont_cov_scale = 5.0;
    Eigen::Index cont_count = 0;
    std::uint64_t cont_seed = 0;
    bool cont_header = false;
    cont->add_option("--in", cont_in, "input data CSV")->required();
    cont->add_option("--mode", cont_mode, "gaussian-replace | uniform-append")->required()
        ->check(CLI::IsMember({"gaussian-replace", "uniform-append"}));
    cont->add_option("--fraction", cont_fraction, "replaced fraction (gaussian-replace)");
    cont->add_option("--count", cont_count, "appended row count (uniform-append)");
    cont->add_option("--cov-scale", cont_cov_scale, "outlier covariance scale");
    cont->add_option("--seed", cont_seed, "rng seed");
    cont->add_flag("--has-header", cont_header, "input CSV has a header row");
    cont->add_option("--out", cont_out, "output data CSV")->required();
    cont->add_option("--labels", cont_labels, "output labels CSV");

    // ---- fit ----
    auto* fit = app.add_subcommand("fit", "fit a model to a data CSV");
    std::string fit_method, fit_in, fit_model, fit_report, fit_selection;
    Eigen::Index fit_latent = 0;
    std::uint64_t fit_seed = 0;
    bool fit_header = false;
    FitFlags fit_flags;
    fit->add_option("--method", fit_method, "pca | ppca | sp-ppca")->required()
        ->check(CLI::IsMember({"pca", "ppca", "sp-ppca"}));
    fit->add_option("--latent-dim", fit_latent, "latent dimension M")->required();
    fit->add_option("--in", fit_in, "training data CSV")->required();
    fit->add_option("--model", fit_model, "output model JSON")->required();
    fit->add_option("--report", fit_report, "output fit report JSON");
    fit->add_option("--selection", fit_selection, "output selection JSON (sp-ppca)");
    fit->add_option("--seed", fit_seed, "rng seed");
    fit->add_flag("--has-header", fit_header, "input CSV has a header row");
    fit_flags.attach(fit);

    // ---- transform / reconstruct ----
    std::string tr_model, tr_in, tr_out;
    bool tr_header = false;
    auto* tr = app.add_subcommand("transform", "project data to the latent space");
    auto* rec = app.add_subcommand("reconstruct", "reconstruct data through the model");
    for (auto* cmd : {tr, rec}) {
        cmd->add_option("--model", tr_model, "model JSON")->required();
        cmd->add_option("--in", tr_in, "input data CSV")->required();
        cmd->add_option("--out", tr_out, "output CSV")->required();
        cmd->add_flag("--has-header", tr_header, "input CSV has a header row");
    }

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "print the relative reconstruction error");
    std::string eval_test, eval_recon, eval_model;
    bool eval_header = false;
    eval->add_option("--test", eval_test, "clean test data CSV")->required();
    eval->add_option("--recon", eval_recon, "reconstructed data CSV");
    eval->add_option("--model", eval_model, "model JSON (reconstructs internally)");
    eval->add_flag("--has-header", eval_header, "input CSVs have a header row");

    // ---- compare ----
    auto* comp = app.add_subcommand("compare", "run a multi-method experiment");
    std::string comp_spec, comp_out, comp_format = "csv";
    std::string comp_gen = "lowrank", comp_methods = "pca,ppca,sp-ppca", comp_mode = "gaussian-replace";
    Eigen::Index comp_n = 100, comp_d = 20, comp_rank = 3, comp_latent = 3, comp_count = 0;
    double comp_fraction = 0.0, comp_cov_scale = 5.0;
    int comp_trials = 5;
    std::uint64_t comp_seed = 0;
    FitFlags comp_flags;
    comp->add_option("--spec", comp_spec, "experiment spec JSON (overrides inline flags)");
    comp->add_option("--gen", comp_gen, "line2d | lowrank")
        ->check(CLI::IsMember({"line2d", "lowrank"}));
    comp->add_option("--n", comp_n, "sample count");
    comp->add_option("--d", comp_d, "feature count (lowrank)");
    comp->add_option("--rank", comp_rank, "true rank (lowrank)");
    comp->add_option("--latent-dim", comp_latent, "latent dimension M");
    comp->add_option("--methods", comp_methods, "comma-separated subset of pca,ppca,sp-ppca");
    comp->add_option("--mode", comp_mode, "gaussian-replace | uniform-append | line2d-outliers | none")
        ->check(CLI::IsMember({"gaussian-replace", "uniform-append", "line2d-outliers", "none"}));
    comp->add_option("--fraction", comp_fraction, "contamination fraction");
    comp->add_option("--count", comp_count, "contamination count");
    comp->add_option("--cov-scale", comp_cov_scale, "outlier covariance scale");
    comp->add_option("--trials", comp_trials, "trial count");
    comp->add_option("--seed", comp_seed, "base seed");
    comp->add_option("--out", comp_out, "output results file")->required();
    comp->add_option("--format", comp_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    comp_flags.attach(comp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message and run-with-help hint
        return kExitUsage;
    }

    if (synth->parsed()) {
        Rng rng(synth_seed);
        DataMatrix data;
        ContaminationLabel labels;
        if (synth_gen == "line2d") {
            Line2dParams p;
            p.noise_std = synth_noise_std;
            std::tie(data, labels) = gen_line2d(synth_n, synth_outliers, rng, p);
        } else {
            data = gen_lowrank(synth_n, synth_d, synth_rank, rng);
            labels.is_outlier.assign(static_cast<size_t>(data.rows()), false);
        }
        save_csv(data, synth_out);
        if (!synth_labels.empty()) save_labels(labels, synth_labels);
        std::cerr << "wrote " << data.rows() << "x" << data.cols() << " matrix to " << synth_out
                  << " (" << labels.true_count() << " outliers)\n";
    } else if (cont->parsed()) {
        const DataMatrix data = load_csv(cont_in, cont_header);
        Rng rng(cont_seed);
        auto [out, labels] = cont_mode == "gaussian-replace"
                                 ? inject_gaussian_outliers(data, cont_fraction, rng, cont_cov_scale)
                                 : inject_uniform_outliers(data, cont_count, rng);
        save_csv(out, cont_out);
        if (!cont_labels.empty()) save_labels(labels, cont_labels);
        std::cerr << "wrote " << out.rows() << "x" << out.cols() << " matrix to " << cont_out
                  << " (" << labels.true_count() << " outliers)\n";
    } else if (fit->parsed()) {
        if (fit_latent < 1) {
            std::cerr << "error: --latent-dim must be >= 1\n";
            return kExitUsage;
        }
        const DataMatrix data = load_csv(fit_in, fit_header);
        const FitConfig config = fit_flags.resolve(fit_latent, fit_seed);
        if (fit_method == "pca") {
            save_pca_model(fit_pca(data, fit_latent), fit_model);
        } else if (fit_method == "ppca") {
            Rng rng(fit_seed);
            auto [params, report] = fit_ppca(data, config, rng);
            save_model(params, fit_model);
            if (!fit_report.empty()) write_json(report_to_json(report), fit_report);
        } else {
            Rng rng(fit_seed);
            const SpFitResult result = fit_sp_ppca(data, config, rng);
            save_model(result.params, fit_model);
            if (!fit_report.empty()) write_json(report_to_json(result.report), fit_report);
            if (!fit_selection.empty()) {
                nlohmann::json j;
                j["beta"] = result.selection.beta;
                j["v"] = std::vector<double>(result.selection.v.data(),
                                             result.selection.v.data() + result.selection.v.size());
                j["losses"] = std::vector<double>(
                    result.selection.losses.data(),
                    result.selection.losses.data() + result.selection.losses.size());
                write_json(j, fit_selection);
            }
        }
        std::cerr << "fit " << fit_method << " (M=" << fit_latent << ") on " << data.rows()
                  << " samples -> " << fit_model << "\n";
    } else if (tr->parsed() || rec->parsed()) {
        const AnyModel model = load_any_model(tr_model);
        const DataMatrix data = load_csv(tr_in, tr_header);
        check_dims(model.data_dim(), data.cols());
        if (tr->parsed())
            save_csv(DataMatrix(model.do_transform(data)), tr_out);
        else
            save_csv(model.do_reconstruct(data), tr_out);
    } else if (eval->parsed()) {
        const DataMatrix test = load_csv(eval_test, eval_header);
        DataMatrix recon;
        if (!eval_recon.empty()) {
            recon = load_csv(eval_recon, eval_header);
        } else if (!eval_model.empty()) {
            const AnyModel model = load_any_model(eval_model);
            check_dims(model.data_dim(), test.cols());
            recon = model.do_reconstruct(test);
        } else {
            std::cerr << "error: eval needs --recon or --model\n";
            return kExitUsage;
        }
        std::printf("%.10g\n", reconstruction_error(test, recon));
    } else if (comp->parsed()) {
        ExperimentSpec spec;
        if (!comp_spec.empty()) {
            std::ifstream in(comp_spec);
            if (!in) throw DataError("cannot open file: " + comp_spec);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw DataError(std::string("spec file is not valid JSON: ") + e.what());
            }
            spec = spec_from_json(j);
        } else {
            spec.generator = comp_gen == "line2d" ? Generator::line2d : Generator::lowrank;
            spec.n = comp_n;
            spec.d = comp_d;
            spec.rank = comp_rank;
            spec.latent_dim = comp_latent;
            spec.trials = comp_trials;
            spec.seed = comp_seed;
            spec.fit = comp_flags.resolve(comp_latent, comp_seed);
            if (comp_mode == "none") spec.contamination.kind = ContaminationKind::none;
            else if (comp_mode == "gaussian-replace") spec.contamination.kind = ContaminationKind::gaussian_replace;
            else if (comp_mode == "uniform-append") spec.contamination.kind = ContaminationKind::uniform_append;
            else spec.contamination.kind = ContaminationKind::line2d_outliers;
            spec.contamination.fraction = comp_fraction;
            spec.contamination.count = comp_count;
            spec.contamination.cov_scale = comp_cov_scale;
            spec.methods.clear();
            std::stringstream ss(comp_methods);
            std::string token;
            while (std::getline(ss, token, ',')) {
                if (token == "pca") spec.methods.push_back(Method::pca);
                else if (token == "ppca") spec.methods.push_back(Method::ppca);
                else if (token == "sp-ppca") spec.methods.push_back(Method::sp_ppca);
                else {
                    std::cerr << "error: unknown method '" << token << "'\n";
                    return kExitUsage;
                }
            }
        }
        const ExperimentResult result = run_experiment(spec);
        export_results(result, comp_out,
                       comp_format == "json" ? ResultFormat::json : ResultFormat::csv);
        for (const auto& summary : result.methods)
            std::cerr << method_name(summary.method) << ": mean error " << summary.mean_error
                      << " (std " << summary.std_error << ")\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const sppca::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const sppca::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
