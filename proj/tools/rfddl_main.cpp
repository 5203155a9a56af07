#include "rfddl/atom_graph.hpp"
#include "rfddl/data_model.hpp"
#include "rfddl/inference.hpp"
#include "rfddl/io.hpp"
#include "rfddl/metrics.hpp"
#include "rfddl/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace rfddl;

struct DataOpts {
    std::string data_path;
    std::string labels_path;
    std::string format = "csv";
    std::string orientation = "columns";
    int num_classes = 0;  // 0 = infer as max(label) + 1
};

struct CommonOpts {
    std::string out_dir = ".";
    Hyperparams hp;
    std::string dict_init = "samples";
};

io::MatrixFormat parse_format(const std::string& s) {
    if (s == "csv") return io::MatrixFormat::kCsv;
    if (s == "binary") return io::MatrixFormat::kBinary;
    throw InputError("unknown matrix format: " + s);
}

io::Orientation parse_orientation(const std::string& s) {
    if (s == "columns") return io::Orientation::kSamplesAsColumns;
    if (s == "rows") return io::Orientation::kSamplesAsRows;
    throw InputError("unknown orientation: " + s);
}

void add_common_options(CLI::App* cmd, CommonOpts& opts) {
    // Repeated options keep the last value, so config-file entries injected
    // ahead of the command line lose to explicit flags.
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    static std::string config_path_sink;
    cmd->add_option("--config", config_path_sink,
                    "Flat key=value config file; command-line flags override it");
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--seed", opts.hp.seed, "Master seed");
    cmd->add_option("--alpha", opts.hp.alpha, "Sparse-error penalty weight");
    cmd->add_option("--beta", opts.hp.beta, "Code consistency weight");
    cmd->add_option("--gamma", opts.hp.gamma, "Classification weight");
    cmd->add_option("--atoms-per-class", opts.hp.atoms_per_class, "Dictionary atoms per class");
    cmd->add_option("--knn", opts.hp.k_neighbors, "Atom-graph neighbor count");
    cmd->add_option("--tol", opts.hp.tol, "Objective-difference stopping tolerance");
    cmd->add_option("--max-iter", opts.hp.max_iter, "Iteration cap");
    cmd->add_option("--jitter", opts.hp.jitter, "Relative diagonal loading for solves");
    cmd->add_option("--irls-floor", opts.hp.irls_floor, "Column-norm floor in reweighting");
    cmd->add_option("--dict-init", opts.dict_init, "Dictionary init: samples|random")
        ->check(CLI::IsMember({"samples", "random"}));
}

void add_data_options(CLI::App* cmd, DataOpts& opts, bool labels_required = true) {
    cmd->add_option("--data", opts.data_path, "Matrix file")->required();
    auto* labels = cmd->add_option("--labels", opts.labels_path, "Label file, one integer per line");
    if (labels_required) labels->required();
    cmd->add_option("--format", opts.format, "Matrix file format: csv|binary")
        ->check(CLI::IsMember({"csv", "binary"}));
    cmd->add_option("--orientation", opts.orientation, "Sample orientation: columns|rows")
        ->check(CLI::IsMember({"columns", "rows"}));
    cmd->add_option("--classes", opts.num_classes, "Class count (default: max label + 1)");
}

LabeledDataset load_dataset(const DataOpts& opts) {
    LabeledDataset ds;
    ds.features = io::load_matrix(opts.data_path, parse_format(opts.format),
                                  parse_orientation(opts.orientation));
    ds.labels = io::load_labels(opts.labels_path);
    int max_label = 0;
    for (int l : ds.labels) max_label = std::max(max_label, l);
    ds.num_classes = opts.num_classes > 0 ? opts.num_classes : max_label + 1;
    ds.validate();
    return ds;
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    return (std::filesystem::path(opts.out_dir) / name).string();
}

void finalize_hp(CommonOpts& opts) {
    opts.hp.dict_init = opts.dict_init == "random" ? DictInit::kRandom : DictInit::kSamples;
}

/// Splice `key=value` lines from a --config file into the argument list as
/// `--key=value` tokens right after the subcommand, so explicit flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            break;
        }
    }
    if (path.empty() || args.empty()) return args;

    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    std::vector<std::string> injected;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        const std::size_t eq = line.find('=', start);
        if (eq == std::string::npos)
            throw FormatError("expected key=value at " + path + ":" + std::to_string(line_no));
        const std::size_t key_end = line.find_last_not_of(" \t", eq - 1);
        if (key_end == std::string::npos || key_end < start)
            throw FormatError("empty key at " + path + ":" + std::to_string(line_no));
        injected.push_back("--" + line.substr(start, key_end - start + 1) + "=" +
                           line.substr(eq + 1));
    }
    args.insert(args.begin() + 1, injected.begin(), injected.end());
    return args;
}

std::string predictions_csv(const Prediction& pred) {
    std::string text;
    char buf[40];
    for (std::size_t i = 0; i < pred.hard.size(); ++i) {
        text += std::to_string(i);
        text += ',';
        text += std::to_string(pred.hard[i]);
        for (Eigen::Index r = 0; r < pred.soft.rows(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.17g", pred.soft(r, static_cast<Eigen::Index>(i)));
            text += ',';
            text += buf;
        }
        text += '\n';
    }
    return text;
}

int cmd_train(const CommonOpts& common, const DataOpts& data) {
    const LabeledDataset ds = load_dataset(data);
    const auto start = std::chrono::steady_clock::now();
    const TrainResult result = train(ds, common.hp);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    io::save_model(out_path(common, "model.rfml"), result.model);

    std::string history;
    for (std::size_t i = 0; i < result.state.objective_history.size(); ++i) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, result.state.objective_history[i]);
        history += buf;
    }
    io::write_text_atomic(out_path(common, "history.csv"), history);

    nlohmann::json summary;
    summary["iterations"] = result.state.iter;
    summary["converged"] = result.converged;
    summary["final_objective"] = result.state.objective_history.back();
    const std::size_t len = result.state.objective_history.size();
    summary["delta_objective"] =
        len >= 2 ? std::abs(result.state.objective_history[len - 2] -
                            result.state.objective_history[len - 1])
                 : 0.0;
    summary["wall_seconds"] = wall;
    summary["seed"] = common.hp.seed;
    summary["alpha"] = common.hp.alpha;
    summary["beta"] = common.hp.beta;
    summary["gamma"] = common.hp.gamma;
    summary["atoms_per_class"] = common.hp.atoms_per_class;
    summary["k_neighbors"] = common.hp.k_neighbors;
    summary["tol"] = common.hp.tol;
    summary["max_iter"] = common.hp.max_iter;
    io::write_text_atomic(out_path(common, "summary.json"), summary.dump(2) + "\n");
    std::cout << "trained " << result.state.iter << " iterations, converged="
              << (result.converged ? "true" : "false") << "\n";
    return 0;
}

Prediction run_predict(const std::string& model_path, const DataOpts& data,
                       const std::string& scheme, bool apply_laplacian,
                       const std::string& train_data_path) {
    const RfddlModel model = io::load_model(model_path);
    const Matrix x_test = io::load_matrix(data.data_path, parse_format(data.format),
                                          parse_orientation(data.orientation));
    if (scheme == "r") return classify_r(model, x_test);
    if (train_data_path.empty())
        throw InputError("scheme e needs --train-data (the matrix the model was trained on)");
    const Matrix x_train = io::load_matrix(train_data_path, parse_format(data.format),
                                           parse_orientation(data.orientation));
    const CodeExtractor extractor = learn_code_extractor(model, x_train);
    return classify_e(model, extractor, x_test, apply_laplacian);
}

int cmd_predict(const CommonOpts& common, const DataOpts& data, const std::string& model_path,
                const std::string& scheme, bool apply_laplacian,
                const std::string& train_data_path) {
    const Prediction pred = run_predict(model_path, data, scheme, apply_laplacian, train_data_path);
    io::write_text_atomic(out_path(common, "predictions.csv"), predictions_csv(pred));
    std::cout << "predicted " << pred.hard.size() << " samples\n";
    return 0;
}

int cmd_eval(const CommonOpts& common, const DataOpts& data, const std::string& model_path,
             const std::string& scheme, bool apply_laplacian, const std::string& train_data_path) {
    const Prediction pred = run_predict(model_path, data, scheme, apply_laplacian, train_data_path);
    const std::vector<int> truth = io::load_labels(data.labels_path);
    int max_label = 0;
    for (int l : truth) max_label = std::max(max_label, l);
    const int c = std::max(data.num_classes > 0 ? data.num_classes : max_label + 1,
                           static_cast<int>(pred.soft.rows()));

    const double acc = accuracy(pred.hard, truth);
    const MatrixI confusion = confusion_matrix(pred.hard, truth, c);

    nlohmann::json metrics;
    metrics["accuracy"] = acc;
    metrics["n_test"] = truth.size();
    metrics["scheme"] = scheme;
    io::write_text_atomic(out_path(common, "metrics.json"), metrics.dump(2) + "\n");

    std::string confusion_text;
    for (Eigen::Index i = 0; i < confusion.rows(); ++i) {
        for (Eigen::Index j = 0; j < confusion.cols(); ++j) {
            if (j) confusion_text += ',';
            confusion_text += std::to_string(confusion(i, j));
        }
        confusion_text += '\n';
    }
    io::write_text_atomic(out_path(common, "confusion.csv"), confusion_text);
    std::cout << "accuracy " << acc << " on " << truth.size() << " samples\n";
    return 0;
}

SweepAxis parse_axis(const std::string& s) {
    if (s == "variance") return SweepAxis::kVariance;
    if (s == "dictionary_size") return SweepAxis::kDictionarySize;
    if (s == "train_per_class") return SweepAxis::kTrainPerClass;
    if (s == "alpha") return SweepAxis::kAlpha;
    if (s == "beta") return SweepAxis::kBeta;
    if (s == "gamma") return SweepAxis::kGamma;
    throw InputError("unknown sweep axis: " + s);
}

Method parse_method(const std::string& s) {
    if (s == "rfddl_r") return Method::kRfddlR;
    if (s == "rfddl_e") return Method::kRfddlE;
    if (s == "ridge") return Method::kRidge;
    throw InputError("unknown method: " + s);
}

int cmd_sweep(const CommonOpts& common, const DataOpts& data, const std::string& axis,
              const std::vector<double>& values, const std::vector<std::string>& methods,
              int repeats, int train_per_class, double base_variance, double ridge_eps,
              bool e_apply_laplacian) {
    const LabeledDataset ds = load_dataset(data);
    SweepConfig cfg;
    cfg.axis = parse_axis(axis);
    cfg.values = values;
    cfg.methods.clear();
    for (const std::string& m : methods) cfg.methods.push_back(parse_method(m));
    cfg.repeats = repeats;
    cfg.train_per_class = train_per_class;
    cfg.variance = base_variance;
    cfg.ridge_eps = ridge_eps;
    cfg.e_apply_laplacian = e_apply_laplacian;
    cfg.seed = common.hp.seed;

    const ExperimentReport report = sweep(ds, common.hp, cfg);
    io::write_text_atomic(out_path(common, "sweep.csv"), io::report_to_csv(report));
    io::write_text_atomic(out_path(common, "sweep.json"), io::report_to_json(report));
    std::cout << "swept " << report.cells.size() << " cells x " << repeats << " repeats\n";
    return 0;
}

int cmd_denoise(const CommonOpts& common, const DataOpts& data, double variance) {
    const LabeledDataset ds = load_dataset(data);
    const DenoiseReport report = denoise_report(ds, common.hp, variance, common.hp.seed);
    io::write_text_atomic(out_path(common, "denoise.json"), io::denoise_to_json(report));
    std::cout << "snr noisy " << report.snr_noisy_db << " dB -> recovered "
              << report.snr_recovered_db << " dB\n";
    return 0;
}

int cmd_synth(const CommonOpts& common, const SyntheticSpec& spec) {
    const LabeledDataset ds = synth_blobs(spec);
    io::save_matrix_binary(out_path(common, "data.rfdm"), ds.features);
    io::save_matrix_csv(out_path(common, "data.csv"), ds.features);
    io::save_labels(out_path(common, "labels.txt"), ds.labels);
    std::cout << "wrote " << ds.size() << " samples, " << ds.dim() << " dims, "
              << ds.num_classes << " classes\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RFDDL dictionary learning toolkit"};
    app.require_subcommand(1);

    CommonOpts common;
    DataOpts data;

    auto* train_cmd = app.add_subcommand("train", "Train a model and write it to disk");
    add_common_options(train_cmd, common);
    add_data_options(train_cmd, data);

    auto* predict_cmd = app.add_subcommand("predict", "Classify a matrix with a trained model");
    std::string model_path;
    std::string scheme = "r";
    bool apply_laplacian = false;
    std::string train_data_path;
    add_common_options(predict_cmd, common);
    add_data_options(predict_cmd, data, /*labels_required=*/false);
    predict_cmd->add_option("--model", model_path, "Model file")->required();
    predict_cmd->add_option("--scheme", scheme, "Inference scheme: r|e")
        ->check(CLI::IsMember({"r", "e"}));
    predict_cmd->add_flag("--apply-laplacian", apply_laplacian,
                          "Pass extracted codes through the atom graph (scheme e)");
    predict_cmd->add_option("--train-data", train_data_path,
                            "Training matrix used to fit the code extractor (scheme e)");

    auto* eval_cmd = app.add_subcommand("eval", "Classify and score against ground truth");
    add_common_options(eval_cmd, common);
    add_data_options(eval_cmd, data);
    eval_cmd->add_option("--model", model_path, "Model file")->required();
    eval_cmd->add_option("--scheme", scheme, "Inference scheme: r|e")
        ->check(CLI::IsMember({"r", "e"}));
    eval_cmd->add_flag("--apply-laplacian", apply_laplacian,
                       "Pass extracted codes through the atom graph (scheme e)");
    eval_cmd->add_option("--train-data", train_data_path,
                         "Training matrix used to fit the code extractor (scheme e)");

    auto* sweep_cmd = app.add_subcommand("sweep", "Grid experiment over one axis");
    std::string axis = "variance";
    std::vector<double> values;
    std::vector<std::string> methods = {"rfddl_r", "rfddl_e", "ridge"};
    int repeats = 1;
    int train_per_class = 10;
    double base_variance = 0.0;
    double ridge_eps = 1.0;
    bool e_apply_laplacian = false;
    add_common_options(sweep_cmd, common);
    add_data_options(sweep_cmd, data);
    sweep_cmd->add_option("--axis", axis,
                          "variance|dictionary_size|train_per_class|alpha|beta|gamma");
    sweep_cmd->add_option("--values", values, "Axis values")->required()->delimiter(',');
    sweep_cmd->add_option("--methods", methods, "Subset of rfddl_r,rfddl_e,ridge")->delimiter(',');
    sweep_cmd->add_option("--repeats", repeats, "Repeats per cell");
    sweep_cmd->add_option("--train-per-class", train_per_class, "Training samples per class");
    sweep_cmd->add_option("--variance", base_variance, "Noise variance applied in every cell");
    sweep_cmd->add_option("--ridge-eps", ridge_eps, "Ridge baseline regularization");
    sweep_cmd->add_flag("--e-apply-laplacian", e_apply_laplacian,
                        "Embedding scheme scores graph-embedded codes");

    auto* denoise_cmd = app.add_subcommand("denoise", "Corrupt, recover, and report SNR/RMSE");
    double variance = 500.0;
    add_common_options(denoise_cmd, common);
    add_data_options(denoise_cmd, data);
    denoise_cmd->add_option("--variance", variance, "Noise variance to inject");

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic blob dataset");
    SyntheticSpec spec;
    add_common_options(synth_cmd, common);
    synth_cmd->add_option("--classes", spec.num_classes, "Class count");
    synth_cmd->add_option("--dim", spec.dim, "Feature dimension");
    synth_cmd->add_option("--per-class", spec.samples_per_class, "Samples per class");
    synth_cmd->add_option("--separation", spec.centroid_separation, "Centroid separation");
    synth_cmd->add_option("--std", spec.within_class_std, "Within-class standard deviation");

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        finalize_hp(common);
        spec.seed = common.hp.seed;
        if (train_cmd->parsed()) return cmd_train(common, data);
        if (predict_cmd->parsed())
            return cmd_predict(common, data, model_path, scheme, apply_laplacian, train_data_path);
        if (eval_cmd->parsed())
            return cmd_eval(common, data, model_path, scheme, apply_laplacian, train_data_path);
        if (sweep_cmd->parsed())
            return cmd_sweep(common, data, axis, values, methods, repeats, train_per_class,
                             base_variance, ridge_eps, e_apply_laplacian);
        if (denoise_cmd->parsed()) return cmd_denoise(common, data, variance);
        if (synth_cmd->parsed()) return cmd_synth(common, spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    std::cerr << "error: no subcommand given" << std::endl;
    return 1;
}
