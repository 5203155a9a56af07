#include "rfddl/metrics.hpp"

#include "rfddl/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace rfddl {

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw InputError("prediction/truth length mismatch");
    if (predicted.empty()) throw InputError("accuracy of empty vectors is undefined");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

MatrixI confusion_matrix(const std::vector<int>& predicted, const std::vector<int>& truth,
                         int num_classes) {
    if (predicted.size() != truth.size()) throw InputError("prediction/truth length mismatch");
    if (num_classes < 1) throw InputError("class count must be positive");
    MatrixI m = MatrixI::Zero(num_classes, num_classes);
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int t = truth[i];
        const int p = predicted[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
            throw InputError("label out of range in confusion matrix");
        m(t, p) += 1;
    }
    return m;
}

double snr_db(const Matrix& reference, const Matrix& estimate) {
    if (reference.rows() != estimate.rows() || reference.cols() != estimate.cols())
        throw InputError("SNR shape mismatch");
    const double signal = reference.squaredNorm();
    const double residual = (reference - estimate).squaredNorm();
    if (residual <= 0.0 || !(signal / residual < 1e30)) return 300.0;
    return std::min(300.0, 10.0 * std::log10(signal / residual));
}

double rmse(const Matrix& reference, const Matrix& estimate) {
    if (reference.rows() != estimate.rows() || reference.cols() != estimate.cols())
        throw InputError("RMSE shape mismatch");
    const double count = static_cast<double>(reference.size());
    return (reference - estimate).norm() / std::sqrt(count);
}

DenoiseReport denoise_report(const LabeledDataset& ds, const Hyperparams& hp, double variance,
                             std::uint64_t seed) {
    ds.validate();
    if (variance < 0.0) throw InputError("noise variance must be nonnegative");

    const auto start = std::chrono::steady_clock::now();
    LabeledDataset noisy = ds;
    noisy.features = inject_noise(ds.features, variance, derive_seed(seed, 0xD015Eu, 0));

    Hyperparams run_hp = hp;
    run_hp.seed = derive_seed(seed, 0xD1u, 0);
    TrainResult result = train(noisy, run_hp);
    const Matrix recovered = noisy.features - result.state.data_error;

    DenoiseReport report;
    report.variance = variance;
    report.seed = seed;
    report.snr_noisy_db = snr_db(ds.features, noisy.features);
    report.rmse_noisy = rmse(ds.features, noisy.features);
    report.snr_recovered_db = snr_db(ds.features, recovered);
    report.rmse_recovered = rmse(ds.features, recovered);
    report.column_error_energy.resize(static_cast<std::size_t>(result.state.data_error.cols()));
    for (Eigen::Index j = 0; j < result.state.data_error.cols(); ++j)
        report.column_error_energy[static_cast<std::size_t>(j)] =
            result.state.data_error.col(j).squaredNorm();
    report.iterations = result.state.iter;
    report.converged = result.converged;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::kVariance: return "variance";
        case SweepAxis::kDictionarySize: return "dictionary_size";
        case SweepAxis::kTrainPerClass: return "train_per_class";
        case SweepAxis::kAlpha: return "alpha";
        case SweepAxis::kBeta: return "beta";
        case SweepAxis::kGamma: return "gamma";
    }
    return "unknown";
}

std::string to_string(Method method) {
    switch (method) {
        case Method::kRfddlR: return "rfddl_r";
        case Method::kRfddlE: return "rfddl_e";
        case Method::kRidge: return "ridge";
    }
    return "unknown";
}

namespace {

struct RepeatOutcome {
    bool failed = false;
    std::string reason;
    std::map<Method, double> accuracy;
    std::map<Method, MatrixI> confusion;
    double snr_noisy_db = 0.0;
    double rmse_noisy = 0.0;
    double wall_seconds = 0.0;
};

RepeatOutcome run_repeat(const LabeledDataset& ds, const Hyperparams& base,
                         const SweepConfig& cfg, double axis_value, std::uint64_t job_seed) {
    RepeatOutcome out;
    const auto start = std::chrono::steady_clock::now();

    Hyperparams hp = base;
    double variance = cfg.variance;
    int train_per_class = cfg.train_per_class;
    switch (cfg.axis) {
        case SweepAxis::kVariance: variance = axis_value; break;
        case SweepAxis::kDictionarySize: hp.atoms_per_class = static_cast<int>(axis_value); break;
        case SweepAxis::kTrainPerClass: train_per_class = static_cast<int>(axis_value); break;
        case SweepAxis::kAlpha: hp.alpha = axis_value; break;
        case SweepAxis::kBeta: hp.beta = axis_value; break;
        case SweepAxis::kGamma: hp.gamma = axis_value; break;
    }
    hp.seed = derive_seed(job_seed, 0x7261u, 0);

    LabeledDataset working = ds;
    if (variance > 0.0) {
        working.features = inject_noise(ds.features, variance, derive_seed(job_seed, 0x6e6fu, 0));
        out.snr_noisy_db = snr_db(ds.features, working.features);
        out.rmse_noisy = rmse(ds.features, working.features);
    }
    auto [train_set, test_set] = split_per_class(working, train_per_class,
                                                 derive_seed(job_seed, 0x73706cu, 0));

    const bool wants_rfddl =
        std::any_of(cfg.methods.begin(), cfg.methods.end(),
                    [](Method m) { return m == Method::kRfddlR || m == Method::kRfddlE; });
    RfddlModel model;
    if (wants_rfddl) model = train(train_set, hp).model;

    for (Method m : cfg.methods) {
        Prediction pred;
        switch (m) {
            case Method::kRfddlR: pred = classify_r(model, test_set.features); break;
            case Method::kRfddlE: {
                const CodeExtractor extractor = learn_code_extractor(model, train_set.features);
                pred = classify_e(model, extractor, test_set.features, cfg.e_apply_laplacian);
                break;
            }
            case Method::kRidge: {
                const Matrix scorer = baseline_ridge(train_set, cfg.ridge_eps);
                pred = predict_linear(scorer, test_set.features);
                break;
            }
        }
        out.accuracy[m] = accuracy(pred.hard, test_set.labels);
        out.confusion[m] = confusion_matrix(pred.hard, test_set.labels, ds.num_classes);
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace

ExperimentReport sweep(const LabeledDataset& ds, const Hyperparams& base,
                       const SweepConfig& cfg) {
    ds.validate();
    if (cfg.values.empty()) throw InputError("sweep needs at least one axis value");
    if (cfg.repeats < 1) throw InputError("sweep needs at least one repeat");
    if (cfg.methods.empty()) throw InputError("sweep needs at least one method");

    const std::size_t n_cells = cfg.values.size();
    const std::size_t n_repeats = static_cast<std::size_t>(cfg.repeats);
    std::vector<RepeatOutcome> outcomes(n_cells * n_repeats);

    // Cell x repeat jobs are independent; seeds are derived per job so the
    // dynamic schedule cannot change any result.
    const auto total = static_cast<Eigen::Index>(n_cells * n_repeats);
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index job = 0; job < total; ++job) {
        const std::size_t cell = static_cast<std::size_t>(job) / n_repeats;
        const std::size_t rep = static_cast<std::size_t>(job) % n_repeats;
        const std::uint64_t job_seed = derive_seed(cfg.seed, cell, rep);
        try {
            outcomes[static_cast<std::size_t>(job)] =
                run_repeat(ds, base, cfg, cfg.values[cell], job_seed);
        } catch (const std::exception& e) {
            outcomes[static_cast<std::size_t>(job)].failed = true;
            outcomes[static_cast<std::size_t>(job)].reason = e.what();
        }
    }

    ExperimentReport report;
    report.config = cfg;
    report.cells.resize(n_cells);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        SweepCell& out = report.cells[cell];
        out.axis_value = cfg.values[cell];
        out.seed = derive_seed(cfg.seed, cell, 0);
        for (std::size_t rep = 0; rep < n_repeats; ++rep) {
            const RepeatOutcome& r = outcomes[cell * n_repeats + rep];
            if (r.failed) {
                out.skipped = true;
                out.skip_reason = r.reason;
                continue;
            }
            for (const auto& [method, acc] : r.accuracy) {
                out.per_repeat_accuracy[method].push_back(acc);
                auto [it, inserted] = out.confusion.try_emplace(method, r.confusion.at(method));
                if (!inserted) it->second += r.confusion.at(method);
            }
            out.mean_snr_noisy_db += r.snr_noisy_db;
            out.mean_rmse_noisy += r.rmse_noisy;
            out.wall_seconds += r.wall_seconds;
        }
        if (out.skipped) {
            out.mean_accuracy.clear();
            out.per_repeat_accuracy.clear();
            out.confusion.clear();
            continue;
        }
        for (const auto& [method, accs] : out.per_repeat_accuracy) {
            double sum = 0.0;
            for (double a : accs) sum += a;
            out.mean_accuracy[method] = sum / static_cast<double>(accs.size());
        }
        out.mean_snr_noisy_db /= static_cast<double>(n_repeats);
        out.mean_rmse_noisy /= static_cast<double>(n_repeats);
    }
    return report;
}

}  // namespace rfddl
