#pragma once

#include "rfddl/common.hpp"
#include "rfddl/data_model.hpp"
#include "rfddl/solver.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rfddl {

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Entry (i, j) counts samples of true class i predicted as class j.
MatrixI confusion_matrix(const std::vector<int>& predicted, const std::vector<int>& truth,
                         int num_classes);

/// 10 log10(||reference||^2 / ||reference - estimate||^2), capped at 300 dB
/// when the residual underflows.
double snr_db(const Matrix& reference, const Matrix& estimate);

/// Frobenius residual normalized by the entry count.
double rmse(const Matrix& reference, const Matrix& estimate);

struct DenoiseReport {
    double variance = 0.0;
    std::uint64_t seed = 0;
    double snr_noisy_db = 0.0;      // corrupted data against the clean data
    double snr_recovered_db = 0.0;  // recovered data against the clean data
    double rmse_noisy = 0.0;
    double rmse_recovered = 0.0;
    std::vector<double> column_error_energy;  // squared norm per recovered error column
    int iterations = 0;
    bool converged = false;
    double wall_seconds = 0.0;
};

/// Corrupt the dataset, train on the corrupted copy, and quantify how much
/// closer the recovered data sits to the clean original.
DenoiseReport denoise_report(const LabeledDataset& ds, const Hyperparams& hp, double variance,
                             std::uint64_t seed);

enum class SweepAxis { kVariance, kDictionarySize, kTrainPerClass, kAlpha, kBeta, kGamma };
enum class Method { kRfddlR, kRfddlE, kRidge };

std::string to_string(SweepAxis axis);
std::string to_string(Method method);

struct SweepConfig {
    SweepAxis axis = SweepAxis::kVariance;
    std::vector<double> values;
    std::vector<Method> methods = {Method::kRfddlR, Method::kRfddlE, Method::kRidge};
    int repeats = 1;
    int train_per_class = 10;
    double variance = 0.0;   // noise applied in every cell unless on the variance axis
    double ridge_eps = 1.0;
    bool e_apply_laplacian = false;
    std::uint64_t seed = 0;
};

struct SweepCell {
    double axis_value = 0.0;
    bool skipped = false;
    std::string skip_reason;
    std::map<Method, double> mean_accuracy;
    std::map<Method, std::vector<double>> per_repeat_accuracy;
    std::map<Method, MatrixI> confusion;  // summed over repeats
    double mean_snr_noisy_db = 0.0;       // only meaningful when noise was injected
    double mean_rmse_noisy = 0.0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

struct ExperimentReport {
    SweepConfig config;
    std::vector<SweepCell> cells;
};

/// Grid experiment over one axis. Every (cell, repeat) job derives its own
/// seed from the master seed, so cells are reproducible in isolation and the
/// parallel schedule cannot change the numbers. Infeasible cells are recorded
/// as skipped and the run continues.
ExperimentReport sweep(const LabeledDataset& ds, const Hyperparams& base, const SweepConfig& cfg);

}  // namespace rfddl
