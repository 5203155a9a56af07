#pragma once

#include "rfddl/common.hpp"
#include "rfddl/data_model.hpp"
#include "rfddl/metrics.hpp"
#include "rfddl/solver.hpp"

#include <string>
#include <vector>

namespace rfddl::io {

enum class MatrixFormat { kCsv, kBinary };
enum class Orientation { kSamplesAsColumns, kSamplesAsRows };

// Matrix files. CSV is comma-separated doubles, one row per line. The
// binary container is magic "RFDM", u32 version, u64 rows, u64 cols, then
// row-major little-endian 64-bit floats; round trips are bit-exact.

Matrix load_matrix(const std::string& path, MatrixFormat format,
                   Orientation orientation = Orientation::kSamplesAsColumns);
void save_matrix_csv(const std::string& path, const Matrix& m);
void save_matrix_binary(const std::string& path, const Matrix& m);

/// One integer per line, zero-based class labels.
std::vector<int> load_labels(const std::string& path);
void save_labels(const std::string& path, const std::vector<int>& labels);

/// Versioned binary model container ("RFML"): hyperparameters, atom labels
/// and the four model matrices, all little-endian. Bit-exact round trips;
/// version mismatches are rejected.
void save_model(const std::string& path, const RfddlModel& model);
RfddlModel load_model(const std::string& path);

// All file writes in this module go through a temp file plus rename.
void write_text_atomic(const std::string& path, const std::string& contents);

std::string report_to_csv(const ExperimentReport& report);
std::string report_to_json(const ExperimentReport& report);
std::string denoise_to_json(const DenoiseReport& report);

}  // namespace rfddl::io
