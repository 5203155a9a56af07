#pragma once

#include "rfddl/common.hpp"
#include "rfddl/data_model.hpp"
#include "rfddl/solver.hpp"

#include <vector>

namespace rfddl {

/// Learned linear map from feature space straight to code space.
struct CodeExtractor {
    Matrix projection;  // K x n
};

struct Prediction {
    Matrix soft;            // num_classes x N_test score matrix
    std::vector<int> hard;  // per-column argmax, lowest index on ties
};

/// Ridge codes against the clean dictionary: (D^T D + I)^{-1} D^T X_test.
/// Column-separable, so batches and single samples agree exactly.
Matrix codes_by_reconstruction(const RfddlModel& model, const Matrix& x_test);

/// Fit the projection G so that the graph-embedded G X approximates the
/// training codes, with a trace-scaled ridge keeping X X^T invertible.
CodeExtractor learn_code_extractor(const RfddlModel& model, const Matrix& x_train);

/// Soft scores classifier * codes and their per-column argmax.
Prediction predict_from_codes(const RfddlModel& model, const Matrix& codes);

/// Reconstruction-based classification.
Prediction classify_r(const RfddlModel& model, const Matrix& x_test);

/// Embedding-based classification. With apply_laplacian the codes are passed
/// through the atom graph before scoring, mirroring how the classifier saw
/// codes during training; default scores the raw extracted codes.
Prediction classify_e(const RfddlModel& model, const CodeExtractor& extractor,
                      const Matrix& x_test, bool apply_laplacian = false);

/// One-vs-all ridge regression on labels; the comparison baseline.
Matrix baseline_ridge(const LabeledDataset& train, double eps);

/// Argmax classification with an arbitrary linear scorer (c x n).
Prediction predict_linear(const Matrix& scorer, const Matrix& x);

}  // namespace rfddl
