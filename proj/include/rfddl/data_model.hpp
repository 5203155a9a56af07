#pragma once

#include "rfddl/common.hpp"

#include <cstdint>
#include <vector>

namespace rfddl {

/// Dense labeled dataset. Columns of `features` are samples.
struct LabeledDataset {
    Matrix features;          // n_features x n_samples
    std::vector<int> labels;  // length n_samples, values in [0, num_classes)
    int num_classes = 0;

    Eigen::Index dim() const { return features.rows(); }
    Eigen::Index size() const { return features.cols(); }

    /// Throws InputError unless every invariant holds: labels in range,
    /// every class present, at least two samples, finite entries.
    void validate() const;
};

/// The projector I - ee^T/N applied from the right; removes row means.
class CenteringOperator {
public:
    explicit CenteringOperator(Eigen::Index n);

    Eigen::Index dim() const { return n_; }

    /// A * H_e computed as row-mean subtraction, O(mN).
    Matrix apply(const Matrix& a) const;

    /// The explicit N x N projector; test and diagnostic use only.
    Matrix materialize() const;

private:
    Eigen::Index n_;
};

struct SyntheticSpec {
    int num_classes = 3;
    int dim = 16;
    int samples_per_class = 50;
    double centroid_separation = 10.0;
    double within_class_std = 1.0;
    std::uint64_t seed = 0;
};

/// One-hot label matrix, classes x samples.
Matrix build_label_matrix(const std::vector<int>& labels, int num_classes);

/// Indicator codes: entry (k, i) is 1 when atom k and sample i share a label.
Matrix build_indicator_codes(const std::vector<int>& sample_labels,
                             const std::vector<int>& atom_labels);

/// Additive Gaussian corruption X + sqrt(variance) * Z. Each column draws
/// from its own seed-derived stream, so output is identical no matter how
/// the columns are scheduled across threads.
Matrix inject_noise(const Matrix& x, double variance, std::uint64_t seed);

/// Deterministic per-class split: exactly `train_per_class` samples of each
/// class go to the training set, the rest to the test set.
std::pair<LabeledDataset, LabeledDataset> split_per_class(const LabeledDataset& ds,
                                                          int train_per_class,
                                                          std::uint64_t seed);

/// Isotropic Gaussian clusters with centroids at mutual distance exactly
/// `centroid_separation` (a randomly rotated orthogonal frame). Requires
/// dim >= num_classes.
LabeledDataset synth_blobs(const SyntheticSpec& spec);

struct PcaResult {
    Matrix reduced;    // d x N, projections of the centered data
    Matrix basis;      // n x d, orthonormal principal directions
    Vector mean;       // n, feature means
    Vector variances;  // d, captured variances, non-increasing
};

/// Principal component projection onto the top-d directions. Works through
/// the spectral decomposition of whichever Gram matrix (n x n or N x N) is
/// smaller.
PcaResult pca_reduce(const Matrix& x, Eigen::Index d);

}  // namespace rfddl
