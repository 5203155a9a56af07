#include "rfddl/data_model.hpp"

#include "rfddl/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <numeric>

namespace rfddl {

void LabeledDataset::validate() const {
    if (features.rows() < 1) throw InputError("dataset needs at least one feature dimension");
    if (features.cols() < 2) throw InputError("dataset needs at least two samples");
    if (static_cast<Eigen::Index>(labels.size()) != features.cols())
        throw InputError("label count does not match sample count");
    if (num_classes < 1) throw InputError("class count must be positive");
    if (!features.allFinite()) throw InputError("dataset contains non-finite entries");
    std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
    for (int l : labels) {
        if (l < 0 || l >= num_classes) throw InputError("label " + std::to_string(l) + " out of range");
        seen[static_cast<std::size_t>(l)] = true;
    }
    for (int c = 0; c < num_classes; ++c)
        if (!seen[static_cast<std::size_t>(c)])
            throw InputError("class " + std::to_string(c) + " has no samples");
}

CenteringOperator::CenteringOperator(Eigen::Index n) : n_(n) {
    if (n < 1) throw InputError("centering operator dimension must be positive");
}

Matrix CenteringOperator::apply(const Matrix& a) const {
    if (a.cols() != n_)
        throw InputError("centering dimension mismatch: " + std::to_string(a.cols()) +
                         " columns vs operator size " + std::to_string(n_));
    return centered(a);
}

Matrix CenteringOperator::materialize() const {
    Matrix he = Matrix::Identity(n_, n_);
    he.array() -= 1.0 / static_cast<double>(n_);
    return he;
}

Matrix build_label_matrix(const std::vector<int>& labels, int num_classes) {
    if (labels.empty()) throw InputError("empty label vector");
    if (num_classes < 1) throw InputError("class count must be positive");
    Matrix h = Matrix::Zero(num_classes, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int l = labels[i];
        if (l < 0 || l >= num_classes)
            throw InputError("label " + std::to_string(l) + " out of range for " +
                             std::to_string(num_classes) + " classes");
        h(l, static_cast<Eigen::Index>(i)) = 1.0;
    }
    return h;
}

Matrix build_indicator_codes(const std::vector<int>& sample_labels,
                             const std::vector<int>& atom_labels) {
    if (sample_labels.empty() || atom_labels.empty())
        throw InputError("indicator codes need non-empty label vectors");
    Matrix q = Matrix::Zero(static_cast<Eigen::Index>(atom_labels.size()),
                            static_cast<Eigen::Index>(sample_labels.size()));
    for (std::size_t k = 0; k < atom_labels.size(); ++k)
        for (std::size_t i = 0; i < sample_labels.size(); ++i)
            if (atom_labels[k] == sample_labels[i])
                q(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = 1.0;
    return q;
}

Matrix inject_noise(const Matrix& x, double variance, std::uint64_t seed) {
    if (variance < 0.0) throw InputError("noise variance must be nonnegative");
    if (variance == 0.0) return x;
    return kernels::inject_noise(x, variance, seed);
}

std::pair<LabeledDataset, LabeledDataset> split_per_class(const LabeledDataset& ds,
                                                          int train_per_class,
                                                          std::uint64_t seed) {
    ds.validate();
    if (train_per_class < 1) throw InputError("train_per_class must be positive");

    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (Eigen::Index i = 0; i < ds.size(); ++i)
        by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);

    std::vector<Eigen::Index> train_idx;
    std::vector<Eigen::Index> test_idx;
    for (int c = 0; c < ds.num_classes; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        if (static_cast<int>(idx.size()) <= train_per_class)
            throw InputError("class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                             " samples, need more than " + std::to_string(train_per_class));
        Rng rng(derive_seed(seed, 0x5eedu, static_cast<std::uint64_t>(c)));
        // Fisher-Yates over this class's indices.
        for (std::size_t i = idx.size() - 1; i > 0; --i)
            std::swap(idx[i], idx[static_cast<std::size_t>(rng.below(i + 1))]);
        for (std::size_t i = 0; i < idx.size(); ++i)
            (static_cast<int>(i) < train_per_class ? train_idx : test_idx).push_back(idx[i]);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    auto take = [&](const std::vector<Eigen::Index>& idx) {
        LabeledDataset out;
        out.num_classes = ds.num_classes;
        out.features.resize(ds.dim(), static_cast<Eigen::Index>(idx.size()));
        out.labels.reserve(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            out.features.col(static_cast<Eigen::Index>(i)) = ds.features.col(idx[i]);
            out.labels.push_back(ds.labels[static_cast<std::size_t>(idx[i])]);
        }
        return out;
    };
    return {take(train_idx), take(test_idx)};
}

LabeledDataset synth_blobs(const SyntheticSpec& spec) {
    if (spec.num_classes < 1) throw InputError("need at least one class");
    if (spec.samples_per_class < 1) throw InputError("need at least one sample per class");
    if (spec.centroid_separation < 0.0) throw InputError("separation must be nonnegative");
    if (spec.within_class_std <= 0.0) throw InputError("within-class std must be positive");
    if (spec.dim < spec.num_classes)
        throw InputError("blob generator needs dim >= num_classes to place equidistant centroids");

    const int c = spec.num_classes;
    const Eigen::Index n = spec.dim;

    // Scaled orthogonal frame: ||s*e_i - s*e_j|| = separation for s = sep/sqrt(2),
    // then a seeded random rotation to make the geometry generic.
    Matrix centroids = Matrix::Zero(n, c);
    const double s = spec.centroid_separation / std::sqrt(2.0);
    for (int k = 0; k < c; ++k) centroids(k, k) = s;

    Rng rot_rng(derive_seed(spec.seed, 0xb10b5u, 1));
    Matrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rot_rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix rot = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
        if (r(j, j) < 0.0) rot.col(j) = -rot.col(j);
    centroids = rot * centroids;

    LabeledDataset ds;
    ds.num_classes = c;
    ds.features.resize(n, static_cast<Eigen::Index>(c) * spec.samples_per_class);
    ds.labels.resize(static_cast<std::size_t>(c) * static_cast<std::size_t>(spec.samples_per_class));
    Eigen::Index col = 0;
    for (int k = 0; k < c; ++k) {
        Rng rng(derive_seed(spec.seed, 0xb10b5u, 2 + static_cast<std::uint64_t>(k)));
        for (int i = 0; i < spec.samples_per_class; ++i, ++col) {
            for (Eigen::Index d = 0; d < n; ++d)
                ds.features(d, col) = centroids(d, k) + spec.within_class_std * rng.normal();
            ds.labels[static_cast<std::size_t>(col)] = k;
        }
    }
    return ds;
}

namespace {

// Fill columns [have, want) of `basis` with an orthonormal completion,
// seeded deterministically.
void complete_basis(Matrix& basis, Eigen::Index have, Eigen::Index want) {
    Rng rng(0x9ca0babau);
    const Eigen::Index n = basis.rows();
    for (Eigen::Index j = have; j < want; ++j) {
        Vector v(n);
        for (int attempt = 0; attempt < 64; ++attempt) {
            for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
            for (Eigen::Index k = 0; k < j; ++k) v -= basis.col(k).dot(v) * basis.col(k);
            // Re-orthogonalize once; classic Gram-Schmidt loses digits.
            for (Eigen::Index k = 0; k < j; ++k) v -= basis.col(k).dot(v) * basis.col(k);
            const double norm = v.norm();
            if (norm > 1e-8) {
                basis.col(j) = v / norm;
                break;
            }
        }
    }
}

}  // namespace

PcaResult pca_reduce(const Matrix& x, Eigen::Index d) {
    const Eigen::Index n = x.rows();
    const Eigen::Index cols = x.cols();
    if (cols < 2) throw InputError("PCA needs at least two samples");
    if (d < 1 || d > std::min(n, cols)) throw InputError("PCA target dimension out of range");
    if (!x.allFinite()) throw InputError("PCA input contains non-finite entries");

    PcaResult out;
    out.mean = x.rowwise().mean();
    const Matrix xc = x.colwise() - out.mean;
    out.basis.resize(n, d);
    out.variances.resize(d);

    const double denom = static_cast<double>(cols - 1);
    if (n <= cols) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(xc * xc.transpose());
        if (eig.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");
        for (Eigen::Index j = 0; j < d; ++j) {
            out.basis.col(j) = eig.eigenvectors().col(n - 1 - j);
            out.variances(j) = std::max(eig.eigenvalues()(n - 1 - j), 0.0) / denom;
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(xc.transpose() * xc);
        if (eig.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");
        const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
        const double floor = std::max(scale, 1.0) * 1e-12;
        Eigen::Index good = 0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double lambda = eig.eigenvalues()(cols - 1 - j);
            out.variances(j) = std::max(lambda, 0.0) / denom;
            if (lambda > floor) {
                out.basis.col(j) = xc * eig.eigenvectors().col(cols - 1 - j) / std::sqrt(lambda);
                good = j + 1;
            }
        }
        // Rank-deficient request: pad with an arbitrary orthonormal completion
        // (captured variance is zero there anyway).
        if (good < d) complete_basis(out.basis, good, d);
    }

    out.reduced = out.basis.transpose() * xc;
    return out;
}

}  // namespace rfddl
