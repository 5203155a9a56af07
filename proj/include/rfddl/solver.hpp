#pragma once

#include "rfddl/common.hpp"
#include "rfddl/data_model.hpp"

#include <cstdint>
#include <vector>

namespace rfddl {

enum class DictInit {
    kSamples,  // draw atoms_per_class training columns per class
    kRandom,   // seeded Gaussian atoms, labels assigned round-robin
};

struct Hyperparams {
    double alpha = 1e2;        // weight of the column-sparse error penalties
    double beta = 1e4;         // weight of code consistency + code regularization
    double gamma = 1e8;        // weight of the classification term
    int atoms_per_class = 5;   // dictionary size is atoms_per_class * num_classes
    int k_neighbors = 7;       // atom-graph neighbor count (clamped to K-1)
    int max_iter = 200;
    double tol = 1e-3;         // stop when |obj_t - obj_{t+1}| < tol
    double jitter = 1e-8;      // relative diagonal loading for the D/S solves
    double irls_floor = 1e-8;  // column-norm floor inside the reweighting
    std::uint64_t seed = 0;
    DictInit dict_init = DictInit::kSamples;

    void validate() const;
};

/// All trainable matrices of one run plus the reweighting diagonals and the
/// objective trace. Owned by exactly one training run.
struct TrainState {
    Matrix dictionary;        // n x K
    Matrix codes;             // K x N
    Matrix data_error;        // n x N, column-sparse part of the data
    Matrix atom_error;        // n x K, column-sparse part of the dictionary
    Matrix classifier;        // c x K
    Matrix laplacian;         // K x K atom-graph Laplacian
    Vector irls_data;         // N, reweighting diagonal for data_error columns
    Vector irls_atom;         // K, for atom_error columns
    Vector irls_classifier;   // K, for classifier columns
    std::vector<int> atom_labels;
    int iter = 0;
    std::vector<double> objective_history;
    Hyperparams params;

    Matrix clean_data(const Matrix& x) const { return x - data_error; }
    Matrix clean_dictionary() const { return dictionary - atom_error; }
};

/// Trained artifacts needed at inference time.
struct RfddlModel {
    Matrix dictionary;  // recovered clean atoms, n x K
    Matrix codes;       // K x N training codes
    Matrix laplacian;   // K x K
    Matrix classifier;  // c x K
    std::vector<int> atom_labels;
    Hyperparams params;

    int num_classes() const { return static_cast<int>(classifier.rows()); }
};

struct TrainResult {
    RfddlModel model;
    TrainState state;  // final state; state.objective_history is the trace
    bool converged = false;
};

/// Zero errors and classifier, identity reweighting diagonals, seeded codes,
/// per-class sampled (or random) dictionary, graph built from it.
TrainState init_state(const LabeledDataset& train, const Hyperparams& hp);

/// The exact training objective: centered reconstruction, code-consistency
/// and classification residuals plus the true column-norm-sum penalties
/// (not their reweighted surrogates).
double objective(const TrainState& st, const Matrix& x, const Matrix& q, const Matrix& h);

// Closed-form block updates. Each returns the new block given everything
// else in the state; none of them mutates the state.
Matrix update_dictionary(const TrainState& st, const Matrix& x);
Matrix update_codes(const TrainState& st, const Matrix& x, const Matrix& q, const Matrix& h);
Matrix update_atom_error(const TrainState& st, const Matrix& x);
Matrix update_data_error(const TrainState& st, const Matrix& x);
Matrix update_classifier(const TrainState& st, const Matrix& h);

struct IrlsDiagonals {
    Vector data;
    Vector atom;
    Vector classifier;
};
IrlsDiagonals update_irls_diagonals(const TrainState& st);

/// Per-row bias vectors that a flexible residual would carry; the centered
/// residuals used everywhere else absorb them exactly.
struct Biases {
    Vector reconstruction;  // n
    Vector code;            // K
    Vector label;           // c
};
Biases compute_biases(const TrainState& st, const Matrix& x, const Matrix& q, const Matrix& h);

/// One Gauss-Seidel sweep over the blocks: dictionary, codes, atom error,
/// data error, classifier, then the reweighting diagonals. The Laplacian is
/// not touched; callers refresh it between sweeps.
void sweep_blocks(TrainState& st, const Matrix& x, const Matrix& q, const Matrix& h);

/// Full training loop: refresh the graph from the clean dictionary, sweep
/// the blocks, evaluate the objective, stop when the objective difference
/// falls under tol or max_iter is reached.
TrainResult train(const LabeledDataset& train_set, const Hyperparams& hp);

}  // namespace rfddl
