#pragma once

#include "rfddl/common.hpp"

#include <utility>
#include <vector>

namespace rfddl {

/// Supervised locality graph over dictionary atoms. Immutable once built.
struct AtomGraph {
    int k = 0;                                // neighbors per atom
    Matrix distances;                         // K x K Euclidean distances
    Matrix refined_distances;                 // label-refined distances
    std::vector<std::vector<int>> neighbors;  // k nearest per atom, self excluded
    Matrix weights;                           // symmetrized, degree-normalized
    Matrix laplacian;                         // degree - weights
};

/// Euclidean distances between atom columns. K >= 2, finite input.
Matrix pairwise_distances(const Matrix& atoms);

/// Label-aware refinement: distances between same-class atoms shrink by a
/// factor of the global maximum while different-class distances grow by it,
/// so every atom ranks all of its class before any other class.
Matrix refine_distances(const Matrix& distances, const std::vector<int>& atom_labels);

/// Indices of the k smallest refined distances per row, self excluded,
/// ties broken toward the lower index.
std::vector<std::vector<int>> knn_neighbors(const Matrix& refined, int k);

/// Simplex-constrained reconstruction weights of one atom against its
/// neighbors: nonnegative, sum to one, minimal residual.
Vector local_weights(const Vector& atom, const Matrix& neighbor_atoms);

/// Symmetrize raw kNN weights, normalize by degree, and return the pair
/// (weights, laplacian). The Laplacian has zero row sums, nonpositive
/// off-diagonal entries, and is positive semidefinite.
std::pair<Matrix, Matrix> assemble_laplacian(const Matrix& raw_weights);

/// Full pipeline: distances -> refinement -> kNN -> weights -> Laplacian.
/// k is clamped to K-1 when the dictionary is smaller than k+1 atoms.
AtomGraph build_atom_graph(const Matrix& atoms, const std::vector<int>& atom_labels, int k);

}  // namespace rfddl
