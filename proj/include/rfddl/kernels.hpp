#pragma once

#include "rfddl/common.hpp"

#include <Eigen/Cholesky>

#include <cstdint>
#include <vector>

namespace rfddl::kernels {

// Data-parallel inner loops. Each kernel has a `_serial` reference used by
// the tests and benchmarks; the unsuffixed entry point is the OpenMP
// version the library calls. Both compute identical arithmetic per output
// element, so results match bit for bit at any thread count.

/// Euclidean distances between the columns of `atoms`; K x K, symmetric,
/// zero diagonal.
Matrix pairwise_distances(const Matrix& atoms);
Matrix pairwise_distances_serial(const Matrix& atoms);

/// X + sqrt(variance) * Z with one seed-derived normal stream per column.
Matrix inject_noise(const Matrix& x, double variance, std::uint64_t seed);
Matrix inject_noise_serial(const Matrix& x, double variance, std::uint64_t seed);

/// Minimize ||atom - neighbors * w||^2 over the probability simplex
/// (w >= 0, sum w = 1). Active-set solve on the regularized local Gram
/// matrix with KKT re-entry checks.
Vector simplex_weights(const Vector& atom, const Matrix& neighbors);

/// Row i of the result holds simplex_weights for atom i against its
/// neighbor list, scattered into a K x K matrix (negatives clamped at 0).
Matrix batch_simplex_weights(const Matrix& atoms,
                             const std::vector<std::vector<int>>& neighbors);
Matrix batch_simplex_weights_serial(const Matrix& atoms,
                                    const std::vector<std::vector<int>>& neighbors);

/// llt.solve(rhs) with the columns partitioned across threads.
Matrix solve_columns(const Eigen::LLT<Matrix>& llt, const Matrix& rhs);
Matrix solve_columns_serial(const Eigen::LLT<Matrix>& llt, const Matrix& rhs);

/// Per-column argmax, lowest index on ties.
std::vector<int> argmax_columns(const Matrix& scores);
std::vector<int> argmax_columns_serial(const Matrix& scores);

}  // namespace rfddl::kernels
