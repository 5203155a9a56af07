#include "rfddl/atom_graph.hpp"

#include "rfddl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rfddl {

Matrix pairwise_distances(const Matrix& atoms) {
    if (atoms.cols() < 2) throw InputError("pairwise distances need at least two atoms");
    if (!atoms.allFinite()) throw InputError("atoms contain non-finite entries");
    return kernels::pairwise_distances(atoms);
}

Matrix refine_distances(const Matrix& distances, const std::vector<int>& atom_labels) {
    const Eigen::Index k = distances.rows();
    if (distances.cols() != k) throw InputError("distance matrix must be square");
    if (static_cast<Eigen::Index>(atom_labels.size()) != k)
        throw InputError("atom label count does not match distance matrix");
    const double max_dist = distances.maxCoeff();
    if (!(max_dist > 0.0))
        throw DegenerateInputError("all atoms coincide; distances carry no ranking information");

    Matrix refined(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            refined(i, j) = atom_labels[static_cast<std::size_t>(i)] ==
                                    atom_labels[static_cast<std::size_t>(j)]
                                ? distances(i, j) / max_dist
                                : distances(i, j) + max_dist;
    return refined;
}

std::vector<std::vector<int>> knn_neighbors(const Matrix& refined, int k) {
    const Eigen::Index n = refined.rows();
    if (refined.cols() != n) throw InputError("distance matrix must be square");
    if (k < 1 || k > static_cast<int>(n) - 1)
        throw InputError("neighbor count " + std::to_string(k) + " out of range for " +
                         std::to_string(n) + " atoms");

    std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<int> order;
        order.reserve(static_cast<std::size_t>(n) - 1);
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) order.push_back(static_cast<int>(j));
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
            const double da = refined(i, a);
            const double db = refined(i, b);
            return da < db || (da == db && a < b);
        });
        order.resize(static_cast<std::size_t>(k));
        out[static_cast<std::size_t>(i)] = std::move(order);
    }
    return out;
}

Vector local_weights(const Vector& atom, const Matrix& neighbor_atoms) {
    if (neighbor_atoms.rows() != atom.size())
        throw InputError("neighbor dimension does not match atom dimension");
    return kernels::simplex_weights(atom, neighbor_atoms);
}

std::pair<Matrix, Matrix> assemble_laplacian(const Matrix& raw_weights) {
    const Eigen::Index k = raw_weights.rows();
    if (raw_weights.cols() != k) throw InputError("weight matrix must be square");

    Matrix m = 0.5 * (raw_weights + raw_weights.transpose());
    Vector degree = m.rowwise().sum();
    // Floor keeps the inverse square root finite if a row vanished.
    Vector inv_sqrt = degree.cwiseMax(1e-12).cwiseSqrt().cwiseInverse();
    m = inv_sqrt.asDiagonal() * m * inv_sqrt.asDiagonal();
    m = 0.5 * (m + m.transpose());  // exact symmetry after the scaling

    Matrix laplacian = -m;
    for (Eigen::Index i = 0; i < k; ++i) laplacian(i, i) += m.row(i).sum();
    return {std::move(m), std::move(laplacian)};
}

AtomGraph build_atom_graph(const Matrix& atoms, const std::vector<int>& atom_labels, int k) {
    if (atoms.cols() < 2) throw InputError("atom graph needs at least two atoms");
    if (static_cast<Eigen::Index>(atom_labels.size()) != atoms.cols())
        throw InputError("atom label count does not match atom count");

    AtomGraph graph;
    graph.k = std::min<int>(k, static_cast<int>(atoms.cols()) - 1);
    if (graph.k < 1) throw InputError("neighbor count must be positive");
    graph.distances = pairwise_distances(atoms);
    graph.refined_distances = refine_distances(graph.distances, atom_labels);
    graph.neighbors = knn_neighbors(graph.refined_distances, graph.k);
    const Matrix raw = kernels::batch_simplex_weights(atoms, graph.neighbors);
    auto [weights, laplacian] = assemble_laplacian(raw);
    graph.weights = std::move(weights);
    graph.laplacian = std::move(laplacian);
    return graph;
}

}  // namespace rfddl
