#include "rfddl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rfddl::kernels {

namespace {

inline void pairwise_row(const Matrix& atoms, Matrix& out, Eigen::Index i) {
    for (Eigen::Index j = i + 1; j < atoms.cols(); ++j) {
        const double d = (atoms.col(i) - atoms.col(j)).norm();
        out(i, j) = d;
        out(j, i) = d;
    }
}

inline void noise_column(const Matrix& x, Matrix& out, double stddev, std::uint64_t seed,
                         Eigen::Index j) {
    Rng rng(derive_seed(seed, 0xA015Eu, static_cast<std::uint64_t>(j)));
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = x(i, j) + stddev * rng.normal();
}

}  // namespace

Matrix pairwise_distances_serial(const Matrix& atoms) {
    Matrix out = Matrix::Zero(atoms.cols(), atoms.cols());
    for (Eigen::Index i = 0; i < atoms.cols(); ++i) pairwise_row(atoms, out, i);
    return out;
}

Matrix pairwise_distances(const Matrix& atoms) {
    const Eigen::Index k = atoms.cols();
    Matrix out = Matrix::Zero(k, k);
#pragma omp parallel for schedule(dynamic, 8)
    for (Eigen::Index i = 0; i < k; ++i) pairwise_row(atoms, out, i);
    return out;
}

Matrix inject_noise_serial(const Matrix& x, double variance, std::uint64_t seed) {
    const double stddev = std::sqrt(variance);
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) noise_column(x, out, stddev, seed, j);
    return out;
}

Matrix inject_noise(const Matrix& x, double variance, std::uint64_t seed) {
    const double stddev = std::sqrt(variance);
    Matrix out(x.rows(), x.cols());
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < x.cols(); ++j) noise_column(x, out, stddev, seed, j);
    return out;
}

Vector simplex_weights(const Vector& atom, const Matrix& neighbors) {
    const Eigen::Index k = neighbors.cols();
    if (k < 1) throw InputError("simplex weights need at least one neighbor");
    if (k == 1) return Vector::Ones(1);

    const Matrix diffs = neighbors.colwise() - atom;
    Matrix gram = diffs.transpose() * diffs;
    const double trace = gram.trace();
    const Vector uniform = Vector::Constant(k, 1.0 / static_cast<double>(k));
    if (!(trace > 0.0)) return uniform;  // all neighbors coincide with the atom
    gram.diagonal().array() += 1e-6 * trace / static_cast<double>(k);

    std::vector<bool> active(static_cast<std::size_t>(k), true);
    Eigen::Index n_active = k;
    Vector best = uniform;
    double best_obj = uniform.dot(gram * uniform);

    const int max_iter = 4 * static_cast<int>(k) + 8;
    for (int iter = 0; iter < max_iter; ++iter) {
        Matrix sub(n_active, n_active);
        std::vector<Eigen::Index> idx;
        idx.reserve(static_cast<std::size_t>(n_active));
        for (Eigen::Index i = 0; i < k; ++i)
            if (active[static_cast<std::size_t>(i)]) idx.push_back(i);
        for (Eigen::Index a = 0; a < n_active; ++a)
            for (Eigen::Index b = 0; b < n_active; ++b)
                sub(a, b) = gram(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);

        Vector w_sub = sub.ldlt().solve(Vector::Ones(n_active));
        const double sum = w_sub.sum();
        if (!w_sub.allFinite() || std::abs(sum) < 1e-300) return uniform;
        w_sub /= sum;

        // Drop the most negative weight and re-solve.
        Eigen::Index worst = -1;
        double worst_val = -1e-12;
        for (Eigen::Index a = 0; a < n_active; ++a)
            if (w_sub(a) < worst_val) {
                worst_val = w_sub(a);
                worst = a;
            }
        if (worst >= 0) {
            active[static_cast<std::size_t>(idx[static_cast<std::size_t>(worst)])] = false;
            --n_active;
            if (n_active == 0) return uniform;
            continue;
        }

        Vector w = Vector::Zero(k);
        for (Eigen::Index a = 0; a < n_active; ++a)
            w(idx[static_cast<std::size_t>(a)]) = std::max(w_sub(a), 0.0);
        const double obj = w.dot(gram * w);
        if (obj < best_obj) {
            best_obj = obj;
            best = w;
        }

        // KKT: on the active set the gradient equals the equality multiplier;
        // an inactive coordinate with smaller gradient can still improve.
        const Vector grad = 2.0 * (gram * w);
        double lambda = 0.0;
        for (Eigen::Index a = 0; a < n_active; ++a) lambda += grad(idx[static_cast<std::size_t>(a)]);
        lambda /= static_cast<double>(n_active);
        const double tol = 1e-10 * (1.0 + std::abs(lambda));
        Eigen::Index enter = -1;
        double enter_val = lambda - tol;
        for (Eigen::Index i = 0; i < k; ++i)
            if (!active[static_cast<std::size_t>(i)] && grad(i) < enter_val) {
                enter_val = grad(i);
                enter = i;
            }
        if (enter < 0) return w;
        active[static_cast<std::size_t>(enter)] = true;
        ++n_active;
    }
    return best;
}

namespace {

inline void weights_row(const Matrix& atoms, const std::vector<std::vector<int>>& neighbors,
                        Matrix& out, Eigen::Index i) {
    const auto& nbr = neighbors[static_cast<std::size_t>(i)];
    Matrix cols(atoms.rows(), static_cast<Eigen::Index>(nbr.size()));
    for (std::size_t j = 0; j < nbr.size(); ++j)
        cols.col(static_cast<Eigen::Index>(j)) = atoms.col(nbr[j]);
    const Vector w = simplex_weights(atoms.col(i), cols);
    for (std::size_t j = 0; j < nbr.size(); ++j)
        out(i, nbr[j]) = std::max(w(static_cast<Eigen::Index>(j)), 0.0);
}

}  // namespace

Matrix batch_simplex_weights_serial(const Matrix& atoms,
                                    const std::vector<std::vector<int>>& neighbors) {
    Matrix out = Matrix::Zero(atoms.cols(), atoms.cols());
    for (Eigen::Index i = 0; i < atoms.cols(); ++i) weights_row(atoms, neighbors, out, i);
    return out;
}

Matrix batch_simplex_weights(const Matrix& atoms,
                             const std::vector<std::vector<int>>& neighbors) {
    Matrix out = Matrix::Zero(atoms.cols(), atoms.cols());
#pragma omp parallel for schedule(dynamic, 4)
    for (Eigen::Index i = 0; i < atoms.cols(); ++i) weights_row(atoms, neighbors, out, i);
    return out;
}

Matrix solve_columns_serial(const Eigen::LLT<Matrix>& llt, const Matrix& rhs) {
    return llt.solve(rhs);
}

Matrix solve_columns(const Eigen::LLT<Matrix>& llt, const Matrix& rhs) {
    Matrix out(rhs.rows(), rhs.cols());
    const Eigen::Index block = 64;
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index j0 = 0; j0 < rhs.cols(); j0 += block) {
        const Eigen::Index w = std::min(block, rhs.cols() - j0);
        out.middleCols(j0, w) = llt.solve(rhs.middleCols(j0, w));
    }
    return out;
}

namespace {

inline int column_argmax(const Matrix& scores, Eigen::Index j) {
    int best = 0;
    double best_val = scores(0, j);
    for (Eigen::Index i = 1; i < scores.rows(); ++i)
        if (scores(i, j) > best_val) {
            best_val = scores(i, j);
            best = static_cast<int>(i);
        }
    return best;
}

}  // namespace

std::vector<int> argmax_columns_serial(const Matrix& scores) {
    std::vector<int> out(static_cast<std::size_t>(scores.cols()));
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
        out[static_cast<std::size_t>(j)] = column_argmax(scores, j);
    return out;
}

std::vector<int> argmax_columns(const Matrix& scores) {
    std::vector<int> out(static_cast<std::size_t>(scores.cols()));
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
        out[static_cast<std::size_t>(j)] = column_argmax(scores, j);
    return out;
}

}  // namespace rfddl::kernels
