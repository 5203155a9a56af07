#include "rfddl/kernels.hpp"

#include "rfddl/atom_graph.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace rfddl;

// The OpenMP kernels must agree with their serial references bit for bit:
// every output element is computed by exactly one thread with identical
// arithmetic, so any drift is a bug.

TEST_CASE("serial and parallel kernels agree exactly") {
    SUBCASE("pairwise distances") {
        const Matrix atoms = oracles::random_matrix(16, 120, 7);
        const Matrix a = kernels::pairwise_distances_serial(atoms);
        const Matrix b = kernels::pairwise_distances(atoms);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("noise injection") {
        const Matrix x = oracles::random_matrix(32, 200, 9);
        const Matrix a = kernels::inject_noise_serial(x, 3.5, 1234);
        const Matrix b = kernels::inject_noise(x, 3.5, 1234);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("batch simplex weights") {
        const Matrix atoms = oracles::random_matrix(10, 60, 11);
        const Matrix d = kernels::pairwise_distances(atoms);
        const auto neighbors = knn_neighbors(d, 5);
        const Matrix a = kernels::batch_simplex_weights_serial(atoms, neighbors);
        const Matrix b = kernels::batch_simplex_weights(atoms, neighbors);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("column solves") {
        const Matrix basis = oracles::random_matrix(24, 40, 13);
        Matrix sys = basis.transpose() * basis;
        sys += Matrix::Identity(40, 40);
        const Eigen::LLT<Matrix> llt(sys);
        const Matrix rhs = oracles::random_matrix(40, 300, 15);
        const Matrix a = kernels::solve_columns_serial(llt, rhs);
        const Matrix b = kernels::solve_columns(llt, rhs);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("column argmax") {
        const Matrix scores = oracles::random_matrix(8, 500, 17);
        CHECK(kernels::argmax_columns_serial(scores) == kernels::argmax_columns(scores));
    }
}

TEST_CASE("simplex weights solve the constrained problem") {
    SUBCASE("exact reconstruction by one neighbor") {
        const Matrix neighbors = oracles::random_matrix(6, 4, 19);
        const Vector w = kernels::simplex_weights(neighbors.col(0), neighbors);
        CHECK(w(0) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("midpoint of two neighbors") {
        Matrix neighbors(3, 2);
        neighbors.col(0) << 1, 0, 0;
        neighbors.col(1) << 0, 1, 0;
        const Vector atom = 0.5 * (neighbors.col(0) + neighbors.col(1));
        const Vector w = kernels::simplex_weights(atom, neighbors);
        CHECK(w(0) == doctest::Approx(0.5).epsilon(1e-8));
        CHECK(w(1) == doctest::Approx(0.5).epsilon(1e-8));
    }
    SUBCASE("single neighbor gets weight one") {
        const Vector atom = Vector::Ones(4);
        const Matrix neighbors = oracles::random_matrix(4, 1, 21);
        const Vector w = kernels::simplex_weights(atom, neighbors);
        CHECK(w.size() == 1);
        CHECK(w(0) == 1.0);
    }
    SUBCASE("coincident neighbors fall back to uniform") {
        const Vector atom = Vector::Zero(3);
        const Matrix neighbors = Matrix::Zero(3, 4);
        const Vector w = kernels::simplex_weights(atom, neighbors);
        CHECK((w - Vector::Constant(4, 0.25)).cwiseAbs().maxCoeff() < 1e-15);
    }
}
