#include "rfddl/atom_graph.hpp"
#include "rfddl/kernels.hpp"

#include <CLI11.hpp>

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

namespace {

using namespace rfddl;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto elapsed = std::chrono::steady_clock::now() - start;
    return std::chrono::duration<double, std::milli>(elapsed).count() / reps;
}

void report(const char* name, const std::string& config, double serial_ms, double parallel_ms,
            double max_diff) {
    std::printf("%-24s %-28s %10.2f %10.2f %8.2fx %10.2e\n", name, config.c_str(), serial_ms,
                parallel_ms, serial_ms / parallel_ms, max_diff);
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial vs OpenMP kernel benchmark"};
    int atoms = 1200;
    int dim = 64;
    int knn = 7;
    int columns = 20000;
    int reps = 3;
    app.add_option("--atoms", atoms, "Atom count for graph kernels");
    app.add_option("--dim", dim, "Feature dimension");
    app.add_option("--knn", knn, "Neighbors per atom");
    app.add_option("--columns", columns, "Column count for batch kernels");
    app.add_option("--reps", reps, "Repetitions per measurement");
    CLI11_PARSE(app, argc, argv);

    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-24s %-28s %10s %10s %9s %10s\n", "kernel", "config", "serial ms", "omp ms",
                "speedup", "max |diff|");

    {
        const Matrix a = random_matrix(dim, atoms, 1);
        Matrix serial;
        Matrix parallel;
        const double t_s = time_ms([&] { serial = kernels::pairwise_distances_serial(a); }, reps);
        const double t_p = time_ms([&] { parallel = kernels::pairwise_distances(a); }, reps);
        report("pairwise_distances", std::to_string(atoms) + " atoms x " + std::to_string(dim),
               t_s, t_p, (serial - parallel).cwiseAbs().maxCoeff());
    }
    {
        const Matrix a = random_matrix(dim, atoms, 2);
        const Matrix d = kernels::pairwise_distances(a);
        const auto neighbors = knn_neighbors(d, knn);
        Matrix serial;
        Matrix parallel;
        const double t_s =
            time_ms([&] { serial = kernels::batch_simplex_weights_serial(a, neighbors); }, reps);
        const double t_p =
            time_ms([&] { parallel = kernels::batch_simplex_weights(a, neighbors); }, reps);
        report("batch_simplex_weights",
               std::to_string(atoms) + " atoms, k=" + std::to_string(knn), t_s, t_p,
               (serial - parallel).cwiseAbs().maxCoeff());
    }
    {
        const Matrix dict = random_matrix(dim, 80, 3);
        Matrix sys = dict.transpose() * dict;
        sys += Matrix::Identity(80, 80);
        const Eigen::LLT<Matrix> llt(sys);
        const Matrix rhs = random_matrix(80, columns, 4);
        Matrix serial;
        Matrix parallel;
        const double t_s = time_ms([&] { serial = kernels::solve_columns_serial(llt, rhs); }, reps);
        const double t_p = time_ms([&] { parallel = kernels::solve_columns(llt, rhs); }, reps);
        report("solve_columns", "80x80 system, " + std::to_string(columns) + " cols", t_s, t_p,
               (serial - parallel).cwiseAbs().maxCoeff());
    }
    {
        const Matrix x = random_matrix(512, columns, 5);
        Matrix serial;
        Matrix parallel;
        const double t_s =
            time_ms([&] { serial = kernels::inject_noise_serial(x, 25.0, 42); }, reps);
        const double t_p = time_ms([&] { parallel = kernels::inject_noise(x, 25.0, 42); }, reps);
        report("inject_noise", "512 x " + std::to_string(columns), t_s, t_p,
               (serial - parallel).cwiseAbs().maxCoeff());
    }
    {
        const Matrix scores = random_matrix(20, columns, 6);
        std::vector<int> serial;
        std::vector<int> parallel;
        const double t_s = time_ms([&] { serial = kernels::argmax_columns_serial(scores); }, reps);
        const double t_p = time_ms([&] { parallel = kernels::argmax_columns(scores); }, reps);
        double diff = 0.0;
        for (std::size_t i = 0; i < serial.size(); ++i)
            diff = std::max(diff, static_cast<double>(std::abs(serial[i] - parallel[i])));
        report("argmax_columns", "20 x " + std::to_string(columns), t_s, t_p, diff);
    }
    return 0;
}
