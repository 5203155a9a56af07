#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace rfddl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixI = Eigen::MatrixXi;

/// Invalid caller input (bad dimensions, out-of-range labels, ...).
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& msg) : std::invalid_argument("input error: " + msg) {}
};

/// Structurally valid input that is degenerate for the requested operation
/// (e.g. all atoms identical, so distances carry no information).
class DegenerateInputError : public InputError {
public:
    explicit DegenerateInputError(const std::string& msg) : InputError("degenerate: " + msg) {}
};

/// A computation produced non-finite values or an unsolvable system.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error("numerical error: " + msg) {}
};

/// Malformed file contents (bad magic, ragged CSV, truncated payload, ...).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error("format error: " + msg) {}
};

/**
 * Seedable PRNG with fully specified output.
 *
 * std::mt19937_64 is bit-exact across conforming implementations; the
 * uniform and normal transforms below avoid std::*_distribution (whose
 * output is implementation-defined), so identical seeds give identical
 * streams on every platform. Normals come from Box-Muller.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate (Box-Muller, pairs cached).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) { return gen_() % n; }

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// splitmix64 finalizer; the standard 64-bit avalanche mix.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derive an independent child seed from a master seed and up to two tags.
/// Used so parallel jobs (sweep cells, noise columns) get reproducible,
/// order-independent streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag_a, std::uint64_t tag_b = 0) {
    return mix64(mix64(master ^ mix64(tag_a)) ^ mix64(tag_b + 0x51ED270B1A791DEDull));
}

/// A * H_e with H_e = I - ee^T/N, i.e. subtract each row's mean.
/// Kept as a rank-1 update so the N x N projector is never materialized.
inline Matrix centered(const Matrix& a) {
    return a.colwise() - a.rowwise().mean();
}

/// Sum of column Euclidean norms (the row-sparsity-inducing matrix norm
/// used on the transposed error matrices).
inline double l21_columns(const Matrix& m) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += m.col(j).norm();
    return s;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace rfddl
