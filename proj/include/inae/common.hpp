#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <algorithm>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace inae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

namespace detail {

inline std::string short_number(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

} // namespace detail

/// Raised on precondition violations (bad shapes, out-of-range options).
struct invalid_argument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised by file parsers; `offset` is the byte (or line) where parsing failed.
struct format_error : std::runtime_error {
    format_error(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"), offset(offset) {}

    std::size_t offset;
};

/// An iterative solver stopped before reaching its tolerance.
struct convergence_error : std::runtime_error {
    convergence_error(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + detail::short_number(residual) + ")"), residual(residual) {}

    double residual;
};

/// Training produced a non-finite loss and the divergence guard gave up.
struct training_error : std::runtime_error {
    training_error(const std::string& what, std::size_t epoch, double learning_rate)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ", learning rate "
                             + detail::short_number(learning_rate) + ")"),
          epoch(epoch), learning_rate(learning_rate) {}

    std::size_t epoch;
    double learning_rate;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw invalid_argument(message);
    }
}

inline std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// splitmix64 finalizer: turns (seed, stream) pairs into well-mixed engine seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Independent, reproducible random stream for a given purpose.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64{mix_seed(seed, stream)};
}

// Stream ids keep the RNG consumers of one run independent of each other.
enum stream_id : std::uint64_t {
    stream_noise = 1,
    stream_corruption = 1000,
    stream_init = 2,
    stream_shuffle = 3,
    stream_svm = 4,
    stream_power = 5,
    stream_split = 6,
};

inline std::size_t thread_cap() {
    if (const char* env = std::getenv("INAE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

} // namespace detail

} // namespace inae
