#pragma once

// Dense row-major matrix type and the deterministic RNG used for toy-model
// initialization. Everything downstream (compression, checkpoints, runtime)
// moves data through Tensor2D.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsvd {

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};
struct RankError : std::runtime_error {
    explicit RankError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// SplitMix64. One fixed stream per seed; identical byte-level output across
// implementations, which is what makes the toy checkpoints reproducible.
struct Rng64 {
    uint64_t state = 0;

    explicit Rng64(uint64_t seed) : state(seed) {}

    uint64_t next_u64() {
        state += 0x9E3779B97F4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) from the top 53 bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [-a, a].
    double next_symmetric(double a) {
        return (2.0 * next_unit() - 1.0) * a;
    }

    // Uniform integer in [0, n).
    uint64_t next_below(uint64_t n) {
        return static_cast<uint64_t>(next_unit() * static_cast<double>(n));
    }
};

template <typename T>
struct Tensor2D {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<T> data;

    Tensor2D() = default;
    Tensor2D(size_t r, size_t c) : rows(r), cols(c), data(r * c, T(0)) {
        if (r == 0 || c == 0) {
            throw ShapeError("Tensor2D: dimensions must be positive, got " +
                             std::to_string(r) + "x" + std::to_string(c));
        }
    }
    Tensor2D(size_t r, size_t c, std::vector<T> values)
        : rows(r), cols(c), data(std::move(values)) {
        if (r == 0 || c == 0 || data.size() != r * c) {
            throw ShapeError("Tensor2D: data length does not match " +
                             std::to_string(r) + "x" + std::to_string(c));
        }
    }

    T& at(size_t i, size_t j) { return data[i * cols + j]; }
    const T& at(size_t i, size_t j) const { return data[i * cols + j]; }

    std::span<T> row(size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const T> row(size_t i) const { return {data.data() + i * cols, cols}; }

    size_t size() const { return data.size(); }
};

using Tensor2Df = Tensor2D<float>;
using Tensor2Dd = Tensor2D<double>;

// c[i][j] = sum_k a[i][k] * b[k][j], accumulated in the operand dtype.
// The k-loop runs in order for every output element, so the result is
// bit-identical to a plain triple loop.
template <typename T>
Tensor2D<T> matmul(const Tensor2D<T>& a, const Tensor2D<T>& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: inner dimensions differ, " +
                         std::to_string(a.cols) + " vs " + std::to_string(b.rows));
    }
    Tensor2D<T> c(a.rows, b.cols);
    for (size_t i = 0; i < a.rows; ++i) {
        const T* arow = a.data.data() + i * a.cols;
        T* crow = c.data.data() + i * b.cols;
        for (size_t k = 0; k < a.cols; ++k) {
            const T aik = arow[k];
            const T* brow = b.data.data() + k * b.cols;
            for (size_t j = 0; j < b.cols; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
    return c;
}

template <typename T>
Tensor2D<T> transpose(const Tensor2D<T>& a) {
    Tensor2D<T> t(a.cols, a.rows);
    for (size_t i = 0; i < a.rows; ++i) {
        for (size_t j = 0; j < a.cols; ++j) {
            t.at(j, i) = a.at(i, j);
        }
    }
    return t;
}

template <typename T>
double frobenius_norm(const Tensor2D<T>& a) {
    double s = 0.0;
    for (const T& v : a.data) s += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(s);
}

template <typename T>
double frobenius_diff(const Tensor2D<T>& a, const Tensor2D<T>& b) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw ShapeError("frobenius_diff: shape mismatch");
    }
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

template <typename T>
Tensor2D<float> to_f32(const Tensor2D<T>& a) {
    Tensor2D<float> out(a.rows, a.cols);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = static_cast<float>(a.data[i]);
    return out;
}

template <typename T>
Tensor2D<T> from_f32(const Tensor2D<float>& a) {
    Tensor2D<T> out(a.rows, a.cols);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = static_cast<T>(a.data[i]);
    return out;
}

}  // namespace fsvd
