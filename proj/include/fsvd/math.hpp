#pragma once

// Transformer math primitives on top of the kernel layer: RMSNorm, rotary
// position embedding, streaming softmax attention, greedy argmax.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "fsvd/kernels.hpp"
#include "fsvd/tensor.hpp"

namespace fsvd {

template <typename T>
std::vector<T> rmsnorm(std::span<const T> x, std::span<const T> gamma, T eps) {
    if (x.size() != gamma.size()) {
        throw ShapeError("rmsnorm: x and gamma lengths differ");
    }
    if (x.empty()) throw ShapeError("rmsnorm: empty input");
    std::vector<T> y(x.size());
    kern::ops<T>().rmsnorm(y.data(), x.data(), gamma.data(), x.size(), eps);
    return y;
}

// In-place rotation of one head vector. Pair i of (v[2i], v[2i+1]) rotates by
// position * theta_base^(-2i/d). Angles are evaluated in double for both
// dtypes; the rotation arithmetic runs in T.
template <typename T>
void rope_inplace(T* v, size_t d, double position, double theta_base) {
    if (d % 2 != 0) throw ShapeError("rope: head dimension must be even");
    for (size_t i = 0; i < d / 2; ++i) {
        const double freq = std::pow(theta_base, -2.0 * static_cast<double>(i) /
                                                     static_cast<double>(d));
        const double angle = position * freq;
        const T c = static_cast<T>(std::cos(angle));
        const T s = static_cast<T>(std::sin(angle));
        const T x0 = v[2 * i];
        const T x1 = v[2 * i + 1];
        v[2 * i] = x0 * c - x1 * s;
        v[2 * i + 1] = x0 * s + x1 * c;
    }
}

template <typename T>
std::vector<T> rope_apply(std::span<const T> v, double position, double theta_base) {
    std::vector<T> out(v.begin(), v.end());
    rope_inplace(out.data(), out.size(), position, theta_base);
    return out;
}

// Streaming softmax attention accumulator (running max m, normalizer l,
// unnormalized value accumulator acc). Feeding the history in any block
// partition yields the same result as one naive softmax pass.
template <typename T>
struct OnlineAttend {
    T m = -std::numeric_limits<T>::infinity();
    T l = T(0);
    T* acc = nullptr;
    size_t d_head = 0;
    size_t seen = 0;

    void reset(T* acc_buf, size_t d) {
        m = -std::numeric_limits<T>::infinity();
        l = T(0);
        acc = acc_buf;
        d_head = d;
        seen = 0;
        for (size_t i = 0; i < d; ++i) acc[i] = T(0);
    }

    // One block of `rows` keys/values laid out contiguously with stride d_head.
    // `scores` is caller scratch of at least `rows` elements.
    void update(const T* q, const T* k_rows, const T* v_rows, size_t rows, T scale,
                T* scores) {
        if (rows == 0) return;
        const auto& ops = kern::ops<T>();
        T block_max = -std::numeric_limits<T>::infinity();
        for (size_t j = 0; j < rows; ++j) {
            const T s = ops.dot(q, k_rows + j * d_head, d_head) * scale;
            scores[j] = s;
            if (s > block_max) block_max = s;
        }
        const T m_new = m > block_max ? m : block_max;
        const T rescale = std::exp(m - m_new);
        l *= rescale;
        ops.scal(acc, rescale, d_head);
        for (size_t j = 0; j < rows; ++j) {
            const T w = std::exp(scores[j] - m_new);
            l += w;
            ops.axpy(acc, w, v_rows + j * d_head, d_head);
        }
        m = m_new;
        seen += rows;
    }

    void finish(T* out) const {
        for (size_t i = 0; i < d_head; ++i) out[i] = acc[i] / l;
    }
};

// Block-list entry point for exact attention of one query against a history.
template <typename T>
std::vector<T> online_softmax_attend(
    std::span<const T> q,
    std::span<const std::pair<Tensor2D<T>, Tensor2D<T>>> kv_blocks, T scale) {
    size_t total = 0;
    for (const auto& [k, v] : kv_blocks) {
        if (k.cols != q.size() || v.cols != q.size() || k.rows != v.rows) {
            throw ShapeError("online_softmax_attend: block shape mismatch");
        }
        total += k.rows;
    }
    if (total == 0) throw ShapeError("online_softmax_attend: empty history");

    std::vector<T> acc(q.size());
    std::vector<T> scores;
    OnlineAttend<T> state;
    state.reset(acc.data(), q.size());
    for (const auto& [k, v] : kv_blocks) {
        scores.resize(k.rows);
        state.update(q.data(), k.data.data(), v.data.data(), k.rows, scale,
                     scores.data());
    }
    std::vector<T> out(q.size());
    state.finish(out.data());
    return out;
}

// Index of the maximum; ties break toward the smallest index.
template <typename T>
size_t argmax_greedy(std::span<const T> logits) {
    if (logits.empty()) throw ShapeError("argmax_greedy: empty logits");
    size_t best = 0;
    for (size_t i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[best]) best = i;
    }
    return best;
}

}  // namespace fsvd
