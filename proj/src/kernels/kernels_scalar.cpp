// Scalar reference kernels. These define the semantics the SIMD variants are
// tested against. Plain mul+add throughout (the build disables FP contraction,
// so the compiler cannot fuse these into fma).

#include "fsvd/kernels.hpp"

#include <cmath>

namespace fsvd::kern::detail {

template <typename T>
static void gemv_scalar(T* y, const T* x, const T* a, size_t m, size_t n) {
    for (size_t j = 0; j < n; ++j) y[j] = T(0);
    for (size_t k = 0; k < m; ++k) {
        const T xk = x[k];
        const T* arow = a + k * n;
        for (size_t j = 0; j < n; ++j) {
            y[j] += xk * arow[j];
        }
    }
}

template <typename T>
static T dot_scalar(const T* a, const T* b, size_t n) {
    T s = T(0);
    for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

template <typename T>
static void axpy_scalar(T* y, T alpha, const T* x, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
static void scal_scalar(T* y, T alpha, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] *= alpha;
}

template <typename T>
static void add_scalar(T* y, const T* x, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += x[i];
}

template <typename T>
static void rot_scalar(T* p, T* q, T c, T s, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        const T pi = p[i];
        const T qi = q[i];
        p[i] = c * pi - s * qi;
        q[i] = s * pi + c * qi;
    }
}

template <typename T>
static void rmsnorm_scalar(T* y, const T* x, const T* gamma, size_t n, T eps) {
    T ss = T(0);
    for (size_t i = 0; i < n; ++i) ss += x[i] * x[i];
    const T inv = T(1) / std::sqrt(ss / static_cast<T>(n) + eps);
    for (size_t i = 0; i < n; ++i) y[i] = x[i] * inv * gamma[i];
}

template <typename T>
static void silu_mul_scalar(T* y, const T* gate, const T* up, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        const T g = gate[i];
        y[i] = g / (T(1) + std::exp(-g)) * up[i];
    }
}

}  // namespace fsvd::kern::detail

namespace fsvd::kern {

const Ops<float> kScalarF32 = {
    detail::gemv_scalar<float>,   detail::dot_scalar<float>,
    detail::axpy_scalar<float>,   detail::scal_scalar<float>,
    detail::add_scalar<float>,    detail::rot_scalar<float>,
    detail::rmsnorm_scalar<float>, detail::silu_mul_scalar<float>,
};

const Ops<double> kScalarF64 = {
    detail::gemv_scalar<double>,   detail::dot_scalar<double>,
    detail::axpy_scalar<double>,   detail::scal_scalar<double>,
    detail::add_scalar<double>,    detail::rot_scalar<double>,
    detail::rmsnorm_scalar<double>, detail::silu_mul_scalar<double>,
};

}  // namespace fsvd::kern
