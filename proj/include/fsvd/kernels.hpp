#pragma once

// Inner-loop kernels. Every kernel has a scalar reference implementation and
// may have SIMD variants; one variant set is selected at process start (CPU
// detection, overridable via FSVD_KERNELS=scalar|avx2) and stays fixed so a
// run is internally bit-reproducible.
//
// Contract required by the packed-projection and replay paths: gemv treats
// output columns independently and accumulates over the input dimension in
// index order, so the bits of column j depend only on x and column j of A,
// never on n or on which lane j lands in.

#include <cstddef>
#include <span>

namespace fsvd::kern {

template <typename T>
struct Ops {
    // y = x . A with A row-major (m x n); y is zero-initialized first.
    void (*gemv)(T* y, const T* x, const T* a, size_t m, size_t n);
    T (*dot)(const T* a, const T* b, size_t n);
    // y += alpha * x
    void (*axpy)(T* y, T alpha, const T* x, size_t n);
    // y *= alpha
    void (*scal)(T* y, T alpha, size_t n);
    // y += x
    void (*add)(T* y, const T* x, size_t n);
    // Givens rotation of two rows: p' = c*p - s*q, q' = s*p + c*q
    void (*rot)(T* p, T* q, T c, T s, size_t n);
    // y_i = x_i / sqrt(mean(x^2) + eps) * gamma_i, accumulation in T
    void (*rmsnorm)(T* y, const T* x, const T* gamma, size_t n, T eps);
    // y_i = silu(gate_i) * up_i
    void (*silu_mul)(T* y, const T* gate, const T* up, size_t n);
};

struct Variant {
    const char* name;
    const Ops<float>* f32;
    const Ops<double>* f64;
};

// All variants compiled into this binary and usable on this CPU; the scalar
// reference is always first.
std::span<const Variant> variants();

// The selected variant (set once on first use).
const Variant& active();
// Test hook: override the selected variant by name. Returns false if unknown.
bool force_variant(const char* name);

template <typename T>
const Ops<T>& ops();

template <>
inline const Ops<float>& ops<float>() {
    return *active().f32;
}
template <>
inline const Ops<double>& ops<double>() {
    return *active().f64;
}

}  // namespace fsvd::kern
