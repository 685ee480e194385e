// AVX2/FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// only entered when the CPU reports both features.
//
// gemv keeps the per-column accumulation contract: each output column is a
// single fma chain over k in index order. Scalar tails use std::fma so a
// column produces the same bits whether it lands in a vector lane or the tail.

#if defined(__x86_64__) || defined(_M_X64)

#include "kernels_tables.hpp"

#include <immintrin.h>

#include <cmath>

namespace fsvd::kern {

bool avx2_cpu_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

// ---------------------------------------------------------------- f32 ----

void gemv_avx2_f32(float* y, const float* x, const float* a, size_t m, size_t n) {
    size_t j = 0;
    for (; j + 8 <= n; j += 8) _mm256_storeu_ps(y + j, _mm256_setzero_ps());
    for (; j < n; ++j) y[j] = 0.0f;

    size_t k = 0;
    // 4 rows of A per pass to cut y load/store traffic.
    for (; k + 4 <= m; k += 4) {
        const __m256 x0 = _mm256_set1_ps(x[k + 0]);
        const __m256 x1 = _mm256_set1_ps(x[k + 1]);
        const __m256 x2 = _mm256_set1_ps(x[k + 2]);
        const __m256 x3 = _mm256_set1_ps(x[k + 3]);
        const float* r0 = a + (k + 0) * n;
        const float* r1 = a + (k + 1) * n;
        const float* r2 = a + (k + 2) * n;
        const float* r3 = a + (k + 3) * n;
        size_t c = 0;
        for (; c + 8 <= n; c += 8) {
            __m256 acc = _mm256_loadu_ps(y + c);
            acc = _mm256_fmadd_ps(x0, _mm256_loadu_ps(r0 + c), acc);
            acc = _mm256_fmadd_ps(x1, _mm256_loadu_ps(r1 + c), acc);
            acc = _mm256_fmadd_ps(x2, _mm256_loadu_ps(r2 + c), acc);
            acc = _mm256_fmadd_ps(x3, _mm256_loadu_ps(r3 + c), acc);
            _mm256_storeu_ps(y + c, acc);
        }
        for (; c < n; ++c) {
            float acc = y[c];
            acc = std::fmaf(x[k + 0], r0[c], acc);
            acc = std::fmaf(x[k + 1], r1[c], acc);
            acc = std::fmaf(x[k + 2], r2[c], acc);
            acc = std::fmaf(x[k + 3], r3[c], acc);
            y[c] = acc;
        }
    }
    for (; k < m; ++k) {
        const __m256 xk = _mm256_set1_ps(x[k]);
        const float* row = a + k * n;
        size_t c = 0;
        for (; c + 8 <= n; c += 8) {
            __m256 acc = _mm256_loadu_ps(y + c);
            acc = _mm256_fmadd_ps(xk, _mm256_loadu_ps(row + c), acc);
            _mm256_storeu_ps(y + c, acc);
        }
        for (; c < n; ++c) y[c] = std::fmaf(x[k], row[c], y[c]);
    }
}

float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
    return _mm_cvtss_f32(lo);
}

float dot_avx2_f32(const float* a, const float* b, size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    __m256 acc2 = _mm256_setzero_ps();
    __m256 acc3 = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
        acc2 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 16), _mm256_loadu_ps(b + i + 16), acc2);
        acc3 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 24), _mm256_loadu_ps(b + i + 24), acc3);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    }
    float s = hsum(_mm256_add_ps(_mm256_add_ps(acc0, acc1), _mm256_add_ps(acc2, acc3)));
    for (; i < n; ++i) s = std::fmaf(a[i], b[i], s);
    return s;
}

void axpy_avx2_f32(float* y, float alpha, const float* x, size_t n) {
    const __m256 av = _mm256_set1_ps(alpha);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 yv = _mm256_loadu_ps(y + i);
        yv = _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), yv);
        _mm256_storeu_ps(y + i, yv);
    }
    for (; i < n; ++i) y[i] = std::fmaf(alpha, x[i], y[i]);
}

void scal_avx2_f32(float* y, float alpha, size_t n) {
    const __m256 av = _mm256_set1_ps(alpha);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_mul_ps(av, _mm256_loadu_ps(y + i)));
    }
    for (; i < n; ++i) y[i] *= alpha;
}

void add_avx2_f32(float* y, const float* x, size_t n) {
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), _mm256_loadu_ps(x + i)));
    }
    for (; i < n; ++i) y[i] += x[i];
}

void rot_avx2_f32(float* p, float* q, float c, float s, size_t n) {
    const __m256 cv = _mm256_set1_ps(c);
    const __m256 sv = _mm256_set1_ps(s);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 pv = _mm256_loadu_ps(p + i);
        const __m256 qv = _mm256_loadu_ps(q + i);
        _mm256_storeu_ps(p + i, _mm256_fmsub_ps(cv, pv, _mm256_mul_ps(sv, qv)));
        _mm256_storeu_ps(q + i, _mm256_fmadd_ps(sv, pv, _mm256_mul_ps(cv, qv)));
    }
    for (; i < n; ++i) {
        const float pi = p[i];
        const float qi = q[i];
        p[i] = std::fmaf(c, pi, -(s * qi));
        q[i] = std::fmaf(s, pi, c * qi);
    }
}

void rmsnorm_avx2_f32(float* y, const float* x, const float* gamma, size_t n, float eps) {
    __m256 acc = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 xv = _mm256_loadu_ps(x + i);
        acc = _mm256_fmadd_ps(xv, xv, acc);
    }
    float ss = hsum(acc);
    for (; i < n; ++i) ss = std::fmaf(x[i], x[i], ss);
    const float inv = 1.0f / std::sqrt(ss / static_cast<float>(n) + eps);
    const __m256 iv = _mm256_set1_ps(inv);
    i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 xv = _mm256_mul_ps(_mm256_loadu_ps(x + i), iv);
        _mm256_storeu_ps(y + i, _mm256_mul_ps(xv, _mm256_loadu_ps(gamma + i)));
    }
    for (; i < n; ++i) y[i] = x[i] * inv * gamma[i];
}

void silu_mul_f32(float* y, const float* gate, const float* up, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        const float g = gate[i];
        y[i] = g / (1.0f + std::exp(-g)) * up[i];
    }
}

// ---------------------------------------------------------------- f64 ----

void gemv_avx2_f64(double* y, const double* x, const double* a, size_t m, size_t n) {
    size_t j = 0;
    for (; j + 4 <= n; j += 4) _mm256_storeu_pd(y + j, _mm256_setzero_pd());
    for (; j < n; ++j) y[j] = 0.0;

    size_t k = 0;
    for (; k + 4 <= m; k += 4) {
        const __m256d x0 = _mm256_set1_pd(x[k + 0]);
        const __m256d x1 = _mm256_set1_pd(x[k + 1]);
        const __m256d x2 = _mm256_set1_pd(x[k + 2]);
        const __m256d x3 = _mm256_set1_pd(x[k + 3]);
        const double* r0 = a + (k + 0) * n;
        const double* r1 = a + (k + 1) * n;
        const double* r2 = a + (k + 2) * n;
        const double* r3 = a + (k + 3) * n;
        size_t c = 0;
        for (; c + 4 <= n; c += 4) {
            __m256d acc = _mm256_loadu_pd(y + c);
            acc = _mm256_fmadd_pd(x0, _mm256_loadu_pd(r0 + c), acc);
            acc = _mm256_fmadd_pd(x1, _mm256_loadu_pd(r1 + c), acc);
            acc = _mm256_fmadd_pd(x2, _mm256_loadu_pd(r2 + c), acc);
            acc = _mm256_fmadd_pd(x3, _mm256_loadu_pd(r3 + c), acc);
            _mm256_storeu_pd(y + c, acc);
        }
        for (; c < n; ++c) {
            double acc = y[c];
            acc = std::fma(x[k + 0], r0[c], acc);
            acc = std::fma(x[k + 1], r1[c], acc);
            acc = std::fma(x[k + 2], r2[c], acc);
            acc = std::fma(x[k + 3], r3[c], acc);
            y[c] = acc;
        }
    }
    for (; k < m; ++k) {
        const __m256d xk = _mm256_set1_pd(x[k]);
        const double* row = a + k * n;
        size_t c = 0;
        for (; c + 4 <= n; c += 4) {
            __m256d acc = _mm256_loadu_pd(y + c);
            acc = _mm256_fmadd_pd(xk, _mm256_loadu_pd(row + c), acc);
            _mm256_storeu_pd(y + c, acc);
        }
        for (; c < n; ++c) y[c] = std::fma(x[k], row[c], y[c]);
    }
}

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2_f64(const double* a, const double* b, size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) s = std::fma(a[i], b[i], s);
    return s;
}

void axpy_avx2_f64(double* y, double alpha, const double* x, size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scal_avx2_f64(double* y, double alpha, size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] *= alpha;
}

void add_avx2_f64(double* y, const double* x, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) y[i] += x[i];
}

void rot_avx2_f64(double* p, double* q, double c, double s, size_t n) {
    const __m256d cv = _mm256_set1_pd(c);
    const __m256d sv = _mm256_set1_pd(s);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d pv = _mm256_loadu_pd(p + i);
        const __m256d qv = _mm256_loadu_pd(q + i);
        _mm256_storeu_pd(p + i, _mm256_fmsub_pd(cv, pv, _mm256_mul_pd(sv, qv)));
        _mm256_storeu_pd(q + i, _mm256_fmadd_pd(sv, pv, _mm256_mul_pd(cv, qv)));
    }
    for (; i < n; ++i) {
        const double pi = p[i];
        const double qi = q[i];
        p[i] = std::fma(c, pi, -(s * qi));
        q[i] = std::fma(s, pi, c * qi);
    }
}

void rmsnorm_avx2_f64(double* y, const double* x, const double* gamma, size_t n, double eps) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(xv, xv, acc);
    }
    double ss = hsum(acc);
    for (; i < n; ++i) ss = std::fma(x[i], x[i], ss);
    const double inv = 1.0 / std::sqrt(ss / static_cast<double>(n) + eps);
    const __m256d iv = _mm256_set1_pd(inv);
    i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_mul_pd(_mm256_loadu_pd(x + i), iv);
        _mm256_storeu_pd(y + i, _mm256_mul_pd(xv, _mm256_loadu_pd(gamma + i)));
    }
    for (; i < n; ++i) y[i] = x[i] * inv * gamma[i];
}

void silu_mul_f64(double* y, const double* gate, const double* up, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        const double g = gate[i];
        y[i] = g / (1.0 + std::exp(-g)) * up[i];
    }
}

}  // namespace

const Ops<float> kAvx2F32 = {
    gemv_avx2_f32, dot_avx2_f32, axpy_avx2_f32, scal_avx2_f32,
    add_avx2_f32,  rot_avx2_f32, rmsnorm_avx2_f32, silu_mul_f32,
};

const Ops<double> kAvx2F64 = {
    gemv_avx2_f64, dot_avx2_f64, axpy_avx2_f64, scal_avx2_f64,
    add_avx2_f64,  rot_avx2_f64, rmsnorm_avx2_f64, silu_mul_f64,
};

}  // namespace fsvd::kern

#endif  // x86_64
