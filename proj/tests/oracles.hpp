#pragma once

// Test-only oracles. These deliberately avoid the library's kernel and SVD
// paths: plain triple loops, naive softmax, and a two-sided Jacobi
// eigensolver on the Gram matrix.

#include <algorithm>
#include <cmath>
#include <vector>

#include "fsvd/tensor.hpp"

namespace oracle {

inline fsvd::Tensor2Dd triple_loop_matmul(const fsvd::Tensor2Dd& a,
                                          const fsvd::Tensor2Dd& b) {
    fsvd::Tensor2Dd c(a.rows, b.cols);
    for (size_t i = 0; i < a.rows; ++i) {
        for (size_t j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < a.cols; ++k) {
                s += a.at(i, k) * b.at(k, j);
            }
            c.at(i, j) = s;
        }
    }
    return c;
}

// softmax(q . K^T * scale) . V, computed directly with max subtraction.
template <typename T>
std::vector<T> naive_attention(const std::vector<T>& q,
                               const fsvd::Tensor2D<T>& k,
                               const fsvd::Tensor2D<T>& v, T scale) {
    const size_t n = k.rows;
    const size_t d = q.size();
    std::vector<double> scores(n);
    double mx = -1e300;
    for (size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (size_t i = 0; i < d; ++i) {
            s += static_cast<double>(q[i]) * static_cast<double>(k.at(j, i));
        }
        scores[j] = s * static_cast<double>(scale);
        mx = std::max(mx, scores[j]);
    }
    double denom = 0.0;
    for (size_t j = 0; j < n; ++j) {
        scores[j] = std::exp(scores[j] - mx);
        denom += scores[j];
    }
    std::vector<T> out(d, T(0));
    for (size_t j = 0; j < n; ++j) {
        const double w = scores[j] / denom;
        for (size_t i = 0; i < d; ++i) {
            out[i] += static_cast<T>(w * static_cast<double>(v.at(j, i)));
        }
    }
    return out;
}

// Eigenvalues of a symmetric matrix via classic two-sided cyclic Jacobi,
// sorted nonincreasing.
inline std::vector<double> jacobi_eigenvalues_sym(fsvd::Tensor2Dd a) {
    const size_t n = a.rows;
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
        }
        if (off < 1e-26) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (apq == 0.0) continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (size_t i = 0; i < n; ++i) {
                    const double aip = a.at(i, p);
                    const double aiq = a.at(i, q);
                    a.at(i, p) = c * aip - s * aiq;
                    a.at(i, q) = s * aip + c * aiq;
                }
                for (size_t i = 0; i < n; ++i) {
                    const double api = a.at(p, i);
                    const double aqi = a.at(q, i);
                    a.at(p, i) = c * api - s * aqi;
                    a.at(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (size_t i = 0; i < n; ++i) eig[i] = a.at(i, i);
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

// Squared singular values of W from the smaller Gram matrix, sorted
// nonincreasing.
inline std::vector<double> gram_eigenvalues(const fsvd::Tensor2Dd& w) {
    const bool use_wwt = w.rows <= w.cols;
    const fsvd::Tensor2Dd wt = fsvd::transpose(w);
    const fsvd::Tensor2Dd gram =
        use_wwt ? triple_loop_matmul(w, wt) : triple_loop_matmul(wt, w);
    return jacobi_eigenvalues_sym(gram);
}

// Best achievable ||W - W_r||_F for rank r (the Eckart-Young tail).
inline double eckart_young_tail(const fsvd::Tensor2Dd& w, size_t r) {
    const std::vector<double> eig = gram_eigenvalues(w);
    double s = 0.0;
    for (size_t i = r; i < eig.size(); ++i) s += std::max(eig[i], 0.0);
    return std::sqrt(s);
}

inline void fill_uniform(fsvd::Tensor2Dd& t, fsvd::Rng64& rng, double a = 1.0) {
    for (double& v : t.data) v = rng.next_symmetric(a);
}

inline void fill_uniform(fsvd::Tensor2Df& t, fsvd::Rng64& rng, double a = 1.0) {
    for (float& v : t.data) v = static_cast<float>(rng.next_symmetric(a));
}

}  // namespace oracle
