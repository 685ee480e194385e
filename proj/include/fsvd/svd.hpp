#pragma once

#include <vector>

#include "fsvd/tensor.hpp"

namespace fsvd {

// Top-r factorization of W: a = U_r * Sigma_r (m x r), b = V_r^T (r x n),
// so ||W - a*b||_F^2 equals the sum of the discarded squared singular values.
struct SvdResult {
    Tensor2Dd a;
    Tensor2Dd b;
    std::vector<double> singular_values;  // nonincreasing, length r
};

// One-sided Jacobi in double precision. Deterministic and dependency-free;
// iteration cap 100 sweeps, off-diagonal threshold 1e-12 relative.
SvdResult truncated_svd(const Tensor2Dd& w, size_t r);

}  // namespace fsvd
