#include "fsvd/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fsvd/kernels.hpp"

namespace fsvd {

namespace {

constexpr double kOffdiagTol = 1e-12;
constexpr int kMaxSweeps = 100;

// One-sided Jacobi on the columns of M (mm x nn, mm >= nn), carried as rows of
// C = M^T so every rotation touches contiguous memory. On return C holds
// (U*Sigma)^T and vr holds V^T.
void jacobi_orthogonalize(Tensor2Dd& c, Tensor2Dd& vr) {
    const size_t nn = c.rows;
    const size_t mm = c.cols;
    const auto& ops = kern::ops<double>();

    std::vector<double> sqnorm(nn);
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        for (size_t j = 0; j < nn; ++j) {
            const double* row = c.data.data() + j * mm;
            sqnorm[j] = ops.dot(row, row, mm);
        }
        size_t rotations = 0;
        for (size_t p = 0; p < nn; ++p) {
            for (size_t q = p + 1; q < nn; ++q) {
                double* cp = c.data.data() + p * mm;
                double* cq = c.data.data() + q * mm;
                const double apq = ops.dot(cp, cq, mm);
                const double app = sqnorm[p];
                const double aqq = sqnorm[q];
                if (std::abs(apq) <= kOffdiagTol * std::sqrt(app * aqq)) continue;

                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * cs;

                ops.rot(cp, cq, cs, sn, mm);
                ops.rot(vr.data.data() + p * nn, vr.data.data() + q * nn, cs, sn, nn);
                sqnorm[p] = cs * cs * app - 2.0 * cs * sn * apq + sn * sn * aqq;
                sqnorm[q] = sn * sn * app + 2.0 * cs * sn * apq + cs * cs * aqq;
                ++rotations;
            }
        }
        if (rotations == 0) return;
    }
    throw NumericError("truncated_svd: Jacobi did not converge within 100 sweeps");
}

}  // namespace

SvdResult truncated_svd(const Tensor2Dd& w, size_t r) {
    const size_t min_dim = std::min(w.rows, w.cols);
    if (r < 1 || r > min_dim) {
        throw RankError("truncated_svd: rank " + std::to_string(r) +
                        " out of range [1, " + std::to_string(min_dim) + "]");
    }
    for (double v : w.data) {
        if (!std::isfinite(v)) throw NumericError("truncated_svd: non-finite input");
    }

    // Orient so the factored matrix M has rows >= cols, then work on C = M^T.
    const bool swapped = w.rows < w.cols;
    Tensor2Dd c = swapped ? Tensor2Dd(w) : transpose(w);
    const size_t nn = c.rows;  // columns of M
    const size_t mm = c.cols;  // rows of M

    Tensor2Dd vr(nn, nn);
    for (size_t i = 0; i < nn; ++i) vr.at(i, i) = 1.0;

    jacobi_orthogonalize(c, vr);

    const auto& ops = kern::ops<double>();
    std::vector<double> sigma(nn);
    for (size_t j = 0; j < nn; ++j) {
        const double* row = c.data.data() + j * mm;
        sigma[j] = std::sqrt(ops.dot(row, row, mm));
    }
    std::vector<size_t> order(nn);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t i, size_t j) { return sigma[i] > sigma[j]; });

    SvdResult out;
    out.singular_values.resize(r);
    for (size_t j = 0; j < r; ++j) out.singular_values[j] = sigma[order[j]];

    if (!swapped) {
        // M = W: columns of U*Sigma are the rows of C, V^T rows are rows of vr.
        out.a = Tensor2Dd(w.rows, r);
        out.b = Tensor2Dd(r, w.cols);
        for (size_t j = 0; j < r; ++j) {
            const size_t src = order[j];
            for (size_t i = 0; i < w.rows; ++i) out.a.at(i, j) = c.at(src, i);
            for (size_t i = 0; i < w.cols; ++i) out.b.at(j, i) = vr.at(src, i);
        }
    } else {
        // M = W^T, so U and V swap roles: A = V_M * Sigma, B = U_M^T.
        out.a = Tensor2Dd(w.rows, r);
        out.b = Tensor2Dd(r, w.cols);
        for (size_t j = 0; j < r; ++j) {
            const size_t src = order[j];
            const double s = sigma[src];
            for (size_t i = 0; i < w.rows; ++i) out.a.at(i, j) = vr.at(src, i) * s;
            if (s > 0.0) {
                const double inv = 1.0 / s;
                for (size_t i = 0; i < w.cols; ++i) out.b.at(j, i) = c.at(src, i) * inv;
            }  // zero singular value: b row stays zero, a column is zero anyway
        }
    }
    return out;
}

}  // namespace fsvd
