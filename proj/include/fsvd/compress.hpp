#pragma once

// Compression of dense toy models into the three checkpoint families:
//   A: native factorized layout (A, B per projection)
//   B: wrapper-exported layout (U*Sigma, V^T, diagonal whitening scale)
//   C: basis-shared layout (one input-side basis per layer group)

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fsvd/checkpoint.hpp"
#include "fsvd/model.hpp"

namespace fsvd {

struct CalibrationError : std::runtime_error {
    explicit CalibrationError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class CompressMethod { plain, whitened, basis_shared };

struct CompressionSpec {
    CompressMethod method = CompressMethod::plain;
    double retained_ratio = 0.5;
    size_t group_size = 2;        // basis_shared only; must divide n_layers
    uint64_t calib_seed = 1234;   // whitened only
    size_t calib_tokens = 256;    // whitened only
};

// Rank giving factored parameter count r*(m+n) ~= rho*m*n, clamped to
// [1, min(m,n)]. rho = 1 saturates to min(m,n) so a full-ratio checkpoint is
// a lossless factorization.
size_t rank_for_ratio(double rho, size_t m, size_t n);

Checkpoint compress_plain(const DenseModel& model, double rho, size_t capacity);

Checkpoint compress_whitened(const DenseModel& model, double rho,
                             uint64_t calib_seed, size_t calib_tokens,
                             size_t capacity);

// Per-layer, per-projection diagonal scales (index order kProjNames). The
// public compress_whitened derives these from calibration; this entry point
// takes them directly.
using ProjScales = std::array<std::vector<double>, 7>;
Checkpoint compress_whitened_with_scales(const DenseModel& model, double rho,
                                         const std::vector<ProjScales>& scales,
                                         size_t capacity);

Checkpoint compress_basis_shared(const DenseModel& model, double rho,
                                 size_t group_size, size_t capacity);

Checkpoint compress(const DenseModel& model, const CompressionSpec& spec,
                    size_t capacity);

// Parameter counts, used by ratio sweeps and budget tests.
size_t dense_projection_param_count(const ModelConfig& cfg);
size_t checkpoint_factor_param_count(const Checkpoint& ckpt);

}  // namespace fsvd
