#pragma once

// Seeded dense toy decoder models: configuration presets, deterministic
// weight generation, and a plain f64 no-cache forward used for whitening
// calibration and as the dense-side gold in tests.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsvd/tensor.hpp"

namespace fsvd {

struct ModelConfig {
    size_t n_layers = 0;
    size_t d_model = 0;
    size_t n_heads = 0;
    size_t d_head = 0;  // = d_model / n_heads, must be even
    size_t d_ff = 0;
    size_t vocab = 0;
    double rope_base = 10000.0;
    double norm_eps = 1e-5;

    void validate() const;
};

// Named run configurations. "desk" is the correctness scale, "bench" the
// timing scale; capacity bounds the KV cache.
struct Preset {
    std::string name;
    ModelConfig config;
    size_t capacity;
};

const Preset& preset(const std::string& name);
std::span<const Preset> presets();

inline constexpr const char* kProjNames[7] = {"q", "k", "v", "o",
                                              "up", "gate", "down"};

struct DenseLayer {
    Tensor2Dd q, k, v, o;  // d_model x d_model
    Tensor2Dd up, gate;    // d_model x d_ff
    Tensor2Dd down;        // d_ff x d_model
    std::vector<double> attn_gamma, mlp_gamma;

    // Index order matches kProjNames: q,k,v,o,up,gate,down.
    const Tensor2Dd& proj(size_t idx) const {
        const Tensor2Dd* p[7] = {&q, &k, &v, &o, &up, &gate, &down};
        return *p[idx];
    }
};

struct DenseModel {
    ModelConfig config;
    Tensor2Dd embedding;  // vocab x d_model
    std::vector<DenseLayer> layers;
    std::vector<double> final_gamma;
    Tensor2Dd head;  // d_model x vocab
};

// All weights drawn from one SplitMix64 stream, uniform in [-a, a] with
// a = sqrt(1/fan_in) (fan_in = rows for matrices, length for gammas), each
// value rounded to f32 so the model is exactly representable on disk.
// Draw order: embedding, per layer [q,k,v,o,up,gate,down,attn_gamma,
// mlp_gamma], final_gamma, head.
DenseModel generate_toy_dense(const ModelConfig& config, uint64_t seed);

// CRC-32 over the f32 little-endian bytes of every tensor in draw order.
uint32_t dense_model_checksum(const DenseModel& model);

// Mean squared projection-input activations gathered for whitening. Each
// calibration token runs as an independent single-token sequence, which makes
// the statistics exactly invariant to stream order (up to summation
// reordering).
struct CalibMoments {
    // Per layer: mean of x_i^2 at the four projection input sites.
    struct Layer {
        std::vector<double> attn_in;  // feeds q, k, v
        std::vector<double> o_in;     // feeds o
        std::vector<double> mlp_in;   // feeds up, gate
        std::vector<double> down_in;  // feeds down
    };
    std::vector<Layer> layers;
    size_t token_count = 0;
};

CalibMoments calibrate_dense(const DenseModel& model, uint64_t calib_seed,
                             size_t calib_tokens);

// Full-sequence causal forward (naive softmax, f64); returns logits for every
// position (rows = positions). The dense analogue of the factorized no-cache
// reference.
Tensor2Dd dense_forward_all(const DenseModel& model, std::span<const int> tokens);

std::vector<double> dense_forward_last(const DenseModel& model,
                                       std::span<const int> tokens);

// Iterated no-cache greedy decode on the dense weights.
std::vector<int> dense_greedy_decode(const DenseModel& model,
                                     std::span<const int> prompt, size_t max_new);

}  // namespace fsvd
