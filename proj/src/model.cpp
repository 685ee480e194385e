#include "fsvd/model.hpp"

#include <cmath>

#include "fsvd/crc32.hpp"
#include "fsvd/kernels.hpp"
#include "fsvd/math.hpp"

namespace fsvd {

void ModelConfig::validate() const {
    if (n_layers < 1 || d_model < 1 || n_heads < 1 || d_head < 1 || d_ff < 1 ||
        vocab < 1) {
        throw ConfigError("ModelConfig: all counts must be >= 1");
    }
    if (d_model != n_heads * d_head) {
        throw ConfigError("ModelConfig: d_model must equal n_heads * d_head");
    }
    if (d_head % 2 != 0) {
        throw ConfigError("ModelConfig: d_head must be even");
    }
    if (rope_base <= 0.0 || norm_eps <= 0.0) {
        throw ConfigError("ModelConfig: rope_base and norm_eps must be positive");
    }
}

namespace {

const std::array<Preset, 2> kPresets = {{
    {"desk", {4, 256, 8, 32, 1024, 1024, 10000.0, 1e-5}, 8192},
    {"bench", {8, 512, 8, 64, 2048, 4096, 10000.0, 1e-5}, 8192},
}};

void fill_tensor(Tensor2Dd& t, Rng64& rng, size_t fan_in) {
    const double a = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (double& v : t.data) {
        v = static_cast<double>(static_cast<float>(rng.next_symmetric(a)));
    }
}

void fill_vector(std::vector<double>& v, Rng64& rng, size_t fan_in) {
    const double a = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (double& x : v) {
        x = static_cast<double>(static_cast<float>(rng.next_symmetric(a)));
    }
}

void checksum_tensor(uint32_t& crc, const Tensor2Dd& t) {
    for (double v : t.data) {
        const float f = static_cast<float>(v);
        crc = crc32_update(crc, &f, sizeof(f));
    }
}

void checksum_vector(uint32_t& crc, const std::vector<double>& v) {
    for (double x : v) {
        const float f = static_cast<float>(x);
        crc = crc32_update(crc, &f, sizeof(f));
    }
}

}  // namespace

const Preset& preset(const std::string& name) {
    for (const Preset& p : kPresets) {
        if (p.name == name) return p;
    }
    throw ConfigError("unknown config preset '" + name + "' (expected desk|bench)");
}

std::span<const Preset> presets() {
    return {kPresets.data(), kPresets.size()};
}

DenseModel generate_toy_dense(const ModelConfig& config, uint64_t seed) {
    config.validate();
    Rng64 rng(seed);

    DenseModel m;
    m.config = config;
    m.embedding = Tensor2Dd(config.vocab, config.d_model);
    fill_tensor(m.embedding, rng, config.vocab);

    m.layers.resize(config.n_layers);
    for (DenseLayer& layer : m.layers) {
        layer.q = Tensor2Dd(config.d_model, config.d_model);
        layer.k = Tensor2Dd(config.d_model, config.d_model);
        layer.v = Tensor2Dd(config.d_model, config.d_model);
        layer.o = Tensor2Dd(config.d_model, config.d_model);
        layer.up = Tensor2Dd(config.d_model, config.d_ff);
        layer.gate = Tensor2Dd(config.d_model, config.d_ff);
        layer.down = Tensor2Dd(config.d_ff, config.d_model);
        layer.attn_gamma.resize(config.d_model);
        layer.mlp_gamma.resize(config.d_model);
        fill_tensor(layer.q, rng, config.d_model);
        fill_tensor(layer.k, rng, config.d_model);
        fill_tensor(layer.v, rng, config.d_model);
        fill_tensor(layer.o, rng, config.d_model);
        fill_tensor(layer.up, rng, config.d_model);
        fill_tensor(layer.gate, rng, config.d_model);
        fill_tensor(layer.down, rng, config.d_ff);
        fill_vector(layer.attn_gamma, rng, config.d_model);
        fill_vector(layer.mlp_gamma, rng, config.d_model);
    }

    m.final_gamma.resize(config.d_model);
    fill_vector(m.final_gamma, rng, config.d_model);
    m.head = Tensor2Dd(config.d_model, config.vocab);
    fill_tensor(m.head, rng, config.d_model);
    return m;
}

uint32_t dense_model_checksum(const DenseModel& m) {
    uint32_t crc = 0;
    checksum_tensor(crc, m.embedding);
    for (const DenseLayer& layer : m.layers) {
        checksum_tensor(crc, layer.q);
        checksum_tensor(crc, layer.k);
        checksum_tensor(crc, layer.v);
        checksum_tensor(crc, layer.o);
        checksum_tensor(crc, layer.up);
        checksum_tensor(crc, layer.gate);
        checksum_tensor(crc, layer.down);
        checksum_vector(crc, layer.attn_gamma);
        checksum_vector(crc, layer.mlp_gamma);
    }
    checksum_vector(crc, m.final_gamma);
    checksum_tensor(crc, m.head);
    return crc;
}

CalibMoments calibrate_dense(const DenseModel& model, uint64_t calib_seed,
                             size_t calib_tokens) {
    const ModelConfig& cfg = model.config;
    if (calib_tokens < 16) {
        throw ConfigError("calibrate_dense: calib_tokens must be >= 16");
    }

    CalibMoments out;
    out.layers.resize(cfg.n_layers);
    for (auto& l : out.layers) {
        l.attn_in.assign(cfg.d_model, 0.0);
        l.o_in.assign(cfg.d_model, 0.0);
        l.mlp_in.assign(cfg.d_model, 0.0);
        l.down_in.assign(cfg.d_ff, 0.0);
    }
    out.token_count = calib_tokens;

    auto accumulate = [](std::vector<double>& sums, std::span<const double> x) {
        for (size_t i = 0; i < x.size(); ++i) sums[i] += x[i] * x[i];
    };

    Rng64 rng(calib_seed);
    const auto& ops = kern::ops<double>();
    std::vector<double> x(cfg.d_model), xn(cfg.d_model), proj(cfg.d_model);
    std::vector<double> u(cfg.d_ff), g(cfg.d_ff), h(cfg.d_ff);

    for (size_t t = 0; t < calib_tokens; ++t) {
        const auto token = static_cast<size_t>(rng.next_below(cfg.vocab));
        auto emb = model.embedding.row(token);
        std::copy(emb.begin(), emb.end(), x.begin());

        for (size_t li = 0; li < cfg.n_layers; ++li) {
            const DenseLayer& layer = model.layers[li];
            auto& stats = out.layers[li];

            ops.rmsnorm(xn.data(), x.data(), layer.attn_gamma.data(), cfg.d_model,
                        cfg.norm_eps);
            accumulate(stats.attn_in, xn);
            // Single-token sequence: attention over one position reduces to v.
            ops.gemv(proj.data(), xn.data(), layer.v.data.data(), cfg.d_model,
                     cfg.d_model);
            accumulate(stats.o_in, proj);
            std::vector<double> o(cfg.d_model);
            ops.gemv(o.data(), proj.data(), layer.o.data.data(), cfg.d_model,
                     cfg.d_model);
            ops.add(x.data(), o.data(), cfg.d_model);

            ops.rmsnorm(xn.data(), x.data(), layer.mlp_gamma.data(), cfg.d_model,
                        cfg.norm_eps);
            accumulate(stats.mlp_in, xn);
            ops.gemv(u.data(), xn.data(), layer.up.data.data(), cfg.d_model, cfg.d_ff);
            ops.gemv(g.data(), xn.data(), layer.gate.data.data(), cfg.d_model,
                     cfg.d_ff);
            ops.silu_mul(h.data(), g.data(), u.data(), cfg.d_ff);
            accumulate(stats.down_in, h);
            std::vector<double> d(cfg.d_model);
            ops.gemv(d.data(), h.data(), layer.down.data.data(), cfg.d_ff,
                     cfg.d_model);
            ops.add(x.data(), d.data(), cfg.d_model);
        }
    }

    const double inv = 1.0 / static_cast<double>(calib_tokens);
    for (auto& l : out.layers) {
        for (double& v : l.attn_in) v *= inv;
        for (double& v : l.o_in) v *= inv;
        for (double& v : l.mlp_in) v *= inv;
        for (double& v : l.down_in) v *= inv;
    }
    return out;
}

Tensor2Dd dense_forward_all(const DenseModel& model, std::span<const int> tokens) {
    const ModelConfig& cfg = model.config;
    const size_t t_len = tokens.size();
    if (t_len == 0) throw ShapeError("dense_forward_all: empty token sequence");
    for (int tok : tokens) {
        if (tok < 0 || static_cast<size_t>(tok) >= cfg.vocab) {
            throw ShapeError("dense_forward_all: token id out of vocabulary");
        }
    }
    const auto& ops = kern::ops<double>();
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_head));

    Tensor2Dd x(t_len, cfg.d_model);
    for (size_t t = 0; t < t_len; ++t) {
        auto emb = model.embedding.row(static_cast<size_t>(tokens[t]));
        std::copy(emb.begin(), emb.end(), x.row(t).begin());
    }

    Tensor2Dd xn(t_len, cfg.d_model);
    std::vector<double> scores(t_len);
    for (size_t li = 0; li < cfg.n_layers; ++li) {
        const DenseLayer& layer = model.layers[li];
        for (size_t t = 0; t < t_len; ++t) {
            ops.rmsnorm(xn.row(t).data(), x.row(t).data(), layer.attn_gamma.data(),
                        cfg.d_model, cfg.norm_eps);
        }
        Tensor2Dd q = matmul(xn, layer.q);
        Tensor2Dd k = matmul(xn, layer.k);
        Tensor2Dd v = matmul(xn, layer.v);
        for (size_t t = 0; t < t_len; ++t) {
            for (size_t h = 0; h < cfg.n_heads; ++h) {
                rope_inplace(q.row(t).data() + h * cfg.d_head, cfg.d_head,
                             static_cast<double>(t), cfg.rope_base);
                rope_inplace(k.row(t).data() + h * cfg.d_head, cfg.d_head,
                             static_cast<double>(t), cfg.rope_base);
            }
        }
        Tensor2Dd attn(t_len, cfg.d_model);
        for (size_t t = 0; t < t_len; ++t) {
            for (size_t h = 0; h < cfg.n_heads; ++h) {
                const double* qh = q.row(t).data() + h * cfg.d_head;
                double mx = -1e300;
                for (size_t j = 0; j <= t; ++j) {
                    scores[j] = ops.dot(qh, k.row(j).data() + h * cfg.d_head,
                                        cfg.d_head) *
                                scale;
                    if (scores[j] > mx) mx = scores[j];
                }
                double denom = 0.0;
                for (size_t j = 0; j <= t; ++j) {
                    scores[j] = std::exp(scores[j] - mx);
                    denom += scores[j];
                }
                double* out = attn.row(t).data() + h * cfg.d_head;
                for (size_t j = 0; j <= t; ++j) {
                    ops.axpy(out, scores[j] / denom,
                             v.row(j).data() + h * cfg.d_head, cfg.d_head);
                }
            }
        }
        Tensor2Dd o = matmul(attn, layer.o);
        for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += o.data[i];

        for (size_t t = 0; t < t_len; ++t) {
            ops.rmsnorm(xn.row(t).data(), x.row(t).data(), layer.mlp_gamma.data(),
                        cfg.d_model, cfg.norm_eps);
        }
        Tensor2Dd u = matmul(xn, layer.up);
        Tensor2Dd g = matmul(xn, layer.gate);
        Tensor2Dd h(t_len, cfg.d_ff);
        ops.silu_mul(h.data.data(), g.data.data(), u.data.data(), h.data.size());
        Tensor2Dd d = matmul(h, layer.down);
        for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += d.data[i];
    }

    Tensor2Dd final_norm(t_len, cfg.d_model);
    for (size_t t = 0; t < t_len; ++t) {
        ops.rmsnorm(final_norm.row(t).data(), x.row(t).data(), model.final_gamma.data(),
                    cfg.d_model, cfg.norm_eps);
    }
    return matmul(final_norm, model.head);
}

std::vector<double> dense_forward_last(const DenseModel& model,
                                       std::span<const int> tokens) {
    Tensor2Dd logits = dense_forward_all(model, tokens);
    auto last = logits.row(logits.rows - 1);
    return {last.begin(), last.end()};
}

std::vector<int> dense_greedy_decode(const DenseModel& model,
                                     std::span<const int> prompt, size_t max_new) {
    std::vector<int> sequence(prompt.begin(), prompt.end());
    std::vector<int> generated;
    generated.reserve(max_new);
    for (size_t i = 0; i < max_new; ++i) {
        const std::vector<double> logits = dense_forward_last(model, sequence);
        const int token = static_cast<int>(
            argmax_greedy(std::span<const double>(logits)));
        generated.push_back(token);
        sequence.push_back(token);
    }
    return generated;
}

}  // namespace fsvd
