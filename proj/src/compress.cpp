#include "fsvd/compress.hpp"

#include <cmath>

#include "fsvd/svd.hpp"

namespace fsvd {

namespace {

void proj_dims(const ModelConfig& cfg, size_t proj, size_t& d_in, size_t& d_out) {
    switch (proj) {
        case 4:
        case 5:
            d_in = cfg.d_model;
            d_out = cfg.d_ff;
            break;
        case 6:
            d_in = cfg.d_ff;
            d_out = cfg.d_model;
            break;
        default:
            d_in = cfg.d_model;
            d_out = cfg.d_model;
            break;
    }
}

void add_f64(Checkpoint& ckpt, const std::string& name, const Tensor2Dd& t) {
    CheckpointTensor& blob = ckpt.add(name, {t.rows, t.cols});
    for (size_t i = 0; i < t.data.size(); ++i) {
        blob.data[i] = static_cast<float>(t.data[i]);
    }
}

void add_vec(Checkpoint& ckpt, const std::string& name,
             const std::vector<double>& v) {
    CheckpointTensor& blob = ckpt.add(name, {v.size()});
    for (size_t i = 0; i < v.size(); ++i) blob.data[i] = static_cast<float>(v[i]);
}

// Dense tensors shared by every family.
void add_common_front(Checkpoint& ckpt, const DenseModel& model) {
    add_f64(ckpt, "embedding", model.embedding);
}

void add_layer_gammas(Checkpoint& ckpt, const DenseModel& model, size_t li) {
    const std::string base = "layers." + std::to_string(li) + ".";
    add_vec(ckpt, base + "attn_gamma", model.layers[li].attn_gamma);
    add_vec(ckpt, base + "mlp_gamma", model.layers[li].mlp_gamma);
}

void add_common_back(Checkpoint& ckpt, const DenseModel& model) {
    add_vec(ckpt, "final_gamma", model.final_gamma);
    add_f64(ckpt, "head", model.head);
}

std::vector<double> scales_from_moments(const std::vector<double>& mean_sq) {
    std::vector<double> s(mean_sq.size());
    for (size_t i = 0; i < mean_sq.size(); ++i) {
        s[i] = std::sqrt(mean_sq[i]) + 1e-6;
    }
    return s;
}

}  // namespace

size_t rank_for_ratio(double rho, size_t m, size_t n) {
    if (!(rho > 0.0) || rho > 1.0) {
        throw ConfigError("retained ratio must be in (0, 1]");
    }
    const size_t min_dim = std::min(m, n);
    if (rho >= 1.0) return min_dim;
    const double ideal = rho * static_cast<double>(m) * static_cast<double>(n) /
                         static_cast<double>(m + n);
    auto r = static_cast<size_t>(std::llround(ideal));
    if (r < 1) r = 1;
    if (r > min_dim) r = min_dim;
    return r;
}

Checkpoint compress_plain(const DenseModel& model, double rho, size_t capacity) {
    const ModelConfig& cfg = model.config;
    Checkpoint ckpt;
    ckpt.header["family"] = "A";
    ckpt.set_config(cfg, capacity);
    ckpt.header["retained_ratio"] = rho;

    add_common_front(ckpt, model);
    for (size_t li = 0; li < cfg.n_layers; ++li) {
        const std::string base = "layers." + std::to_string(li) + ".";
        for (size_t proj = 0; proj < 7; ++proj) {
            size_t d_in = 0, d_out = 0;
            proj_dims(cfg, proj, d_in, d_out);
            const size_t r = rank_for_ratio(rho, d_in, d_out);
            const SvdResult svd = truncated_svd(model.layers[li].proj(proj), r);
            add_f64(ckpt, base + kProjNames[proj] + ".A", svd.a);
            add_f64(ckpt, base + kProjNames[proj] + ".B", svd.b);
        }
        add_layer_gammas(ckpt, model, li);
    }
    add_common_back(ckpt, model);
    return ckpt;
}

Checkpoint compress_whitened_with_scales(const DenseModel& model, double rho,
                                         const std::vector<ProjScales>& scales,
                                         size_t capacity) {
    const ModelConfig& cfg = model.config;
    if (scales.size() != cfg.n_layers) {
        throw CalibrationError("whitening scales: wrong layer count");
    }

    Checkpoint ckpt;
    ckpt.header["family"] = "B";
    ckpt.set_config(cfg, capacity);
    ckpt.header["retained_ratio"] = rho;

    add_common_front(ckpt, model);
    for (size_t li = 0; li < cfg.n_layers; ++li) {
        const std::string base = "layers." + std::to_string(li) + ".";
        for (size_t proj = 0; proj < 7; ++proj) {
            size_t d_in = 0, d_out = 0;
            proj_dims(cfg, proj, d_in, d_out);
            const std::vector<double>& s = scales[li][proj];
            if (s.size() != d_in) {
                throw CalibrationError("whitening scale for '" + base +
                                       kProjNames[proj] + "' has wrong length");
            }
            for (double v : s) {
                if (!(v >= 1e-8) || !std::isfinite(v)) {
                    throw CalibrationError("degenerate whitening scale in '" + base +
                                           kProjNames[proj] + "'");
                }
            }
            // Factor S*W; the normalizer folds S^-1 back into the input factor.
            const Tensor2Dd& w = model.layers[li].proj(proj);
            Tensor2Dd scaled(w.rows, w.cols);
            for (size_t i = 0; i < w.rows; ++i) {
                for (size_t j = 0; j < w.cols; ++j) {
                    scaled.at(i, j) = s[i] * w.at(i, j);
                }
            }
            const size_t r = rank_for_ratio(rho, d_in, d_out);
            const SvdResult svd = truncated_svd(scaled, r);
            add_f64(ckpt, base + kProjNames[proj] + ".Uf", svd.a);
            add_f64(ckpt, base + kProjNames[proj] + ".Vt", svd.b);
            add_vec(ckpt, base + kProjNames[proj] + ".scale", s);
        }
        add_layer_gammas(ckpt, model, li);
    }
    add_common_back(ckpt, model);
    return ckpt;
}

Checkpoint compress_whitened(const DenseModel& model, double rho,
                             uint64_t calib_seed, size_t calib_tokens,
                             size_t capacity) {
    if (calib_tokens < 16) {
        throw CalibrationError("whitened compression needs calib_tokens >= 16");
    }
    const CalibMoments moments = calibrate_dense(model, calib_seed, calib_tokens);
    std::vector<ProjScales> scales(model.config.n_layers);
    for (size_t li = 0; li < model.config.n_layers; ++li) {
        const auto& m = moments.layers[li];
        const std::vector<double> attn = scales_from_moments(m.attn_in);
        scales[li][0] = attn;
        scales[li][1] = attn;
        scales[li][2] = attn;
        scales[li][3] = scales_from_moments(m.o_in);
        const std::vector<double> mlp = scales_from_moments(m.mlp_in);
        scales[li][4] = mlp;
        scales[li][5] = mlp;
        scales[li][6] = scales_from_moments(m.down_in);
    }
    return compress_whitened_with_scales(model, rho, scales, capacity);
}

Checkpoint compress_basis_shared(const DenseModel& model, double rho,
                                 size_t group_size, size_t capacity) {
    const ModelConfig& cfg = model.config;
    if (group_size < 1 || cfg.n_layers % group_size != 0) {
        throw ConfigError("group_size must divide n_layers");
    }
    const size_t n_groups = cfg.n_layers / group_size;

    Checkpoint ckpt;
    ckpt.header["family"] = "C";
    ckpt.set_config(cfg, capacity);
    ckpt.header["retained_ratio"] = rho;
    ckpt.header["group_size"] = group_size;
    std::vector<size_t> layer_groups(cfg.n_layers);
    for (size_t li = 0; li < cfg.n_layers; ++li) layer_groups[li] = li / group_size;
    ckpt.header["layer_groups"] = layer_groups;

    add_common_front(ckpt, model);

    // Stack each group's weights along the output dimension and factor once;
    // the shared input-side basis is stored per group, the per-layer output
    // factors are the column slabs of V^T.
    std::vector<std::vector<Tensor2Dd>> layer_b(cfg.n_layers);
    for (auto& v : layer_b) v.resize(7);
    for (size_t proj = 0; proj < 7; ++proj) {
        size_t d_in = 0, d_out = 0;
        proj_dims(cfg, proj, d_in, d_out);
        const size_t r = rank_for_ratio(rho, d_in, d_out);
        for (size_t g = 0; g < n_groups; ++g) {
            Tensor2Dd stacked(d_in, group_size * d_out);
            for (size_t m = 0; m < group_size; ++m) {
                const Tensor2Dd& w = model.layers[g * group_size + m].proj(proj);
                for (size_t i = 0; i < d_in; ++i) {
                    std::copy(w.row(i).begin(), w.row(i).end(),
                              stacked.row(i).data() + m * d_out);
                }
            }
            const SvdResult svd = truncated_svd(stacked, r);
            add_f64(ckpt,
                    "shared." + std::string(kProjNames[proj]) + "." +
                        std::to_string(g) + ".A",
                    svd.a);
            for (size_t m = 0; m < group_size; ++m) {
                Tensor2Dd b(r, d_out);
                for (size_t i = 0; i < r; ++i) {
                    const double* src = svd.b.row(i).data() + m * d_out;
                    std::copy(src, src + d_out, b.row(i).begin());
                }
                layer_b[g * group_size + m][proj] = std::move(b);
            }
        }
    }

    for (size_t li = 0; li < cfg.n_layers; ++li) {
        const std::string base = "layers." + std::to_string(li) + ".";
        for (size_t proj = 0; proj < 7; ++proj) {
            add_f64(ckpt, base + kProjNames[proj] + ".B", layer_b[li][proj]);
        }
        add_layer_gammas(ckpt, model, li);
    }
    add_common_back(ckpt, model);
    return ckpt;
}

Checkpoint compress(const DenseModel& model, const CompressionSpec& spec,
                    size_t capacity) {
    switch (spec.method) {
        case CompressMethod::plain:
            return compress_plain(model, spec.retained_ratio, capacity);
        case CompressMethod::whitened:
            return compress_whitened(model, spec.retained_ratio, spec.calib_seed,
                                     spec.calib_tokens, capacity);
        case CompressMethod::basis_shared:
            return compress_basis_shared(model, spec.retained_ratio,
                                         spec.group_size, capacity);
    }
    throw ConfigError("unknown compression method");
}

size_t dense_projection_param_count(const ModelConfig& cfg) {
    size_t per_layer = 0;
    for (size_t proj = 0; proj < 7; ++proj) {
        size_t d_in = 0, d_out = 0;
        proj_dims(cfg, proj, d_in, d_out);
        per_layer += d_in * d_out;
    }
    return per_layer * cfg.n_layers;
}

size_t checkpoint_factor_param_count(const Checkpoint& ckpt) {
    size_t count = 0;
    for (const CheckpointTensor& t : ckpt.tensors) {
        const bool factor = t.name.ends_with(".A") || t.name.ends_with(".B") ||
                            t.name.ends_with(".Uf") || t.name.ends_with(".Vt");
        if (factor) count += t.element_count();
    }
    return count;
}

}  // namespace fsvd
