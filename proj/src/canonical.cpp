#include "fsvd/canonical.hpp"

#include <cmath>

namespace fsvd {

namespace {

template <typename T>
std::shared_ptr<Tensor2D<T>> load_tensor(const Checkpoint& ckpt,
                                         const std::string& name, size_t rows,
                                         size_t cols) {
    const CheckpointTensor* blob = ckpt.find(name);
    if (!blob) throw NormalizeError("missing tensor '" + name + "'");
    if (blob->shape.size() != 2 || blob->shape[0] != rows || blob->shape[1] != cols) {
        throw NormalizeError("tensor '" + name + "' has unexpected shape");
    }
    auto t = std::make_shared<Tensor2D<T>>(rows, cols);
    for (size_t i = 0; i < blob->data.size(); ++i) {
        t->data[i] = static_cast<T>(blob->data[i]);
    }
    return t;
}

template <typename T>
std::vector<T> load_vector(const Checkpoint& ckpt, const std::string& name,
                           size_t len) {
    const CheckpointTensor* blob = ckpt.find(name);
    if (!blob) throw NormalizeError("missing tensor '" + name + "'");
    if (blob->element_count() != len) {
        throw NormalizeError("tensor '" + name + "' has unexpected length");
    }
    std::vector<T> out(len);
    for (size_t i = 0; i < len; ++i) out[i] = static_cast<T>(blob->data[i]);
    return out;
}

// d_in/d_out of projection `proj` (index into kProjNames) for this config.
void proj_dims(const ModelConfig& cfg, size_t proj, size_t& d_in, size_t& d_out) {
    switch (proj) {
        case 4:  // up
        case 5:  // gate
            d_in = cfg.d_model;
            d_out = cfg.d_ff;
            break;
        case 6:  // down
            d_in = cfg.d_ff;
            d_out = cfg.d_model;
            break;
        default:
            d_in = cfg.d_model;
            d_out = cfg.d_model;
            break;
    }
}

template <typename T>
FactorizedLinear<T> load_family_a_proj(const Checkpoint& ckpt, size_t layer,
                                       size_t proj, const ModelConfig& cfg) {
    size_t d_in = 0, d_out = 0;
    proj_dims(cfg, proj, d_in, d_out);
    const std::string base =
        "layers." + std::to_string(layer) + "." + kProjNames[proj];
    const CheckpointTensor* a_blob = ckpt.find(base + ".A");
    if (!a_blob) throw NormalizeError("missing tensor '" + base + ".A'");
    if (a_blob->shape.size() != 2 || a_blob->shape[0] != d_in) {
        throw NormalizeError("tensor '" + base + ".A' has unexpected shape");
    }
    const size_t rank = a_blob->shape[1];

    FactorizedLinear<T> out;
    out.a = load_tensor<T>(ckpt, base + ".A", d_in, rank);
    out.b = load_tensor<T>(ckpt, base + ".B", rank, d_out);
    out.rank = rank;
    return out;
}

template <typename T>
FactorizedLinear<T> load_family_b_proj(const Checkpoint& ckpt, size_t layer,
                                       size_t proj, const ModelConfig& cfg) {
    size_t d_in = 0, d_out = 0;
    proj_dims(cfg, proj, d_in, d_out);
    const std::string base =
        "layers." + std::to_string(layer) + "." + kProjNames[proj];
    const CheckpointTensor* uf_blob = ckpt.find(base + ".Uf");
    if (!uf_blob) throw NormalizeError("missing tensor '" + base + ".Uf'");
    if (uf_blob->shape.size() != 2 || uf_blob->shape[0] != d_in) {
        throw NormalizeError("tensor '" + base + ".Uf' has unexpected shape");
    }
    const size_t rank = uf_blob->shape[1];

    FactorizedLinear<T> out;
    out.a = load_tensor<T>(ckpt, base + ".Uf", d_in, rank);
    out.b = load_tensor<T>(ckpt, base + ".Vt", rank, d_out);
    out.rank = rank;

    // Fold: A = S^-1 * Uf, i.e. scale row i of Uf by 1/s_i.
    const std::vector<T> s = load_vector<T>(ckpt, base + ".scale", d_in);
    for (size_t i = 0; i < d_in; ++i) {
        if (!(std::abs(static_cast<double>(s[i])) > 0.0)) {
            throw NormalizeError("tensor '" + base + ".scale' has zero entry");
        }
        const T inv = T(1) / s[i];
        for (size_t j = 0; j < rank; ++j) out.a->at(i, j) *= inv;
    }
    return out;
}

template <typename T>
void load_family_c(const Checkpoint& ckpt, CanonicalModel<T>& model) {
    const ModelConfig& cfg = model.config;
    const auto groups_it = ckpt.header.find("layer_groups");
    if (groups_it == ckpt.header.end() || !groups_it->is_array() ||
        groups_it->size() != cfg.n_layers) {
        throw NormalizeError("family C header missing per-layer group references");
    }
    const auto layer_groups = groups_it->get<std::vector<size_t>>();

    for (size_t proj = 0; proj < 7; ++proj) {
        size_t d_in = 0, d_out = 0;
        proj_dims(cfg, proj, d_in, d_out);
        for (size_t li = 0; li < cfg.n_layers; ++li) {
            const size_t group = layer_groups[li];
            const std::string key =
                std::string(kProjNames[proj]) + ":" + std::to_string(group);
            auto it = model.shared_basis_table.find(key);
            if (it == model.shared_basis_table.end()) {
                const std::string basis_name = "shared." +
                                               std::string(kProjNames[proj]) + "." +
                                               std::to_string(group) + ".A";
                if (!ckpt.find(basis_name)) {
                    throw NormalizeError("layer " + std::to_string(li) +
                                         " references unknown group '" +
                                         std::to_string(group) + "' (no '" +
                                         basis_name + "')");
                }
                const size_t rank = ckpt.find(basis_name)->shape[1];
                it = model.shared_basis_table
                         .emplace(key, load_tensor<T>(ckpt, basis_name, d_in, rank))
                         .first;
            }
            const std::string b_name = "layers." + std::to_string(li) + "." +
                                       kProjNames[proj] + ".B";
            FactorizedLinear<T>& dst = model.layers[li].proj(proj);
            dst.a = it->second;  // physically shared storage
            dst.rank = it->second->cols;
            dst.b = load_tensor<T>(ckpt, b_name, dst.rank, d_out);
            dst.shared_group = layer_groups[li];
        }
    }
}

}  // namespace

template <typename T>
CanonicalModel<T> normalize(const Checkpoint& ckpt) {
    const char family = ckpt.family();
    CanonicalModel<T> model;
    model.config = ckpt.config();
    model.config.validate();
    model.capacity = ckpt.capacity();
    const ModelConfig& cfg = model.config;

    model.embedding = *load_tensor<T>(ckpt, "embedding", cfg.vocab, cfg.d_model);
    model.head = *load_tensor<T>(ckpt, "head", cfg.d_model, cfg.vocab);
    model.final_gamma = load_vector<T>(ckpt, "final_gamma", cfg.d_model);

    model.layers.resize(cfg.n_layers);
    for (size_t li = 0; li < cfg.n_layers; ++li) {
        const std::string base = "layers." + std::to_string(li) + ".";
        model.layers[li].attn_gamma =
            load_vector<T>(ckpt, base + "attn_gamma", cfg.d_model);
        model.layers[li].mlp_gamma =
            load_vector<T>(ckpt, base + "mlp_gamma", cfg.d_model);
    }

    if (family == 'A' || family == 'B') {
        for (size_t li = 0; li < cfg.n_layers; ++li) {
            for (size_t proj = 0; proj < 7; ++proj) {
                model.layers[li].proj(proj) =
                    family == 'A' ? load_family_a_proj<T>(ckpt, li, proj, cfg)
                                  : load_family_b_proj<T>(ckpt, li, proj, cfg);
            }
        }
    } else {
        load_family_c(ckpt, model);
    }

    for (CanonicalLayer<T>& layer : model.layers) {
        layer.a_ug = pack_ffn(*layer.up.a, *layer.gate.a);
        layer.r_up = layer.up.rank;
    }
    return model;
}

template CanonicalModel<float> normalize<float>(const Checkpoint&);
template CanonicalModel<double> normalize<double>(const Checkpoint&);

namespace {

template <typename T>
Checkpoint export_family_a_impl(const CanonicalModel<T>& model) {
    Checkpoint ckpt;
    ckpt.header["family"] = "A";
    ckpt.set_config(model.config, model.capacity);

    auto add2d = [&](const std::string& name, const Tensor2D<T>& t) {
        CheckpointTensor& blob = ckpt.add(name, {t.rows, t.cols});
        for (size_t i = 0; i < t.data.size(); ++i) {
            blob.data[i] = static_cast<float>(t.data[i]);
        }
    };
    auto add1d = [&](const std::string& name, const std::vector<T>& v) {
        CheckpointTensor& blob = ckpt.add(name, {v.size()});
        for (size_t i = 0; i < v.size(); ++i) {
            blob.data[i] = static_cast<float>(v[i]);
        }
    };

    add2d("embedding", model.embedding);
    for (size_t li = 0; li < model.layers.size(); ++li) {
        const CanonicalLayer<T>& layer = model.layers[li];
        const std::string base = "layers." + std::to_string(li) + ".";
        for (size_t proj = 0; proj < 7; ++proj) {
            const FactorizedLinear<T>& fl = layer.proj(proj);
            add2d(base + kProjNames[proj] + ".A", *fl.a);
            add2d(base + kProjNames[proj] + ".B", *fl.b);
        }
        add1d(base + "attn_gamma", layer.attn_gamma);
        add1d(base + "mlp_gamma", layer.mlp_gamma);
    }
    add1d("final_gamma", model.final_gamma);
    add2d("head", model.head);
    return ckpt;
}

}  // namespace

Checkpoint export_family_a(const CanonicalModel<float>& model) {
    return export_family_a_impl(model);
}
Checkpoint export_family_a(const CanonicalModel<double>& model) {
    return export_family_a_impl(model);
}

}  // namespace fsvd
