#pragma once

// CanonicalModel: the single factorized representation every checkpoint
// family normalizes into. Family A loads directly, family B folds its
// diagonal scale into the input factor, family C materializes one storage
// instance per shared basis and aliases it into every member layer. The
// packed FFN input factor [A_up | A_gate] is precomputed here.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fsvd/checkpoint.hpp"
#include "fsvd/model.hpp"
#include "fsvd/tensor.hpp"

namespace fsvd {

struct NormalizeError : std::runtime_error {
    explicit NormalizeError(const std::string& msg) : std::runtime_error(msg) {}
};

template <typename T>
struct FactorizedLinear {
    std::shared_ptr<Tensor2D<T>> a;  // d_in x rank
    std::shared_ptr<Tensor2D<T>> b;  // rank x d_out
    size_t rank = 0;
    std::optional<size_t> shared_group;
};

template <typename T>
struct CanonicalLayer {
    FactorizedLinear<T> q, k, v, o, up, gate, down;
    std::vector<T> attn_gamma, mlp_gamma;
    // Offline-packed FFN input factor [A_up | A_gate] and its split point.
    Tensor2D<T> a_ug;
    size_t r_up = 0;

    FactorizedLinear<T>& proj(size_t idx) {
        FactorizedLinear<T>* p[7] = {&q, &k, &v, &o, &up, &gate, &down};
        return *p[idx];
    }
    const FactorizedLinear<T>& proj(size_t idx) const {
        const FactorizedLinear<T>* p[7] = {&q, &k, &v, &o, &up, &gate, &down};
        return *p[idx];
    }
};

template <typename T>
struct CanonicalModel {
    ModelConfig config;
    size_t capacity = 0;
    Tensor2D<T> embedding, head;
    std::vector<T> final_gamma;
    std::vector<CanonicalLayer<T>> layers;
    // "proj:group" -> the single storage instance aliased into member layers.
    std::map<std::string, std::shared_ptr<Tensor2D<T>>> shared_basis_table;
};

// Column-concatenation [a_up | a_gate]; exact value copy, no arithmetic.
template <typename T>
Tensor2D<T> pack_ffn(const Tensor2D<T>& a_up, const Tensor2D<T>& a_gate) {
    if (a_up.rows != a_gate.rows) {
        throw ShapeError("pack_ffn: up/gate input factors disagree on rows");
    }
    Tensor2D<T> packed(a_up.rows, a_up.cols + a_gate.cols);
    for (size_t i = 0; i < a_up.rows; ++i) {
        T* dst = packed.row(i).data();
        const auto up_row = a_up.row(i);
        const auto gate_row = a_gate.row(i);
        std::copy(up_row.begin(), up_row.end(), dst);
        std::copy(gate_row.begin(), gate_row.end(), dst + a_up.cols);
    }
    return packed;
}

template <typename T>
CanonicalModel<T> normalize(const Checkpoint& ckpt);

// Re-export a canonical model in the native (family A) layout. Shared bases
// are materialized per layer; the tensor values are preserved exactly.
Checkpoint export_family_a(const CanonicalModel<float>& model);
Checkpoint export_family_a(const CanonicalModel<double>& model);

extern template CanonicalModel<float> normalize<float>(const Checkpoint&);
extern template CanonicalModel<double> normalize<double>(const Checkpoint&);

}  // namespace fsvd
