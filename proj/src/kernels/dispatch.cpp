// Runtime kernel-variant selection. The best variant the CPU supports wins;
// FSVD_KERNELS=scalar|avx2 overrides for debugging and equivalence tests.

#include "kernels_tables.hpp"

#include <cstdlib>
#include <cstring>
#include <vector>

namespace fsvd::kern {

namespace {

std::vector<Variant> build_variants() {
    std::vector<Variant> v;
    v.push_back({"scalar", &kScalarF32, &kScalarF64});
#ifdef FSVD_HAVE_AVX2_TU
    if (avx2_cpu_supported()) {
        v.push_back({"avx2", &kAvx2F32, &kAvx2F64});
    }
#endif
    return v;
}

const std::vector<Variant>& variant_list() {
    static const std::vector<Variant> v = build_variants();
    return v;
}

const Variant* select_initial() {
    const auto& list = variant_list();
    if (const char* env = std::getenv("FSVD_KERNELS")) {
        for (const Variant& v : list) {
            if (std::strcmp(env, v.name) == 0) return &v;
        }
    }
    return &list.back();
}

const Variant*& active_slot() {
    static const Variant* slot = select_initial();
    return slot;
}

}  // namespace

std::span<const Variant> variants() {
    return {variant_list().data(), variant_list().size()};
}

const Variant& active() {
    return *active_slot();
}

bool force_variant(const char* name) {
    for (const Variant& v : variant_list()) {
        if (std::strcmp(name, v.name) == 0) {
            active_slot() = &v;
            return true;
        }
    }
    return false;
}

}  // namespace fsvd::kern
