#pragma once

// FSVD15 checkpoint container: 6-byte magic, u16 version, u32 header length,
// UTF-8 JSON header, then 64-byte-aligned little-endian f32 tensor blobs.
// Tensor offsets in the header index are relative to the payload base (the
// first 64-byte boundary after the header), so they do not depend on header
// length. Unknown header fields survive a read/write round trip.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsvd/model.hpp"
#include "fsvd/tensor.hpp"

namespace fsvd {

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr char kCheckpointMagic[6] = {'F', 'S', 'V', 'D', '1', '5'};
inline constexpr uint16_t kCheckpointVersion = 1;

struct CheckpointTensor {
    std::string name;
    std::vector<size_t> shape;
    std::vector<float> data;

    size_t element_count() const {
        size_t n = 1;
        for (size_t d : shape) n *= d;
        return n;
    }
};

struct Checkpoint {
    // Full header document. "tensors" is rebuilt on write; everything else is
    // caller-owned metadata (family, config, capacity, group fields, ...).
    nlohmann::ordered_json header;
    std::vector<CheckpointTensor> tensors;

    char family() const;
    ModelConfig config() const;
    size_t capacity() const;

    const CheckpointTensor* find(const std::string& name) const;
    const CheckpointTensor& require(const std::string& name) const;
    CheckpointTensor& add(const std::string& name, std::vector<size_t> shape);

    void set_config(const ModelConfig& cfg, size_t capacity);
};

std::vector<uint8_t> write_checkpoint(const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::vector<uint8_t>& bytes);

void write_checkpoint_file(const Checkpoint& ckpt, const std::string& path);
Checkpoint read_checkpoint_file(const std::string& path);

// Tensor helpers (tensors are stored f32 on disk; f64 callers upcast).
Tensor2Df tensor_from_blob(const CheckpointTensor& t);
CheckpointTensor blob_from_tensor(const std::string& name, const Tensor2Df& t);

}  // namespace fsvd
