#include "fsvd/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "fsvd/crc32.hpp"

namespace fsvd {

namespace {

constexpr size_t kAlign = 64;

size_t align_up(size_t v) { return (v + kAlign - 1) / kAlign * kAlign; }

}  // namespace

char Checkpoint::family() const {
    const auto it = header.find("family");
    if (it == header.end() || !it->is_string()) {
        throw FormatError("checkpoint header missing 'family'");
    }
    const std::string f = it->get<std::string>();
    if (f != "A" && f != "B" && f != "C") {
        throw FormatError("checkpoint family must be A, B or C, got '" + f + "'");
    }
    return f[0];
}

ModelConfig Checkpoint::config() const {
    const auto it = header.find("config");
    if (it == header.end() || !it->is_object()) {
        throw FormatError("checkpoint header missing 'config'");
    }
    ModelConfig cfg;
    cfg.n_layers = it->at("n_layers").get<size_t>();
    cfg.d_model = it->at("d_model").get<size_t>();
    cfg.n_heads = it->at("n_heads").get<size_t>();
    cfg.d_head = it->at("d_head").get<size_t>();
    cfg.d_ff = it->at("d_ff").get<size_t>();
    cfg.vocab = it->at("vocab").get<size_t>();
    cfg.rope_base = it->at("rope_base").get<double>();
    cfg.norm_eps = it->at("norm_eps").get<double>();
    return cfg;
}

size_t Checkpoint::capacity() const {
    const auto it = header.find("capacity");
    if (it == header.end()) return 0;
    return it->get<size_t>();
}

const CheckpointTensor* Checkpoint::find(const std::string& name) const {
    for (const CheckpointTensor& t : tensors) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

const CheckpointTensor& Checkpoint::require(const std::string& name) const {
    const CheckpointTensor* t = find(name);
    if (!t) throw FormatError("checkpoint missing tensor '" + name + "'");
    return *t;
}

CheckpointTensor& Checkpoint::add(const std::string& name, std::vector<size_t> shape) {
    CheckpointTensor t;
    t.name = name;
    t.shape = std::move(shape);
    t.data.resize(t.element_count(), 0.0f);
    tensors.push_back(std::move(t));
    return tensors.back();
}

void Checkpoint::set_config(const ModelConfig& cfg, size_t cap) {
    header["config"] = {
        {"n_layers", cfg.n_layers}, {"d_model", cfg.d_model},
        {"n_heads", cfg.n_heads},   {"d_head", cfg.d_head},
        {"d_ff", cfg.d_ff},         {"vocab", cfg.vocab},
        {"rope_base", cfg.rope_base}, {"norm_eps", cfg.norm_eps},
    };
    header["capacity"] = cap;
}

std::vector<uint8_t> write_checkpoint(const Checkpoint& ckpt) {
    ckpt.family();            // validates presence
    ckpt.config().validate();  // rejects zero-layer and malformed configs

    // Build the tensor index with payload-relative offsets.
    nlohmann::ordered_json index = nlohmann::ordered_json::array();
    size_t offset = 0;
    for (const CheckpointTensor& t : ckpt.tensors) {
        if (t.shape.empty() || t.element_count() == 0) {
            throw FormatError("tensor '" + t.name + "' has empty shape");
        }
        if (t.data.size() != t.element_count()) {
            throw FormatError("tensor '" + t.name + "' data length mismatch");
        }
        const size_t bytes = t.data.size() * sizeof(float);
        index.push_back({
            {"name", t.name},
            {"dtype", "f32"},
            {"shape", t.shape},
            {"offset", offset},
            {"crc32", crc32(t.data.data(), bytes)},
        });
        offset = align_up(offset + bytes);
    }
    const size_t payload_bytes = offset;

    nlohmann::ordered_json header = ckpt.header;
    header["tensors"] = std::move(index);
    const std::string header_str = header.dump();
    if (header_str.size() > UINT32_MAX) throw FormatError("header too large");

    const size_t payload_base = align_up(12 + header_str.size());
    std::vector<uint8_t> out(payload_base + payload_bytes, 0u);
    std::memcpy(out.data(), kCheckpointMagic, 6);
    const uint16_t version = kCheckpointVersion;
    std::memcpy(out.data() + 6, &version, 2);
    const auto header_len = static_cast<uint32_t>(header_str.size());
    std::memcpy(out.data() + 8, &header_len, 4);
    std::memcpy(out.data() + 12, header_str.data(), header_str.size());

    size_t pos = 0;
    for (const CheckpointTensor& t : ckpt.tensors) {
        const size_t bytes = t.data.size() * sizeof(float);
        std::memcpy(out.data() + payload_base + pos, t.data.data(), bytes);
        pos = align_up(pos + bytes);
    }
    return out;
}

Checkpoint read_checkpoint(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 12) throw FormatError("file too short for FSVD15 header");
    if (std::memcmp(bytes.data(), kCheckpointMagic, 6) != 0) {
        throw FormatError("bad magic (not an FSVD15 file)");
    }
    uint16_t version = 0;
    std::memcpy(&version, bytes.data() + 6, 2);
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported version " + std::to_string(version));
    }
    uint32_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + 8, 4);
    if (12 + static_cast<size_t>(header_len) > bytes.size()) {
        throw FormatError("truncated header");
    }

    Checkpoint ckpt;
    try {
        ckpt.header = nlohmann::ordered_json::parse(
            bytes.begin() + 12, bytes.begin() + 12 + header_len);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("header is not valid JSON: ") + e.what());
    }
    const auto it = ckpt.header.find("tensors");
    if (it == ckpt.header.end() || !it->is_array()) {
        throw FormatError("header missing tensor index");
    }

    const size_t payload_base = align_up(12 + header_len);
    size_t prev_end = 0;
    bool first = true;
    for (const auto& entry : *it) {
        CheckpointTensor t;
        t.name = entry.at("name").get<std::string>();
        if (entry.at("dtype").get<std::string>() != "f32") {
            throw FormatError("tensor '" + t.name + "' has unsupported dtype");
        }
        t.shape = entry.at("shape").get<std::vector<size_t>>();
        const auto offset = entry.at("offset").get<size_t>();
        const auto crc_expected = entry.at("crc32").get<uint32_t>();

        if (offset % kAlign != 0) {
            throw FormatError("tensor '" + t.name + "' offset not 64-byte aligned");
        }
        if (!first && offset < prev_end) {
            throw FormatError("tensor '" + t.name + "' overlaps previous tensor");
        }
        const size_t count = t.element_count();
        if (count == 0) throw FormatError("tensor '" + t.name + "' has empty shape");
        const size_t bytes_len = count * sizeof(float);
        if (payload_base + offset + bytes_len > bytes.size()) {
            throw FormatError("tensor '" + t.name + "' extends past end of file");
        }
        t.data.resize(count);
        std::memcpy(t.data.data(), bytes.data() + payload_base + offset, bytes_len);
        if (crc32(t.data.data(), bytes_len) != crc_expected) {
            throw FormatError("tensor '" + t.name + "' failed checksum");
        }
        prev_end = offset + bytes_len;
        first = false;
        ckpt.tensors.push_back(std::move(t));
    }
    return ckpt;
}

void write_checkpoint_file(const Checkpoint& ckpt, const std::string& path) {
    const std::vector<uint8_t> bytes = write_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to '" + path + "'");
}

Checkpoint read_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return read_checkpoint(bytes);
}

Tensor2Df tensor_from_blob(const CheckpointTensor& t) {
    if (t.shape.size() != 2) {
        throw FormatError("tensor '" + t.name + "' is not 2-D");
    }
    return {t.shape[0], t.shape[1], t.data};
}

CheckpointTensor blob_from_tensor(const std::string& name, const Tensor2Df& t) {
    CheckpointTensor out;
    out.name = name;
    out.shape = {t.rows, t.cols};
    out.data = t.data;
    return out;
}

}  // namespace fsvd
