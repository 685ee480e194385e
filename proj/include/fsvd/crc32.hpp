#pragma once

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).

#include <cstddef>
#include <cstdint>

namespace fsvd {

inline uint32_t crc32_update(uint32_t crc, const void* bytes, size_t len) {
    static const auto table = [] {
        struct Table {
            uint32_t v[256];
        } t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) {
                c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
            }
            t.v[i] = c;
        }
        return t;
    }();
    const auto* p = static_cast<const unsigned char*>(bytes);
    crc = ~crc;
    for (size_t i = 0; i < len; ++i) {
        crc = table.v[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
    }
    return ~crc;
}

inline uint32_t crc32(const void* bytes, size_t len) {
    return crc32_update(0u, bytes, len);
}

}  // namespace fsvd
