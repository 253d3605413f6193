#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace fairshare {

using Bytes = std::vector<uint8_t>;
using Digest = std::array<uint8_t, 32>;
using ByteView = std::span<const uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline void append(Bytes& out, ByteView data) {
    out.insert(out.end(), data.begin(), data.end());
}

inline void append(Bytes& out, std::string_view s) {
    out.insert(out.end(), s.begin(), s.end());
}

inline void append_u16(Bytes& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void append_u32(Bytes& out, uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void append_u64(Bytes& out, uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline uint16_t read_u16(ByteView in, size_t off) {
    return static_cast<uint16_t>((uint16_t(in[off]) << 8) | in[off + 1]);
}

inline uint32_t read_u32(ByteView in, size_t off) {
    uint32_t v = 0;
    for (size_t i = 0; i < 4; ++i) v = (v << 8) | in[off + i];
    return v;
}

inline uint64_t read_u64(ByteView in, size_t off) {
    uint64_t v = 0;
    for (size_t i = 0; i < 8; ++i) v = (v << 8) | in[off + i];
    return v;
}

inline std::string to_hex(ByteView data) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (uint8_t b : data) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0x0f]);
    }
    return s;
}

inline std::string to_hex(const Digest& d) {
    return to_hex(ByteView(d.data(), d.size()));
}

inline Bytes digest_bytes(const Digest& d) {
    return Bytes(d.begin(), d.end());
}

}  // namespace fairshare
