#pragma once

#include <bit>
#include <cstdint>
#include <cstring>

#include "fairshare/bytes.hpp"

namespace fairshare {

// Keccak-256 (the pre-FIPS padding variant used by Ethereum): 0x01 domain
// byte, rate 1088 bits, 32-byte output.
namespace detail {

inline uint64_t rotl64(uint64_t x, unsigned n) {
    return (x << n) | (x >> (64 - n));
}

inline void keccak_f1600(uint64_t st[25]) {
    static constexpr uint64_t RNDC[24] = {
        0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
        0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
        0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
        0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
        0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
        0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
        0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
        0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};
    static constexpr unsigned ROTC[24] = {1,  3,  6,  10, 15, 21, 28, 36,
                                          45, 55, 2,  14, 27, 41, 56, 8,
                                          25, 43, 62, 18, 39, 61, 20, 44};
    static constexpr unsigned PILN[24] = {10, 7,  11, 17, 18, 3,  5,  16,
                                          8,  21, 24, 4,  15, 23, 19, 13,
                                          12, 2,  20, 14, 22, 9,  6,  1};
    uint64_t bc[5];
    for (int round = 0; round < 24; ++round) {
        // theta
        for (int i = 0; i < 5; ++i)
            bc[i] = st[i] ^ st[i + 5] ^ st[i + 10] ^ st[i + 15] ^ st[i + 20];
        for (int i = 0; i < 5; ++i) {
            uint64_t t = bc[(i + 4) % 5] ^ rotl64(bc[(i + 1) % 5], 1);
            for (int j = 0; j < 25; j += 5) st[j + i] ^= t;
        }
        // rho + pi
        uint64_t t = st[1];
        for (int i = 0; i < 24; ++i) {
            int j = PILN[i];
            bc[0] = st[j];
            st[j] = rotl64(t, ROTC[i]);
            t = bc[0];
        }
        // chi
        for (int j = 0; j < 25; j += 5) {
            for (int i = 0; i < 5; ++i) bc[i] = st[j + i];
            for (int i = 0; i < 5; ++i)
                st[j + i] = bc[i] ^ (~bc[(i + 1) % 5] & bc[(i + 2) % 5]);
        }
        // iota
        st[0] ^= RNDC[round];
    }
}

}  // namespace detail

class Keccak256 {
  public:
    static constexpr size_t kRate = 136;  // 1088-bit rate

    void update(ByteView data) {
        for (uint8_t b : data) {
            buf_[fill_++] ^= b;
            if (fill_ == kRate) {
                absorb();
            }
        }
    }

    void update(std::string_view s) {
        update(ByteView(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
    }

    Digest finalize() {
        buf_[fill_] ^= 0x01;
        buf_[kRate - 1] ^= 0x80;
        absorb();
        Digest out{};
        std::memcpy(out.data(), state_bytes(), out.size());
        return out;
    }

  private:
    void absorb() {
        for (size_t i = 0; i < kRate / 8; ++i) {
            uint64_t w;
            std::memcpy(&w, buf_ + 8 * i, 8);
            state_[i] ^= le64(w);
        }
        detail::keccak_f1600(state_);
        std::memset(buf_, 0, sizeof(buf_));
        fill_ = 0;
    }

    const uint8_t* state_bytes() {
        for (size_t i = 0; i < 4; ++i) out_words_[i] = le64(state_[i]);
        return reinterpret_cast<const uint8_t*>(out_words_);
    }

    static uint64_t le64(uint64_t v) {
        if constexpr (std::endian::native == std::endian::little) return v;
        uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xff);
        return r;
    }

    uint64_t state_[25] = {};
    uint64_t out_words_[4] = {};
    uint8_t buf_[kRate] = {};
    size_t fill_ = 0;
};

inline Digest keccak256(ByteView data) {
    Keccak256 h;
    h.update(data);
    return h.finalize();
}

inline Digest keccak256(std::string_view s) {
    Keccak256 h;
    h.update(s);
    return h.finalize();
}

// hash(data) -> 32-byte digest used throughout the protocol.
inline Digest hash_bytes(ByteView data) {
    return keccak256(data);
}

}  // namespace fairshare
