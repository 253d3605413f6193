#pragma once

#include <cstdint>
#include <string>

#include "fairshare/bytes.hpp"
#include "fairshare/errors.hpp"
#include "fairshare/keccak.hpp"

namespace fairshare {

// Source of random bytes for all randomized operations. Kept abstract so
// tests can force specific values (unit blinding factors, fixed exponents).
class RandomSource {
  public:
    virtual ~RandomSource() = default;
    virtual void fill(uint8_t* out, size_t n) = 0;

    Bytes bytes(size_t n) {
        Bytes b(n);
        fill(b.data(), n);
        return b;
    }

    uint64_t next_u64() {
        uint8_t b[8];
        fill(b, 8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | b[i];
        return v;
    }
};

// Counter-mode generator over Keccak-256. Every scenario derives all of its
// randomness from one 64-bit seed so runs replay bit-identically on any
// platform.
class DetRng final : public RandomSource {
  public:
    explicit DetRng(uint64_t seed) {
        Keccak256 h;
        h.update("fairshare.rng.v1");
        Bytes s;
        append_u64(s, seed);
        h.update(s);
        key_ = h.finalize();
    }

    explicit DetRng(const Digest& key) : key_(key) {}

    // Independent child stream; the label keeps party/purpose streams apart.
    DetRng child(std::string_view label) const {
        Keccak256 h;
        h.update(ByteView(key_.data(), key_.size()));
        uint8_t sep = 0x00;
        h.update(ByteView(&sep, 1));
        h.update(label);
        return DetRng(h.finalize());
    }

    void fill(uint8_t* out, size_t n) override {
        while (n > 0) {
            if (avail_ == 0) refill();
            size_t take = n < avail_ ? n : avail_;
            std::memcpy(out, block_.data() + (block_.size() - avail_), take);
            out += take;
            n -= take;
            avail_ -= take;
        }
    }

  private:
    void refill() {
        Keccak256 h;
        h.update(ByteView(key_.data(), key_.size()));
        Bytes ctr;
        append_u64(ctr, counter_++);
        h.update(ctr);
        block_ = h.finalize();
        avail_ = block_.size();
    }

    Digest key_{};
    Digest block_{};
    size_t avail_ = 0;
    uint64_t counter_ = 0;
};

// Replays a fixed byte string; used by tests that need a forced exponent.
class FixedRandom final : public RandomSource {
  public:
    explicit FixedRandom(Bytes bytes) : bytes_(std::move(bytes)) {}

    void fill(uint8_t* out, size_t n) override {
        for (size_t i = 0; i < n; ++i) {
            if (pos_ >= bytes_.size())
                throw CryptoError("FixedRandom exhausted");
            out[i] = bytes_[pos_++];
        }
    }

  private:
    Bytes bytes_;
    size_t pos_ = 0;
};

}  // namespace fairshare
