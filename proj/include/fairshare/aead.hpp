#pragma once

#include <openssl/evp.h>

#include <array>
#include <memory>
#include <optional>

#include "fairshare/bytes.hpp"
#include "fairshare/errors.hpp"

namespace fairshare {

// AES-256-GCM. Ciphertext layout: body || 16-byte tag, so the overhead over
// the plaintext is exactly the tag.
inline constexpr size_t kAeadTagSize = 16;
inline constexpr size_t kSymKeySize = 32;

using SymKey = std::array<uint8_t, kSymKeySize>;

namespace detail {
struct CipherCtxFree {
    void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;
}  // namespace detail

inline Bytes sym_encrypt(const SymKey& key, ByteView nonce, ByteView plaintext) {
    if (nonce.empty()) throw CryptoError("empty nonce");
    detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) throw CryptoError("EVP_CIPHER_CTX_new failed");
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1)
        throw CryptoError("gcm init failed");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, int(nonce.size()), nullptr) != 1)
        throw CryptoError("gcm ivlen failed");
    if (EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1)
        throw CryptoError("gcm key/iv failed");

    Bytes out(plaintext.size() + kAeadTagSize);
    int len = 0;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(), int(plaintext.size())) != 1)
        throw CryptoError("gcm encrypt failed");
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1)
        throw CryptoError("gcm final failed");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagSize,
                            out.data() + plaintext.size()) != 1)
        throw CryptoError("gcm tag failed");
    return out;
}

// Returns nullopt on authentication failure.
inline std::optional<Bytes> sym_open(const SymKey& key, ByteView nonce, ByteView ciphertext) {
    if (ciphertext.size() < kAeadTagSize) return std::nullopt;
    detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) throw CryptoError("EVP_CIPHER_CTX_new failed");
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1)
        throw CryptoError("gcm init failed");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, int(nonce.size()), nullptr) != 1)
        throw CryptoError("gcm ivlen failed");
    if (EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1)
        throw CryptoError("gcm key/iv failed");

    size_t body_len = ciphertext.size() - kAeadTagSize;
    Bytes out(body_len);
    int len = 0;
    if (body_len > 0 &&
        EVP_DecryptUpdate(ctx.get(), out.data(), &len, ciphertext.data(), int(body_len)) != 1)
        return std::nullopt;
    uint8_t tag[kAeadTagSize];
    std::memcpy(tag, ciphertext.data() + body_len, kAeadTagSize);
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagSize, tag) != 1)
        throw CryptoError("gcm tag set failed");
    int fin = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) return std::nullopt;
    return out;
}

// Throwing variant: tampered ciphertext surfaces as IntegrityError.
inline Bytes sym_decrypt(const SymKey& key, ByteView nonce, ByteView ciphertext) {
    auto pt = sym_open(key, nonce, ciphertext);
    if (!pt) throw IntegrityError("authenticated decryption failed");
    return std::move(*pt);
}

inline Bytes counter_nonce(uint64_t counter) {
    Bytes n(12, 0);
    for (int i = 0; i < 8; ++i) n[11 - i] = static_cast<uint8_t>(counter >> (8 * i));
    return n;
}

}  // namespace fairshare
