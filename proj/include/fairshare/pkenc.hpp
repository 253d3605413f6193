#pragma once

#include <optional>

#include "fairshare/aead.hpp"
#include "fairshare/keccak.hpp"
#include "fairshare/pairing.hpp"
#include "fairshare/rng.hpp"

namespace fairshare {

// Public-key layer: ElGamal-style key encapsulation over G1 plus Schnorr
// signatures. Ciphertexts are padded to a fixed width (256 bytes at the
// default element size) to mirror an RSA-2048 wire footprint; the payload
// is a short key (K_D), never bulk data.

struct AsymKeyPair {
    mpz_class sk;
    G1Point pk;
};

inline constexpr size_t kAsymDemSize = 128;  // KEM element + this = total
inline constexpr size_t kAsymLenField = 2;
inline constexpr size_t kAsymMaxPayload = kAsymDemSize - kAeadTagSize - kAsymLenField;

inline size_t asym_ciphertext_size(const PublicParams& par) {
    return par.element_size() + kAsymDemSize;
}

inline AsymKeyPair asym_keygen(const PublicParams& par, RandomSource& rng) {
    mpz_class sk = par.random_scalar(rng);
    return AsymKeyPair{sk, par.g1_mul(par.generator(), sk)};
}

namespace detail {
inline SymKey kem_key(const PublicParams& par, const G1Point& shared) {
    Keccak256 h;
    h.update("fairshare.kem.v1");
    Bytes ser = par.ser_g1(shared);
    h.update(ser);
    Digest d = h.finalize();
    SymKey key{};
    std::memcpy(key.data(), d.data(), key.size());
    return key;
}
}  // namespace detail

inline Bytes asym_encrypt(const PublicParams& par, const G1Point& pk, ByteView msg,
                          RandomSource& rng) {
    if (msg.size() > kAsymMaxPayload)
        throw CryptoError("asymmetric payload too large for one encapsulation");
    mpz_class r = par.random_scalar(rng);
    G1Point eph = par.g1_mul(par.generator(), r);
    SymKey key = detail::kem_key(par, par.g1_mul(pk, r));

    Bytes pt;
    append_u16(pt, static_cast<uint16_t>(msg.size()));
    append(pt, msg);
    pt.resize(kAsymDemSize - kAeadTagSize, 0);

    // Fresh KEM key per encryption, so a fixed nonce is fine.
    Bytes out = par.ser_g1(eph);
    Bytes dem = sym_encrypt(key, counter_nonce(0), pt);
    append(out, dem);
    return out;
}

inline Bytes asym_decrypt(const PublicParams& par, const mpz_class& sk, ByteView ct) {
    if (ct.size() != asym_ciphertext_size(par))
        throw DecodeError("bad asymmetric ciphertext length");
    G1Point eph = par.de_g1(ct.subspan(0, par.element_size()));
    SymKey key = detail::kem_key(par, par.g1_mul(eph, sk));
    Bytes pt = sym_decrypt(key, counter_nonce(0), ct.subspan(par.element_size()));
    size_t len = read_u16(pt, 0);
    if (len > kAsymMaxPayload) throw DecodeError("bad asymmetric payload length");
    return Bytes(pt.begin() + kAsymLenField, pt.begin() + kAsymLenField + len);
}

// ---- Schnorr signatures ---------------------------------------------------

inline size_t signature_size(const PublicParams& par) {
    return par.element_size() + 32;
}

inline Bytes sign_digest(const PublicParams& par, const mpz_class& sk, const Digest& digest) {
    // Deterministic nonce derived from the secret and the message digest.
    Keccak256 nh;
    nh.update("fairshare.schnorr.nonce");
    Bytes skb = PairingGroup::ser_scalar(par.reduce_scalar(sk));
    nh.update(skb);
    nh.update(ByteView(digest.data(), digest.size()));
    Digest seed = nh.finalize();
    mpz_class k = par.reduce_scalar(PairingGroup::bytes_to_mpz(ByteView(seed.data(), seed.size())));
    if (k == 0) k = 1;

    G1Point big_r = par.g1_mul(par.generator(), k);
    Keccak256 eh;
    eh.update("fairshare.schnorr.e");
    Bytes rb = par.ser_g1(big_r);
    eh.update(rb);
    eh.update(ByteView(digest.data(), digest.size()));
    Digest ed = eh.finalize();
    mpz_class e = par.reduce_scalar(PairingGroup::bytes_to_mpz(ByteView(ed.data(), ed.size())));

    mpz_class s = par.reduce_scalar(k + e * sk);
    Bytes out = par.ser_g1(big_r);
    Bytes sb = PairingGroup::ser_scalar(s);
    append(out, sb);
    return out;
}

// Malformed signatures return false, never throw.
inline bool verify_digest(const PublicParams& par, const G1Point& pk, const Digest& digest,
                          ByteView sig) {
    if (sig.size() != signature_size(par)) return false;
    try {
        G1Point big_r = par.de_g1(sig.subspan(0, par.element_size()));
        mpz_class s = PairingGroup::bytes_to_mpz(sig.subspan(par.element_size(), 32));
        if (s >= par.group_order()) return false;

        Keccak256 eh;
        eh.update("fairshare.schnorr.e");
        Bytes rb = par.ser_g1(big_r);
        eh.update(rb);
        eh.update(ByteView(digest.data(), digest.size()));
        Digest ed = eh.finalize();
        mpz_class e = par.reduce_scalar(PairingGroup::bytes_to_mpz(ByteView(ed.data(), ed.size())));

        G1Point lhs = par.g1_mul(par.generator(), s);
        G1Point rhs = par.g1_add(big_r, par.g1_mul(pk, e));
        return lhs == rhs;
    } catch (const CryptoError&) {
        return false;
    }
}

}  // namespace fairshare
