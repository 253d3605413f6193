#pragma once

#include <string>

#include "fairshare/aead.hpp"
#include "fairshare/keccak.hpp"
#include "fairshare/pairing.hpp"
#include "fairshare/rng.hpp"

namespace fairshare {

// Unidirectional single-hop proxy re-encryption over the pairing group.
//
//   KeyGen:    sk = x in Z_q^*, pk = g^x
//   ReKeyGen:  rk_{F->C} = pk_C^{1/sk_F}
//   Enc:       c1 = pk^r, c2 = e(g,g)^r · K        (K in GT)
//   ReEnc:     c1' = rk^{1/t}, c1'' = c1^t, c2 unchanged
//   Dec:       K = c2 / e(c1', c1'')^{1/sk}
//
// Single-hop holds by construction: re-encryption consumes a PreCiphertext
// and produces a ReCiphertext, and no operation accepts a ReCiphertext as
// re-encryption input.

struct PreKeyPair {
    mpz_class sk;
    G1Point pk;
};

struct ReEncKey {
    G1Point rk;
    std::string from_id;
    std::string to_id;
};

struct PreCiphertext {
    G1Point c1;
    Fp2 c2;
};

struct ReCiphertext {
    G1Point c1p;   // c1'
    G1Point c1pp;  // c1''
    Fp2 c2;
};

inline PreKeyPair pre_keygen(const PublicParams& par, RandomSource& rng) {
    mpz_class sk = par.random_scalar(rng);
    return PreKeyPair{sk, par.g1_mul(par.generator(), sk)};
}

inline ReEncKey pre_rekeygen(const PublicParams& par, const mpz_class& sk_from,
                             const G1Point& pk_to, std::string from_id = {},
                             std::string to_id = {}) {
    if (par.reduce_scalar(sk_from) == 0)
        throw InvalidKeyError("re-encryption key requires an invertible secret");
    mpz_class inv = par.inv_mod_q(sk_from);
    return ReEncKey{par.g1_mul(pk_to, inv), std::move(from_id), std::move(to_id)};
}

inline PreCiphertext pre_encrypt(const PublicParams& par, const G1Point& pk,
                                 const Fp2& k, RandomSource& rng) {
    mpz_class r = par.random_scalar(rng);
    G1Point c1 = par.g1_mul(pk, r);
    Fp2 c2 = par.gt_mul(par.gt_pow(par.gt_generator(), r), k);
    return PreCiphertext{c1, c2};
}

inline ReCiphertext pre_reencrypt(const PublicParams& par, const ReEncKey& rk,
                                  const PreCiphertext& c, RandomSource& rng) {
    mpz_class t = par.random_scalar(rng);
    G1Point c1p = par.g1_mul(rk.rk, par.inv_mod_q(t));
    G1Point c1pp = par.g1_mul(c.c1, t);
    return ReCiphertext{c1p, c1pp, c.c2};
}

inline Fp2 pre_decrypt(const PublicParams& par, const mpz_class& sk_to,
                       const ReCiphertext& c) {
    Fp2 shared = par.pair(c.c1p, c.c1pp);
    Fp2 blind = par.gt_pow(shared, par.inv_mod_q(sk_to));
    return par.gt_mul(c.c2, par.gt_inv(blind));
}

// Random GT payload K_F = e(g,g)^rho; keeps the encrypted key inside the
// order-q subgroup so deserialization checks hold end to end.
inline Fp2 random_gt_element(const PublicParams& par, RandomSource& rng) {
    return par.gt_pow(par.gt_generator(), par.random_scalar(rng));
}

// Bridges the GT-encoded key to the 256-bit file cipher key.
inline SymKey kdf_symmetric_key(const PublicParams& par, const Fp2& k) {
    Keccak256 h;
    h.update("fairshare.kdf.v1");
    Bytes ser = par.ser_gt(k);
    h.update(ser);
    Digest d = h.finalize();
    SymKey key{};
    std::memcpy(key.data(), d.data(), key.size());
    return key;
}

// ---- canonical serialization --------------------------------------------

inline Bytes ser_pre_ciphertext(const PublicParams& par, const PreCiphertext& c) {
    Bytes out = par.ser_g1(c.c1);
    Bytes c2 = par.ser_gt(c.c2);
    append(out, c2);
    if (out.size() != 2 * par.element_size())
        throw CryptoError("PreCiphertext serialized to unexpected length");
    return out;
}

inline PreCiphertext de_pre_ciphertext(const PublicParams& par, ByteView in) {
    if (in.size() != 2 * par.element_size())
        throw DecodeError("bad PreCiphertext length");
    const size_t es = par.element_size();
    return PreCiphertext{par.de_g1(in.subspan(0, es)), par.de_gt(in.subspan(es, es))};
}

// Wire order c1' || c1'' || c2 — 3 x element_size (384 bytes at the default).
inline Bytes ser_re_ciphertext(const PublicParams& par, const ReCiphertext& c) {
    Bytes out = par.ser_g1(c.c1p);
    Bytes b = par.ser_g1(c.c1pp);
    append(out, b);
    b = par.ser_gt(c.c2);
    append(out, b);
    if (out.size() != 3 * par.element_size())
        throw CryptoError("ReCiphertext serialized to unexpected length");
    return out;
}

inline ReCiphertext de_re_ciphertext(const PublicParams& par, ByteView in) {
    if (in.size() != 3 * par.element_size())
        throw DecodeError("bad ReCiphertext length");
    const size_t es = par.element_size();
    return ReCiphertext{par.de_g1(in.subspan(0, es)), par.de_g1(in.subspan(es, es)),
                        par.de_gt(in.subspan(2 * es, es))};
}

}  // namespace fairshare
