#pragma once

#include "fairshare/fairshare.hpp"

namespace fairshare::test {

// One shared simulation-scale parameter set keeps the suite fast; individual
// tests that need fresh parameters generate their own.
inline const PublicParams& params() {
    static PublicParams p = setup_params(128, 7);
    return p;
}

// Big-endian scalar bytes for a FixedRandom source, sized for rejection
// sampling against the shared group order.
inline Bytes scalar_bytes(const PublicParams& par, const mpz_class& v) {
    size_t nbits = mpz_sizeinbase(par.group_order().get_mpz_t(), 2);
    return PairingGroup::mpz_to_bytes(v, (nbits + 7) / 8);
}

// Binary exponentiation written LSB-first, independent of the library's
// MSB-first ladder; used as the recomputation oracle for g^sk.
inline G1Point pow_oracle(const PublicParams& par, G1Point base, const mpz_class& exp) {
    G1Point acc{0, 0, true};
    for (size_t i = 0; i < mpz_sizeinbase(exp.get_mpz_t(), 2); ++i) {
        if (mpz_tstbit(exp.get_mpz_t(), i)) acc = par.g1_add(acc, base);
        base = par.g1_double(base);
    }
    return acc;
}

}  // namespace fairshare::test
