#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <utility>

#include "fairshare/bytes.hpp"
#include "fairshare/errors.hpp"
#include "fairshare/keccak.hpp"
#include "fairshare/rng.hpp"

namespace fairshare {

// Symmetric (Type-A) pairing over the supersingular curve E: y^2 = x^3 + x
// on F_p with p ≡ 3 (mod 4) and #E(F_p) = p + 1 = q·h, q prime.
//
// G1 is the order-q subgroup of E(F_p). GT is the order-q subgroup of
// F_{p^2}^*, with F_{p^2} = F_p[i]/(i^2 + 1). The map is the reduced Tate
// pairing composed with the distortion map (x, y) -> (-x, iy), which makes
// it symmetric and non-degenerate on G1 x G1.
//
// Contract: bilinear e(P^c, Q^d) = e(P,Q)^{cd}, non-degenerate e(g,g) != 1,
// efficiently computable. Curve sizes are simulation-scale by design.

// a + b·i with i^2 = -1.
struct Fp2 {
    mpz_class a;
    mpz_class b;

    bool operator==(const Fp2& o) const { return a == o.a && b == o.b; }
};

struct G1Point {
    mpz_class x;
    mpz_class y;
    bool inf = false;

    bool operator==(const G1Point& o) const {
        if (inf || o.inf) return inf == o.inf;
        return x == o.x && y == o.y;
    }
};

class PairingGroup {
  public:
    // lambda selects the curve size: 128 -> 160-bit order / 512-bit field
    // (group elements serialize to the paper's 128 bytes), 256 -> 256/1024.
    static PairingGroup generate(unsigned lambda, uint64_t seed) {
        unsigned rbits, pbits;
        if (lambda == 128) {
            rbits = 160;
            pbits = 512;
        } else if (lambda == 256) {
            rbits = 256;
            pbits = 1024;
        } else {
            throw ConfigError("unsupported security parameter (expected 128 or 256)");
        }

        PairingGroup grp;
        grp.lambda_ = lambda;
        grp.field_bytes_ = pbits / 8;

        DetRng rng = DetRng(seed).child("pairing.params");

        // Group order q: prime of rbits bits.
        {
            mpz_class cand = random_mpz_bits(rng, rbits);
            mpz_setbit(cand.get_mpz_t(), rbits - 1);
            mpz_nextprime(grp.q_.get_mpz_t(), cand.get_mpz_t());
        }

        // Field prime p = q·h - 1 with h = 4m, so p ≡ 3 (mod 4).
        const unsigned mbits = pbits - mpz_sizeinbase(grp.q_.get_mpz_t(), 2) - 2;
        while (true) {
            mpz_class m = random_mpz_bits(rng, mbits);
            mpz_setbit(m.get_mpz_t(), mbits - 1);
            grp.h_ = 4 * m;
            grp.p_ = grp.q_ * grp.h_ - 1;
            if (mpz_sizeinbase(grp.p_.get_mpz_t(), 2) != pbits) continue;
            if (mpz_probab_prime_p(grp.p_.get_mpz_t(), 30) > 0) break;
        }

        grp.sqrt_exp_ = (grp.p_ + 1) / 4;

        // Generator of G1: cofactor-clear a random curve point.
        while (true) {
            mpz_class x = random_mpz_bits(rng, pbits) % grp.p_;
            mpz_class rhs = grp.curve_rhs(x);
            if (rhs == 0) continue;
            mpz_class y;
            mpz_powm(y.get_mpz_t(), rhs.get_mpz_t(), grp.sqrt_exp_.get_mpz_t(),
                     grp.p_.get_mpz_t());
            if (grp.mulm(y, y) != rhs) continue;  // non-residue, no point here
            G1Point cand = grp.g1_mul(G1Point{x, y, false}, grp.h_);
            if (cand.inf) continue;
            grp.g_ = cand;
            break;
        }
        if (!grp.g1_mul(grp.g_, grp.q_).inf)
            throw CryptoError("generator order check failed");

        grp.egg_ = grp.pair(grp.g_, grp.g_);
        if (grp.gt_is_one(grp.egg_))
            throw CryptoError("degenerate pairing: e(g,g) = 1");
        return grp;
    }

    unsigned security_lambda() const { return lambda_; }
    const mpz_class& field_prime() const { return p_; }
    const mpz_class& group_order() const { return q_; }
    const mpz_class& cofactor() const { return h_; }
    const G1Point& generator() const { return g_; }
    // Cached e(g,g); generates GT.
    const Fp2& gt_generator() const { return egg_; }
    size_t field_bytes() const { return field_bytes_; }
    size_t element_size() const { return 2 * field_bytes_; }

    Digest params_digest() const {
        Bytes buf = to_bytes("fairshare.params.v1");
        append_u16(buf, static_cast<uint16_t>(lambda_));
        Bytes pb = mpz_to_bytes(p_, field_bytes_);
        Bytes qb = mpz_to_bytes(q_, field_bytes_);
        append(buf, pb);
        append(buf, qb);
        append(buf, ser_g1(g_));
        return keccak256(buf);
    }

    // ---- G1 ------------------------------------------------------------

    bool g1_on_curve(const G1Point& pt) const {
        if (pt.inf) return true;
        if (pt.x < 0 || pt.x >= p_ || pt.y < 0 || pt.y >= p_) return false;
        return mulm(pt.y, pt.y) == curve_rhs(pt.x);
    }

    G1Point g1_neg(const G1Point& pt) const {
        if (pt.inf || pt.y == 0) return pt;
        return {pt.x, p_ - pt.y, false};
    }

    G1Point g1_add(const G1Point& lhs, const G1Point& rhs) const {
        if (lhs.inf) return rhs;
        if (rhs.inf) return lhs;
        if (lhs.x == rhs.x) {
            if (addm(lhs.y, rhs.y) == 0) return G1Point{0, 0, true};
            return g1_double(lhs);
        }
        mpz_class lam = mulm(subm(rhs.y, lhs.y), invm(subm(rhs.x, lhs.x)));
        return chord_result(lhs, rhs, lam);
    }

    G1Point g1_double(const G1Point& pt) const {
        if (pt.inf || pt.y == 0) return G1Point{0, 0, true};
        mpz_class lam = tangent_slope(pt);
        return chord_result(pt, pt, lam);
    }

    G1Point g1_mul(const G1Point& pt, const mpz_class& k) const {
        if (pt.inf || k == 0) return G1Point{0, 0, true};
        G1Point acc{0, 0, true};
        for (long i = long(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; i >= 0; --i) {
            acc = g1_double(acc);
            if (mpz_tstbit(k.get_mpz_t(), i)) acc = g1_add(acc, pt);
        }
        return acc;
    }

    bool g1_in_subgroup(const G1Point& pt) const {
        return g1_on_curve(pt) && g1_mul(pt, q_).inf;
    }

    // ---- GT (order-q subgroup of F_{p^2}^*) -----------------------------

    Fp2 gt_one() const { return Fp2{1, 0}; }
    bool gt_is_one(const Fp2& z) const { return z.a == 1 && z.b == 0; }

    Fp2 gt_mul(const Fp2& x, const Fp2& y) const {
        // Karatsuba over F_p.
        mpz_class t1 = mulm(x.a, y.a);
        mpz_class t2 = mulm(x.b, y.b);
        mpz_class t3 = mulm(addm(x.a, x.b), addm(y.a, y.b));
        return Fp2{subm(t1, t2), subm(subm(t3, t1), t2)};
    }

    Fp2 gt_sqr(const Fp2& x) const {
        mpz_class re = mulm(addm(x.a, x.b), subm(x.a, x.b));
        mpz_class im = mulm(x.a, x.b);
        return Fp2{re, addm(im, im)};
    }

    Fp2 gt_conj(const Fp2& x) const { return Fp2{x.a, x.b == 0 ? mpz_class(0) : p_ - x.b}; }

    Fp2 gt_inv(const Fp2& x) const {
        mpz_class norm = addm(mulm(x.a, x.a), mulm(x.b, x.b));
        if (norm == 0) throw CryptoError("inverse of zero in F_p^2");
        mpz_class ninv = invm(norm);
        return Fp2{mulm(x.a, ninv), x.b == 0 ? mpz_class(0) : mulm(p_ - x.b, ninv)};
    }

    Fp2 gt_pow(const Fp2& base, const mpz_class& e) const {
        if (e == 0) return gt_one();
        Fp2 acc = gt_one();
        for (long i = long(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
            acc = gt_sqr(acc);
            if (mpz_tstbit(e.get_mpz_t(), i)) acc = gt_mul(acc, base);
        }
        return acc;
    }

    bool gt_in_subgroup(const Fp2& z) const {
        if (z.a < 0 || z.a >= p_ || z.b < 0 || z.b >= p_) return false;
        if (z.a == 0 && z.b == 0) return false;
        return gt_is_one(gt_pow(z, q_));
    }

    // ---- pairing ---------------------------------------------------------

    // e(P, Q) = Tate_q(P, phi(Q)), phi(x,y) = (-x, iy). Vertical-line factors
    // lie in F_p and vanish under the final exponentiation, so Miller's loop
    // runs denominator-free.
    Fp2 pair(const G1Point& P, const G1Point& Q) const {
        if (P.inf || Q.inf) return gt_one();
        const mpz_class& yq = Q.y;

        Fp2 f{1, 0};
        G1Point S = P;
        for (long i = long(mpz_sizeinbase(q_.get_mpz_t(), 2)) - 2; i >= 0; --i) {
            // tangent at S, evaluated at (-x_Q, i·y_Q):
            //   l = lambda·(x_Q + x_S) - y_S  +  y_Q·i
            mpz_class lam = tangent_slope(S);
            Fp2 line{subm(mulm(lam, addm(Q.x, S.x)), S.y), yq};
            f = gt_mul(gt_sqr(f), line);
            S = g1_double(S);
            if (mpz_tstbit(q_.get_mpz_t(), i)) {
                if (S.x == P.x && addm(S.y, P.y) == 0) {
                    // chord is vertical: F_p factor, killed by final exp.
                    S = G1Point{0, 0, true};
                } else {
                    mpz_class clam = mulm(subm(P.y, S.y), invm(subm(P.x, S.x)));
                    Fp2 cline{subm(mulm(clam, addm(Q.x, S.x)), S.y), yq};
                    f = gt_mul(f, cline);
                    S = g1_add(S, P);
                }
            }
        }
        // final exponentiation: (p^2-1)/q = (p-1)·h, and f^(p-1) = conj(f)/f.
        Fp2 u = gt_mul(gt_conj(f), gt_inv(f));
        return gt_pow(u, h_);
    }

    // ---- scalars ----------------------------------------------------------

    // Uniform in [1, q-1] by rejection sampling.
    mpz_class random_scalar(RandomSource& rng) const {
        const size_t nbits = mpz_sizeinbase(q_.get_mpz_t(), 2);
        const size_t nbytes = (nbits + 7) / 8;
        const unsigned topbits = nbits % 8;
        while (true) {
            Bytes buf = rng.bytes(nbytes);
            if (topbits != 0) buf[0] &= uint8_t((1u << topbits) - 1);
            mpz_class cand = bytes_to_mpz(buf);
            if (cand == 0 || cand >= q_) continue;
            return cand;
        }
    }

    mpz_class inv_mod_q(const mpz_class& k) const {
        mpz_class r;
        mpz_class kk = k % q_;
        if (kk < 0) kk += q_;
        if (mpz_invert(r.get_mpz_t(), kk.get_mpz_t(), q_.get_mpz_t()) == 0)
            throw InvalidKeyError("scalar not invertible mod q");
        return r;
    }

    mpz_class reduce_scalar(const mpz_class& k) const {
        mpz_class r = k % q_;
        if (r < 0) r += q_;
        return r;
    }

    // ---- serialization -----------------------------------------------------

    Bytes ser_g1(const G1Point& pt) const {
        if (pt.inf) throw CryptoError("cannot serialize the point at infinity");
        Bytes out = mpz_to_bytes(pt.x, field_bytes_);
        Bytes yb = mpz_to_bytes(pt.y, field_bytes_);
        append(out, yb);
        return out;
    }

    G1Point de_g1(ByteView in) const {
        if (in.size() != element_size()) throw DecodeError("bad G1 element length");
        G1Point pt{bytes_to_mpz(in.subspan(0, field_bytes_)),
                   bytes_to_mpz(in.subspan(field_bytes_, field_bytes_)), false};
        if (pt.x >= p_ || pt.y >= p_) throw DecodeError("G1 coordinate out of range");
        if (!g1_in_subgroup(pt)) throw DecodeError("not a valid G1 element");
        return pt;
    }

    Bytes ser_gt(const Fp2& z) const {
        Bytes out = mpz_to_bytes(z.a, field_bytes_);
        Bytes bb = mpz_to_bytes(z.b, field_bytes_);
        append(out, bb);
        return out;
    }

    Fp2 de_gt(ByteView in) const {
        if (in.size() != element_size()) throw DecodeError("bad GT element length");
        Fp2 z{bytes_to_mpz(in.subspan(0, field_bytes_)),
              bytes_to_mpz(in.subspan(field_bytes_, field_bytes_))};
        if (z.a >= p_ || z.b >= p_) throw DecodeError("GT coordinate out of range");
        if (!gt_in_subgroup(z)) throw DecodeError("not a valid GT element");
        return z;
    }

    static Bytes ser_scalar(const mpz_class& k) { return mpz_to_bytes(k, 32); }

    static Bytes mpz_to_bytes(const mpz_class& v, size_t width) {
        Bytes out(width, 0);
        size_t count = 0;
        mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
        if (count > width) throw CryptoError("value too large for fixed width");
        if (count < width && count > 0) {
            // right-align big-endian digits
            std::memmove(out.data() + (width - count), out.data(), count);
            std::memset(out.data(), 0, width - count);
        }
        return out;
    }

    static mpz_class bytes_to_mpz(ByteView in) {
        mpz_class v;
        mpz_import(v.get_mpz_t(), in.size(), 1, 1, 1, 0, in.data());
        return v;
    }

  private:
    PairingGroup() = default;

    static mpz_class random_mpz_bits(RandomSource& rng, size_t bits) {
        const size_t nbytes = (bits + 7) / 8;
        Bytes buf = rng.bytes(nbytes);
        const unsigned topbits = bits % 8;
        if (topbits != 0) buf[0] &= uint8_t((1u << topbits) - 1);
        return bytes_to_mpz(buf);
    }

    mpz_class curve_rhs(const mpz_class& x) const {
        return addm(mulm(mulm(x, x), x), x);  // x^3 + x
    }

    mpz_class tangent_slope(const G1Point& pt) const {
        mpz_class num = addm(mulm(mpz_class(3), mulm(pt.x, pt.x)), mpz_class(1));
        return mulm(num, invm(addm(pt.y, pt.y)));
    }

    G1Point chord_result(const G1Point& a, const G1Point& b, const mpz_class& lam) const {
        mpz_class x3 = subm(subm(mulm(lam, lam), a.x), b.x);
        mpz_class y3 = subm(mulm(lam, subm(a.x, x3)), a.y);
        return {x3, y3, false};
    }

    mpz_class addm(const mpz_class& a, const mpz_class& b) const {
        mpz_class r = a + b;
        if (r >= p_) r -= p_;
        return r;
    }

    mpz_class subm(const mpz_class& a, const mpz_class& b) const {
        mpz_class r = a - b;
        if (r < 0) r += p_;
        return r;
    }

    mpz_class mulm(const mpz_class& a, const mpz_class& b) const {
        mpz_class r = a * b;
        r %= p_;
        return r;
    }

    mpz_class invm(const mpz_class& a) const {
        mpz_class r;
        if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), p_.get_mpz_t()) == 0)
            throw CryptoError("inverse of zero in F_p");
        return r;
    }

    unsigned lambda_ = 0;
    size_t field_bytes_ = 0;
    mpz_class p_, q_, h_, sqrt_exp_;
    G1Point g_;
    Fp2 egg_;
};

// The spec's PublicParams: pairing-group parameters shared by every party.
using PublicParams = PairingGroup;

inline PublicParams setup_params(unsigned lambda, uint64_t seed) {
    return PairingGroup::generate(lambda, seed);
}

}  // namespace fairshare
