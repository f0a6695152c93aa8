#ifndef RESIOT_BN254_HPP
#define RESIOT_BN254_HPP

#include <gmpxx.h>

#include <optional>
#include <span>

#include "resiot/bytes.hpp"

// BN254 (alt_bn128 parameter set): a Type-3 pairing-friendly curve with an
// optimal-ate pairing G1 x G2 -> GT. Tower: Fp2 = Fp[i]/(i^2+1),
// Fp6 = Fp2[v]/(v^3 - xi) with xi = 9 + i, Fp12 = Fp6[w]/(w^2 - v).
// G1: y^2 = x^3 + 3 over Fp, G2: y^2 = x^3 + 3/xi over Fp2 (D-type twist).
// Arithmetic rides on GMP; nothing here is constant-time.
namespace resiot::bn {

using Int = mpz_class;

const Int& field_modulus();  // p
const Int& group_order();    // r, prime order of G1/G2/GT

struct Fp {
    Int v;  // 0 <= v < p

    Fp() : v(0) {}
    explicit Fp(long x);
    explicit Fp(Int x);

    bool is_zero() const { return v == 0; }
    bool operator==(const Fp&) const = default;

    Fp operator+(const Fp& o) const;
    Fp operator-(const Fp& o) const;
    Fp operator*(const Fp& o) const;
    Fp neg() const;
    Fp inv() const;
    Fp pow(const Int& e) const;
    // Square root for p = 3 mod 4; nullopt if not a QR.
    std::optional<Fp> sqrt() const;
};

struct Fp2 {
    Fp a, b;  // a + b*i

    bool operator==(const Fp2&) const = default;
    bool is_zero() const { return a.is_zero() && b.is_zero(); }

    static Fp2 zero() { return {}; }
    static Fp2 one() { return {Fp(1), Fp(0)}; }

    Fp2 operator+(const Fp2& o) const;
    Fp2 operator-(const Fp2& o) const;
    Fp2 operator*(const Fp2& o) const;
    Fp2 neg() const;
    Fp2 conj() const { return {a, b.neg()}; }
    Fp2 inv() const;
    Fp2 sqr() const;
    Fp2 mul_fp(const Fp& s) const { return {a * s, b * s}; }
    Fp2 mul_xi() const;  // * (9 + i)
    Fp2 pow(const Int& e) const;
};

struct Fp6 {
    Fp2 c0, c1, c2;  // c0 + c1*v + c2*v^2

    bool operator==(const Fp6&) const = default;
    bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }

    static Fp6 zero() { return {}; }
    static Fp6 one() { return {Fp2::one(), Fp2::zero(), Fp2::zero()}; }

    Fp6 operator+(const Fp6& o) const;
    Fp6 operator-(const Fp6& o) const;
    Fp6 operator*(const Fp6& o) const;
    Fp6 neg() const;
    Fp6 inv() const;
    Fp6 sqr() const { return *this * *this; }
    Fp6 mul_fp2(const Fp2& s) const { return {c0 * s, c1 * s, c2 * s}; }
    // Multiply by v (the Fp6 non-residue position shift).
    Fp6 mul_v() const { return {c2.mul_xi(), c0, c1}; }
};

struct Fp12 {
    Fp6 c0, c1;  // c0 + c1*w

    bool operator==(const Fp12&) const = default;

    static Fp12 one() { return {Fp6::one(), Fp6::zero()}; }
    bool is_one() const { return *this == one(); }

    Fp12 operator+(const Fp12& o) const;
    Fp12 operator-(const Fp12& o) const;
    Fp12 operator*(const Fp12& o) const;
    Fp12 sqr() const;
    Fp12 inv() const;
    // p^6-Frobenius; equals the inverse on pairing outputs (unitary elements).
    Fp12 conj() const { return {c0, c1.neg()}; }
    Fp12 frobenius() const;  // x -> x^p
    Fp12 pow(const Int& e) const;
};

using Gt = Fp12;

struct G1 {
    Fp x, y;
    bool infinity = true;

    static G1 generator();
    static G1 zero() { return {}; }

    bool operator==(const G1& o) const;
    bool is_on_curve() const;

    G1 add(const G1& o) const;
    G1 dbl() const;
    G1 neg() const;
    G1 mul(const Int& scalar) const;
};

struct G2 {
    Fp2 x, y;
    bool infinity = true;

    static G2 generator();
    static G2 zero() { return {}; }

    bool operator==(const G2& o) const;
    bool is_on_curve() const;
    bool is_in_subgroup() const;

    G2 add(const G2& o) const;
    G2 dbl() const;
    G2 neg() const;
    G2 mul(const Int& scalar) const;
    // Untwist-Frobenius-twist endomorphism (used by the ate pairing).
    G2 frobenius() const;
};

// Optimal-ate pairing, final-exponentiated. pairing(inf, Q) = 1.
Gt pairing(const G1& p, const G2& q);

// Exposed for the fast-vs-naive cross-check and benchmarks.
Fp12 miller_loop(const G1& p, const G2& q);
Fp12 final_exponentiation_easy(const Fp12& f);
Fp12 final_exponentiation_hard(const Fp12& f);  // cyclotomic fast path
Fp12 final_exponentiation(const Fp12& f);

// Fixed-width big-endian encodings; decode validates range/curve membership.
void encode_fp(ByteWriter& w, const Fp& e);
Bytes encode_g1(const G1& p);   // 1 + 64 bytes
Bytes encode_g2(const G2& p);   // 1 + 128 bytes
Bytes encode_gt(const Gt& e);   // 384 bytes
Bytes encode_scalar(const Int& s);  // 32 bytes, value mod r
std::optional<G1> decode_g1(std::span<const uint8_t> in);
std::optional<G2> decode_g2(std::span<const uint8_t> in);
std::optional<Gt> decode_gt(std::span<const uint8_t> in);
std::optional<Int> decode_scalar(std::span<const uint8_t> in);

// y with y^2 = x^3 + 3, canonicalized to min(y, p - y); nullopt if none.
std::optional<Fp> g1_y_for_x(const Fp& x);

Int int_from_bytes(std::span<const uint8_t> in);

}  // namespace resiot::bn

#endif
