#include <doctest.h>

#include "resiot/bn254.hpp"
#include "resiot/bytes.hpp"

using namespace resiot;
using namespace resiot::bn;

namespace {

Int random_scalar(Drbg& rng) {
    Bytes wide = rng.bytes(48);
    Int v = int_from_bytes(wide);
    Int out;
    mpz_mod(out.get_mpz_t(), v.get_mpz_t(), group_order().get_mpz_t());
    return out;
}

}  // namespace

TEST_CASE("generators lie on their curves and have order r") {
    G1 g1 = G1::generator();
    G2 g2 = G2::generator();
    CHECK(g1.is_on_curve());
    CHECK(g2.is_on_curve());
    CHECK(g1.mul(group_order()).infinity);
    CHECK(g2.mul(group_order()).infinity);
    CHECK(g2.is_in_subgroup());
}

TEST_CASE("field tower basics") {
    Drbg rng(1234, "fp12");
    auto rand_fp12 = [&rng] {
        Fp12 x;
        Fp2* slots[6] = {&x.c0.c0, &x.c0.c1, &x.c0.c2, &x.c1.c0, &x.c1.c1, &x.c1.c2};
        for (Fp2* s : slots) {
            s->a = Fp(int_from_bytes(rng.bytes(32)));
            s->b = Fp(int_from_bytes(rng.bytes(32)));
        }
        return x;
    };
    for (int i = 0; i < 5; ++i) {
        Fp12 x = rand_fp12();
        Fp12 y = rand_fp12();
        Fp12 z = rand_fp12();
        CHECK((x * y) * z == x * (y * z));
        CHECK(x * x.inv() == Fp12::one());
        CHECK(x.sqr() == x * x);
        // Frobenius against the independent route x^p
        CHECK(x.frobenius() == x.pow(field_modulus()));
    }
}

TEST_CASE("pairing is bilinear and non-degenerate") {
    G1 g1 = G1::generator();
    G2 g2 = G2::generator();
    Gt base = pairing(g1, g2);
    CHECK_FALSE(base.is_one());
    CHECK(base.pow(group_order()).is_one());

    Drbg rng(77, "bilinearity");
    for (int i = 0; i < 100; ++i) {
        Int a = random_scalar(rng);
        Int b = random_scalar(rng);
        Gt lhs = pairing(g1.mul(a), g2.mul(b));
        Int ab;
        mpz_mul(ab.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
        CHECK(lhs == base.pow(ab % group_order()));
    }
}

TEST_CASE("pairing of the identity is one") {
    CHECK(pairing(G1::zero(), G2::generator()).is_one());
    CHECK(pairing(G1::generator(), G2::zero()).is_one());
}

TEST_CASE("fast final exponentiation matches the plain-exponent route") {
    Int p = field_modulus();
    Int cyclo = p * p * p * p - p * p + 1;
    CHECK(mpz_divisible_p(cyclo.get_mpz_t(), group_order().get_mpz_t()) != 0);
    Int hard = cyclo / group_order();

    Drbg rng(5150, "finalexp");
    for (int i = 0; i < 3; ++i) {
        Int a = random_scalar(rng);
        Int b = random_scalar(rng);
        Fp12 f = miller_loop(G1::generator().mul(a), G2::generator().mul(b));
        Fp12 easy = final_exponentiation_easy(f);
        CHECK(final_exponentiation_hard(easy) == easy.pow(hard));
    }
}

TEST_CASE("group element encodings round-trip and reject tampering") {
    Drbg rng(9, "encodings");
    Int a = random_scalar(rng);
    G1 p = G1::generator().mul(a);
    G2 q = G2::generator().mul(a);
    Gt t = pairing(p, q);

    Bytes g1_bytes = encode_g1(p);
    Bytes g2_bytes = encode_g2(q);
    Bytes gt_bytes = encode_gt(t);
    Bytes s_bytes = encode_scalar(a);
    REQUIRE(decode_g1(g1_bytes).has_value());
    REQUIRE(decode_g2(g2_bytes).has_value());
    REQUIRE(decode_gt(gt_bytes).has_value());
    REQUIRE(decode_scalar(s_bytes).has_value());
    CHECK(*decode_g1(g1_bytes) == p);
    CHECK(*decode_g2(g2_bytes) == q);
    CHECK(*decode_gt(gt_bytes) == t);
    CHECK(*decode_scalar(s_bytes) == a);

    // single-byte corruption must not decode to a valid point
    Bytes bad = g1_bytes;
    bad[7] ^= 0x40;
    CHECK_FALSE(decode_g1(bad).has_value());
    Bytes bad2 = g2_bytes;
    bad2[33] ^= 0x01;
    CHECK_FALSE(decode_g2(bad2).has_value());
    CHECK_FALSE(decode_g1(Bytes(64, 0)).has_value());  // wrong length

    // infinity encodings are canonical
    CHECK(decode_g1(encode_g1(G1::zero()))->infinity);
    Bytes inf = encode_g1(G1::zero());
    inf[10] = 1;
    CHECK_FALSE(decode_g1(inf).has_value());
}

TEST_CASE("scalar decode rejects values at or above the group order") {
    Bytes max(32, 0xff);
    CHECK_FALSE(decode_scalar(max).has_value());
    CHECK(decode_scalar(encode_scalar(group_order() - 1)).has_value());
}

TEST_CASE("hash-to-curve x solver returns curve points") {
    int found = 0;
    for (long x = 1; x < 20; ++x) {
        auto y = g1_y_for_x(Fp(x));
        if (!y) continue;
        ++found;
        G1 p;
        p.infinity = false;
        p.x = Fp(x);
        p.y = *y;
        CHECK(p.is_on_curve());
    }
    CHECK(found > 0);
}
