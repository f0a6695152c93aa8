#include "resiot/group_sig.hpp"

namespace resiot::gs {

namespace {

void write_g1(ByteWriter& w, const G1& p) { w.blob(bn::encode_g1(p)); }
void write_g2(ByteWriter& w, const G2& p) { w.blob(bn::encode_g2(p)); }
void write_gt(ByteWriter& w, const Gt& e) { w.blob(bn::encode_gt(e)); }
void write_scalar(ByteWriter& w, const Int& s) { w.blob(bn::encode_scalar(s)); }

std::optional<G1> read_g1(ByteReader& r) { return bn::decode_g1(r.blob()); }
std::optional<G2> read_g2(ByteReader& r) { return bn::decode_g2(r.blob()); }
std::optional<Gt> read_gt(ByteReader& r) { return bn::decode_gt(r.blob()); }
std::optional<Int> read_scalar(ByteReader& r) { return bn::decode_scalar(r.blob()); }

Int sub_mod(const Int& a, const Int& b, const Int& m) {
    Int t = a - b;
    mpz_mod(t.get_mpz_t(), t.get_mpz_t(), m.get_mpz_t());
    return t;
}

Int add_mod(const Int& a, const Int& b, const Int& m) {
    Int t = a + b;
    mpz_mod(t.get_mpz_t(), t.get_mpz_t(), m.get_mpz_t());
    return t;
}

Int mul_mod(const Int& a, const Int& b, const Int& m) {
    Int t = a * b;
    mpz_mod(t.get_mpz_t(), t.get_mpz_t(), m.get_mpz_t());
    return t;
}

Int inv_mod(const Int& a, const Int& m) {
    Int t;
    if (mpz_invert(t.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
        throw Error(Errc::crypto, "non-invertible scalar");
    return t;
}

Int neg_mod(const Int& a, const Int& m) { return sub_mod(Int(0), a, m); }

// Fiat-Shamir challenge over the commitment tuple.
Int challenge(const BilinearSuite& suite, std::span<const uint8_t> message, const G1& t1,
              const G1& t2, const G1& t3, const G1& r1, const G1& r2, const Gt& r3,
              const G1& r4, const G1& r5) {
    ByteWriter w;
    w.blob(message);
    write_g1(w, t1);
    write_g1(w, t2);
    write_g1(w, t3);
    write_g1(w, r1);
    write_g1(w, r2);
    write_gt(w, r3);
    write_g1(w, r4);
    write_g1(w, r5);
    return suite.hash_to_scalar(w.bytes(), "bbs-challenge");
}

}  // namespace

Bytes GroupPublicKey::encode() const {
    ByteWriter w;
    w.str("gpk1");
    write_g1(w, h);
    write_g1(w, u);
    write_g1(w, v);
    write_g2(w, this->w);
    write_gt(w, egg);
    return w.take();
}

std::optional<GroupPublicKey> GroupPublicKey::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        if (r.str() != "gpk1") return std::nullopt;
        GroupPublicKey k;
        auto h = read_g1(r), u = read_g1(r), v = read_g1(r);
        auto w = read_g2(r);
        auto egg = read_gt(r);
        if (!h || !u || !v || !w || !egg || !r.done()) return std::nullopt;
        k.h = *h;
        k.u = *u;
        k.v = *v;
        k.w = *w;
        k.egg = *egg;
        return k;
    } catch (const Error&) {
        return std::nullopt;
    }
}

Bytes MemberKey::encode() const {
    ByteWriter w;
    w.str("gmk1");
    w.u32(index);
    write_g1(w, cert);
    write_scalar(w, exponent);
    return w.take();
}

std::optional<MemberKey> MemberKey::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        if (r.str() != "gmk1") return std::nullopt;
        MemberKey k;
        k.index = r.u32();
        auto cert = read_g1(r);
        auto x = read_scalar(r);
        if (!cert || !x || !r.done()) return std::nullopt;
        k.cert = *cert;
        k.exponent = *x;
        return k;
    } catch (const Error&) {
        return std::nullopt;
    }
}

Bytes GroupIssuerKey::encode() const {
    ByteWriter w;
    w.str("gik1");
    write_scalar(w, gamma);
    write_scalar(w, xi1);
    write_scalar(w, xi2);
    w.blob(gpk.encode());
    w.u32(static_cast<uint32_t>(registry.size()));
    for (const auto& [idx, cert] : registry) {
        w.u32(idx);
        write_g1(w, cert);
    }
    return w.take();
}

std::optional<GroupIssuerKey> GroupIssuerKey::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        if (r.str() != "gik1") return std::nullopt;
        GroupIssuerKey k;
        auto gamma = read_scalar(r), xi1 = read_scalar(r), xi2 = read_scalar(r);
        if (!gamma || !xi1 || !xi2) return std::nullopt;
        k.gamma = *gamma;
        k.xi1 = *xi1;
        k.xi2 = *xi2;
        auto gpk = GroupPublicKey::decode(r.blob());
        if (!gpk) return std::nullopt;
        k.gpk = *gpk;
        uint32_t n = r.u32();
        for (uint32_t i = 0; i < n; ++i) {
            uint32_t idx = r.u32();
            auto cert = read_g1(r);
            if (!cert) return std::nullopt;
            k.registry.emplace(idx, *cert);
        }
        if (!r.done()) return std::nullopt;
        return k;
    } catch (const Error&) {
        return std::nullopt;
    }
}

Bytes GroupSignature::encode() const {
    ByteWriter w;
    w.str("gsig1");
    write_g1(w, t1);
    write_g1(w, t2);
    write_g1(w, t3);
    for (const Int* s : {&c, &s_alpha, &s_beta, &s_x, &s_delta1, &s_delta2}) write_scalar(w, *s);
    return w.take();
}

std::optional<GroupSignature> GroupSignature::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        if (r.str() != "gsig1") return std::nullopt;
        GroupSignature s;
        auto t1 = read_g1(r), t2 = read_g1(r), t3 = read_g1(r);
        if (!t1 || !t2 || !t3) return std::nullopt;
        s.t1 = *t1;
        s.t2 = *t2;
        s.t3 = *t3;
        Int* scalars[6] = {&s.c, &s.s_alpha, &s.s_beta, &s.s_x, &s.s_delta1, &s.s_delta2};
        for (Int* out : scalars) {
            auto v = read_scalar(r);
            if (!v) return std::nullopt;
            *out = *v;
        }
        if (!r.done()) return std::nullopt;
        return s;
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::pair<GroupPublicKey, GroupIssuerKey> setup(const BilinearSuite& suite, uint64_t rng_seed) {
    Drbg rng(rng_seed, "gs-setup");
    const Int& r = suite.order();

    GroupIssuerKey issuer;
    issuer.gamma = suite.nonzero_scalar(rng);
    issuer.xi1 = suite.nonzero_scalar(rng);
    issuer.xi2 = suite.nonzero_scalar(rng);

    GroupPublicKey gpk;
    // h is setup-specific; u, v are fixed by h and the opening exponents.
    Int h_exp = suite.nonzero_scalar(rng);
    gpk.h = suite.g1().mul(h_exp);
    gpk.u = gpk.h.mul(inv_mod(issuer.xi1, r));
    gpk.v = gpk.h.mul(inv_mod(issuer.xi2, r));
    gpk.w = suite.g2().mul(issuer.gamma);
    gpk.egg = bn::pairing(suite.g1(), suite.g2());

    issuer.gpk = gpk;
    return {gpk, issuer};
}

MemberKey enroll(const BilinearSuite& suite, GroupIssuerKey& issuer, uint32_t index) {
    if (issuer.registry.contains(index))
        throw Error(Errc::validation, "gs enroll: member index already enrolled");
    // x_i derived from the issuer secret and index keeps enrollment
    // deterministic per group without a per-call seed.
    ByteWriter w;
    w.blob(bn::encode_scalar(issuer.gamma));
    w.u32(index);
    Int x = suite.hash_to_scalar(w.bytes(), "bbs-member-exp");
    const Int& r = suite.order();
    Int denom = add_mod(issuer.gamma, x, r);
    if (denom == 0) throw Error(Errc::crypto, "gs enroll: degenerate member exponent");

    MemberKey key;
    key.index = index;
    key.exponent = x;
    key.cert = suite.g1().mul(inv_mod(denom, r));
    issuer.registry.emplace(index, key.cert);
    return key;
}

bool member_key_consistent(const BilinearSuite& suite, const GroupPublicKey& gpk,
                           const MemberKey& member) {
    // e(A_i, w * g2^x_i) == e(g1, g2)
    G2 rhs = gpk.w.add(suite.g2().mul(member.exponent));
    return bn::pairing(member.cert, rhs) == gpk.egg;
}

GroupSignature sign(const BilinearSuite& suite, const GroupPublicKey& gpk,
                    const MemberKey& member, std::span<const uint8_t> message,
                    uint64_t rng_seed) {
    Drbg rng(rng_seed, "gs-sign");
    const Int& r = suite.order();

    Int alpha = suite.random_scalar(rng);
    Int beta = suite.random_scalar(rng);
    Int delta1 = mul_mod(member.exponent, alpha, r);
    Int delta2 = mul_mod(member.exponent, beta, r);

    Int r_alpha = suite.random_scalar(rng);
    Int r_beta = suite.random_scalar(rng);
    Int r_x = suite.random_scalar(rng);
    Int r_delta1 = suite.random_scalar(rng);
    Int r_delta2 = suite.random_scalar(rng);

    GroupSignature sig;
    sig.t1 = suite.g1_exp(gpk.u, alpha);
    sig.t2 = suite.g1_exp(gpk.v, beta);
    sig.t3 = suite.g1_mul(member.cert, suite.g1_exp(gpk.h, add_mod(alpha, beta, r)));

    G1 r1 = suite.g1_exp(gpk.u, r_alpha);
    G1 r2 = suite.g1_exp(gpk.v, r_beta);
    G1 r4 = suite.g1_mul(suite.g1_exp(sig.t1, r_x), suite.g1_exp(gpk.u, neg_mod(r_delta1, r)));
    G1 r5 = suite.g1_mul(suite.g1_exp(sig.t2, r_x), suite.g1_exp(gpk.v, neg_mod(r_delta2, r)));

    // R3: three live pairings per signature, matching the advertised cost.
    Gt p_t3_g2 = suite.pair(sig.t3, suite.g2());
    Gt p_h_w = suite.pair(gpk.h, gpk.w);
    Gt p_h_g2 = suite.pair(gpk.h, suite.g2());
    Gt r3 = suite.gt_mul(
        suite.gt_mul(suite.gt_exp(p_t3_g2, r_x),
                     suite.gt_exp(p_h_w, neg_mod(add_mod(r_alpha, r_beta, r), r))),
        suite.gt_exp(p_h_g2, neg_mod(add_mod(r_delta1, r_delta2, r), r)));

    sig.c = challenge(suite, message, sig.t1, sig.t2, sig.t3, r1, r2, r3, r4, r5);
    sig.s_alpha = add_mod(r_alpha, mul_mod(sig.c, alpha, r), r);
    sig.s_beta = add_mod(r_beta, mul_mod(sig.c, beta, r), r);
    sig.s_x = add_mod(r_x, mul_mod(sig.c, member.exponent, r), r);
    sig.s_delta1 = add_mod(r_delta1, mul_mod(sig.c, delta1, r), r);
    sig.s_delta2 = add_mod(r_delta2, mul_mod(sig.c, delta2, r), r);
    return sig;
}

VerifyStatus verify(const BilinearSuite& suite, const GroupPublicKey& gpk,
                    std::span<const uint8_t> message, const GroupSignature& sig) {
    if (sig.t1.infinity || sig.t2.infinity || sig.t3.infinity) return VerifyStatus::malformed;
    if (!sig.t1.is_on_curve() || !sig.t2.is_on_curve() || !sig.t3.is_on_curve())
        return VerifyStatus::malformed;
    const Int& r = suite.order();
    Int neg_c = neg_mod(sig.c, r);

    G1 r1 = suite.g1_mul(suite.g1_exp(gpk.u, sig.s_alpha), suite.g1_exp(sig.t1, neg_c));
    G1 r2 = suite.g1_mul(suite.g1_exp(gpk.v, sig.s_beta), suite.g1_exp(sig.t2, neg_c));
    G1 r4 = suite.g1_mul(suite.g1_exp(sig.t1, sig.s_x),
                         suite.g1_exp(gpk.u, neg_mod(sig.s_delta1, r)));
    G1 r5 = suite.g1_mul(suite.g1_exp(sig.t2, sig.s_x),
                         suite.g1_exp(gpk.v, neg_mod(sig.s_delta2, r)));

    // Four live pairings; only e(g1, g2) rides precomputed in the key.
    Gt p_t3_g2 = suite.pair(sig.t3, suite.g2());
    Gt p_h_w = suite.pair(gpk.h, gpk.w);
    Gt p_h_g2 = suite.pair(gpk.h, suite.g2());
    Gt p_t3_w = suite.pair(sig.t3, gpk.w);
    Gt r3 = suite.gt_mul(
        suite.gt_mul(suite.gt_mul(suite.gt_exp(p_t3_g2, sig.s_x),
                                  suite.gt_exp(p_h_w, neg_mod(add_mod(sig.s_alpha, sig.s_beta, r), r))),
                     suite.gt_mul(suite.gt_exp(p_h_g2,
                                               neg_mod(add_mod(sig.s_delta1, sig.s_delta2, r), r)),
                                  suite.gt_exp(p_t3_w, sig.c))),
        suite.gt_exp(gpk.egg, neg_c));

    Int expected = challenge(suite, message, sig.t1, sig.t2, sig.t3, r1, r2, r3, r4, r5);
    return expected == sig.c ? VerifyStatus::ok : VerifyStatus::bad_signature;
}

VerifyStatus verify_encoded(const BilinearSuite& suite, const GroupPublicKey& gpk,
                            std::span<const uint8_t> message,
                            std::span<const uint8_t> sig_bytes) {
    auto sig = GroupSignature::decode(sig_bytes);
    if (!sig) return VerifyStatus::malformed;
    return verify(suite, gpk, message, *sig);
}

std::optional<uint32_t> open(const BilinearSuite& suite, const GroupIssuerKey& issuer,
                             std::span<const uint8_t> message, const GroupSignature& sig) {
    if (verify(suite, issuer.gpk, message, sig) != VerifyStatus::ok) return std::nullopt;
    // A_i = T3 / (T1^xi1 * T2^xi2)
    G1 blind = sig.t1.mul(issuer.xi1).add(sig.t2.mul(issuer.xi2));
    G1 cert = sig.t3.add(blind.neg());
    for (const auto& [idx, enrolled] : issuer.registry) {
        if (enrolled == cert) return idx;
    }
    return std::nullopt;
}

}  // namespace resiot::gs
