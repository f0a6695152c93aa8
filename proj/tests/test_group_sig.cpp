#include <doctest.h>

#include <cmath>
#include <set>

#include "resiot/group_sig.hpp"

using namespace resiot;

namespace {
const BilinearSuite& suite() { return BilinearSuite::standard(); }
}  // namespace

TEST_CASE("setup is reproducible per seed and distinct across seeds") {
    auto [gpk_a, issuer_a] = gs::setup(suite(), 11);
    auto [gpk_b, issuer_b] = gs::setup(suite(), 11);
    CHECK(gpk_a.encode() == gpk_b.encode());

    std::set<Bytes> encodings;
    for (uint64_t seed = 0; seed < 100; ++seed)
        encodings.insert(gs::setup(suite(), seed).first.encode());
    CHECK(encodings.size() == 100);
}

TEST_CASE("enrollment produces keys satisfying the membership equation") {
    auto [gpk, issuer] = gs::setup(suite(), 21);
    gs::MemberKey m1 = gs::enroll(suite(), issuer, 1);
    CHECK(gs::member_key_consistent(suite(), gpk, m1));
    CHECK_THROWS_AS((void)gs::enroll(suite(), issuer, 1), Error);  // duplicate index

    std::set<Bytes> certs;
    certs.insert(bn::encode_g1(m1.cert));
    for (uint32_t i = 2; i <= 50; ++i) {
        gs::MemberKey m = gs::enroll(suite(), issuer, i);
        CHECK(gs::member_key_consistent(suite(), gpk, m));
        certs.insert(bn::encode_g1(m.cert));
    }
    CHECK(certs.size() == 50);  // pairwise distinct certificates
}

TEST_CASE("sign/verify round trip; reseeding changes the signature") {
    auto [gpk, issuer] = gs::setup(suite(), 31);
    gs::MemberKey member = gs::enroll(suite(), issuer, 5);
    Bytes msg = to_bytes("attest me");

    gs::GroupSignature s1 = gs::sign(suite(), gpk, member, msg, 100);
    gs::GroupSignature s2 = gs::sign(suite(), gpk, member, msg, 101);
    CHECK(gs::verify(suite(), gpk, msg, s1) == gs::VerifyStatus::ok);
    CHECK(gs::verify(suite(), gpk, msg, s2) == gs::VerifyStatus::ok);
    CHECK(s1.encode() != s2.encode());

    Bytes altered = msg;
    altered[0] ^= 1;
    CHECK(gs::verify(suite(), gpk, altered, s1) == gs::VerifyStatus::bad_signature);
}

TEST_CASE("signing cost audit: 9 exp(G1) + 3 mul(G1) + 3 exp(GT) + 3 pairings") {
    auto [gpk, issuer] = gs::setup(suite(), 41);
    gs::MemberKey member = gs::enroll(suite(), issuer, 1);
    Bytes msg = to_bytes("count me");
    OpCounters counts;
    {
        CountScope scope;
        (void)gs::sign(suite(), gpk, member, msg, 7);
        counts = scope.counts();
    }
    CHECK(counts.exp_g1 == 9);
    CHECK(counts.mul_g1 == 3);
    CHECK(counts.exp_gt == 3);
    CHECK(counts.pairing == 3);
    CHECK(counts.exp_g2 == 0);
}

TEST_CASE("verification cost audit: 8 exp(G1) + 4 mul(G1) + 5 exp(GT) + 4 pairings") {
    auto [gpk, issuer] = gs::setup(suite(), 41);
    gs::MemberKey member = gs::enroll(suite(), issuer, 1);
    Bytes msg = to_bytes("count me");
    gs::GroupSignature sig = gs::sign(suite(), gpk, member, msg, 7);
    OpCounters counts;
    {
        CountScope scope;
        CHECK(gs::verify(suite(), gpk, msg, sig) == gs::VerifyStatus::ok);
        counts = scope.counts();
    }
    CHECK(counts.exp_g1 == 8);
    CHECK(counts.mul_g1 == 4);
    CHECK(counts.exp_gt == 5);
    CHECK(counts.pairing == 4);
}

TEST_CASE("malformed encodings are rejected with a distinct status") {
    auto [gpk, issuer] = gs::setup(suite(), 51);
    gs::MemberKey member = gs::enroll(suite(), issuer, 1);
    Bytes msg = to_bytes("m");
    Bytes sig_bytes = gs::sign(suite(), gpk, member, msg, 1).encode();
    sig_bytes[10] ^= 0xff;  // corrupt a point encoding
    CHECK(gs::verify_encoded(suite(), gpk, msg, sig_bytes) == gs::VerifyStatus::malformed);
    CHECK(gs::verify_encoded(suite(), gpk, msg, to_bytes("junk")) == gs::VerifyStatus::malformed);
}

TEST_CASE("opening traces every enrolled member") {
    auto [gpk, issuer] = gs::setup(suite(), 61);
    std::vector<gs::MemberKey> members;
    for (uint32_t i = 1; i <= 50; ++i) members.push_back(gs::enroll(suite(), issuer, i));
    Bytes msg = to_bytes("trace");
    for (uint32_t i : {1u, 3u, 7u, 25u, 50u}) {
        gs::GroupSignature sig = gs::sign(suite(), gpk, members[i - 1], msg, 200 + i);
        auto opened = gs::open(suite(), issuer, msg, sig);
        REQUIRE(opened.has_value());
        CHECK(*opened == i);
    }
    // tampered signature does not open
    gs::GroupSignature sig = gs::sign(suite(), gpk, members[6], msg, 300);
    sig.s_x = sig.s_x + 1;
    CHECK_FALSE(gs::open(suite(), issuer, msg, sig).has_value());
}

TEST_CASE("signatures never verify under an independent group") {
    auto [gpk1, issuer1] = gs::setup(suite(), 71);
    auto [gpk2, issuer2] = gs::setup(suite(), 72);
    gs::MemberKey member = gs::enroll(suite(), issuer1, 1);
    Drbg rng(5, "unforge");
    for (int i = 0; i < 10; ++i) {
        Bytes msg = rng.bytes(24);
        gs::GroupSignature sig = gs::sign(suite(), gpk1, member, msg, 400 + i);
        CHECK(gs::verify(suite(), gpk1, msg, sig) == gs::VerifyStatus::ok);
        CHECK(gs::verify(suite(), gpk2, msg, sig) == gs::VerifyStatus::bad_signature);
    }
}

TEST_CASE("signer identity is statistically invisible in signature bytes") {
    auto [gpk, issuer] = gs::setup(suite(), 81);
    gs::MemberKey alice = gs::enroll(suite(), issuer, 1);
    gs::MemberKey bob = gs::enroll(suite(), issuer, 2);
    Bytes msg = to_bytes("fixed message");

    // 100 labeled signatures; correlate every early byte with the label. A
    // verifier-visible identity leak would show up as a strong correlation.
    const int trials = 100;
    Drbg rng(6, "anon");
    std::vector<int> labels;
    std::vector<Bytes> sigs;
    for (int i = 0; i < trials; ++i) {
        int label = static_cast<int>(rng.next_u64() & 1);
        labels.push_back(label);
        const gs::MemberKey& member = label ? alice : bob;
        sigs.push_back(gs::sign(suite(), gpk, member, msg, 1000 + i).encode());
    }
    size_t scan = 64;  // covers T1's encoding
    double worst = 0;
    for (size_t byte_idx = 8; byte_idx < scan; ++byte_idx) {
        double mean_label = 0, mean_byte = 0;
        for (int i = 0; i < trials; ++i) {
            mean_label += labels[i];
            mean_byte += sigs[i][byte_idx];
        }
        mean_label /= trials;
        mean_byte /= trials;
        double cov = 0, var_l = 0, var_b = 0;
        for (int i = 0; i < trials; ++i) {
            double dl = labels[i] - mean_label;
            double db = sigs[i][byte_idx] - mean_byte;
            cov += dl * db;
            var_l += dl * dl;
            var_b += db * db;
        }
        if (var_l == 0 || var_b == 0) continue;
        worst = std::max(worst, std::abs(cov / std::sqrt(var_l * var_b)));
    }
    CHECK(worst < 0.45);  // ~4.5 sigma headroom at n=100

    // ...while the issuer still distinguishes them perfectly.
    gs::GroupSignature from_alice = gs::sign(suite(), gpk, alice, msg, 9000);
    CHECK(*gs::open(suite(), issuer, msg, from_alice) == 1);
}

TEST_CASE("key and signature serialization round-trips byte-identically") {
    auto [gpk, issuer] = gs::setup(suite(), 91);
    gs::MemberKey member = gs::enroll(suite(), issuer, 1);
    auto gpk2 = gs::GroupPublicKey::decode(gpk.encode());
    REQUIRE(gpk2.has_value());
    CHECK(gpk2->encode() == gpk.encode());
    auto issuer2 = gs::GroupIssuerKey::decode(issuer.encode());
    REQUIRE(issuer2.has_value());
    CHECK(issuer2->encode() == issuer.encode());
    auto member2 = gs::MemberKey::decode(member.encode());
    REQUIRE(member2.has_value());
    CHECK(member2->encode() == member.encode());

    Bytes msg = to_bytes("serialize");
    gs::GroupSignature sig = gs::sign(suite(), *gpk2, *member2, msg, 3);
    CHECK(gs::verify(suite(), gpk, msg, sig) == gs::VerifyStatus::ok);
    auto opened = gs::open(suite(), *issuer2, msg, sig);
    REQUIRE(opened.has_value());
    CHECK(*opened == 1);
}
