#ifndef RESIOT_GROUP_SIG_HPP
#define RESIOT_GROUP_SIG_HPP

#include <map>
#include <optional>

#include "resiot/suite.hpp"

// BBS short group signatures. Any enrolled member signs on behalf of the
// group; verifiers learn nothing beyond membership; the issuer can open a
// signature to the signing member's index.
namespace resiot::gs {

struct GroupPublicKey {
    G1 h, u, v;  // u^xi1 = v^xi2 = h
    G2 w;        // g2^gamma
    Gt egg;      // e(g1, g2), the one precomputed pairing

    Bytes encode() const;
    static std::optional<GroupPublicKey> decode(std::span<const uint8_t> in);
};

struct MemberKey {
    uint32_t index = 0;
    G1 cert;  // A_i = g1^(1/(gamma + x_i))
    Int exponent;  // x_i

    Bytes encode() const;
    static std::optional<MemberKey> decode(std::span<const uint8_t> in);
};

struct GroupIssuerKey {
    Int gamma;
    Int xi1, xi2;
    GroupPublicKey gpk;
    std::map<uint32_t, G1> registry;  // enrolled member certificates

    Bytes encode() const;
    static std::optional<GroupIssuerKey> decode(std::span<const uint8_t> in);
};

// Signature tuple (T1, T2, T3, c, s_alpha, s_beta, s_x, s_delta1, s_delta2).
struct GroupSignature {
    G1 t1, t2, t3;
    Int c, s_alpha, s_beta, s_x, s_delta1, s_delta2;

    Bytes encode() const;
    static std::optional<GroupSignature> decode(std::span<const uint8_t> in);
};

enum class VerifyStatus {
    ok,
    bad_signature,
    malformed,
};

std::pair<GroupPublicKey, GroupIssuerKey> setup(const BilinearSuite& suite, uint64_t rng_seed);

// Throws Error(validation) on duplicate index. Mutates the issuer registry.
MemberKey enroll(const BilinearSuite& suite, GroupIssuerKey& issuer, uint32_t index);

bool member_key_consistent(const BilinearSuite& suite, const GroupPublicKey& gpk,
                           const MemberKey& member);

GroupSignature sign(const BilinearSuite& suite, const GroupPublicKey& gpk,
                    const MemberKey& member, std::span<const uint8_t> message,
                    uint64_t rng_seed);

VerifyStatus verify(const BilinearSuite& suite, const GroupPublicKey& gpk,
                    std::span<const uint8_t> message, const GroupSignature& sig);
VerifyStatus verify_encoded(const BilinearSuite& suite, const GroupPublicKey& gpk,
                            std::span<const uint8_t> message, std::span<const uint8_t> sig_bytes);

// Traces a verifying signature to the member index that produced it.
// Returns nullopt when the signature does not verify or the certificate is
// not in the registry.
std::optional<uint32_t> open(const BilinearSuite& suite, const GroupIssuerKey& issuer,
                             std::span<const uint8_t> message, const GroupSignature& sig);

}  // namespace resiot::gs

#endif
