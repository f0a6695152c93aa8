#ifndef RESIOT_ABE_HPP
#define RESIOT_ABE_HPP

#include <string>
#include <vector>

#include "resiot/suite.hpp"

// GPSW key-policy ABE over a small attribute universe: ciphertexts carry
// attribute sets, decryption keys embed threshold access trees, and a key
// opens a ciphertext iff the ciphertext's attributes satisfy the tree.
namespace resiot::abe {

using AttrId = uint32_t;

struct PolicyNode {
    enum class Kind : uint8_t { leaf, threshold };
    Kind kind = Kind::leaf;
    AttrId attr = 0;          // leaf payload
    uint32_t threshold = 0;   // t-of-n for internal nodes
    std::vector<PolicyNode> children;

    bool operator==(const PolicyNode&) const = default;
};

struct AccessPolicy {
    PolicyNode root;

    // Throws Error(validation) if any threshold is out of range or a leaf
    // attribute falls outside the universe.
    void validate(uint32_t universe_size) const;
    uint32_t leaf_count() const;

    Bytes encode() const;
    static std::optional<AccessPolicy> decode(std::span<const uint8_t> in);
    bool operator==(const AccessPolicy&) const = default;
};

// Text form: thresh(t, ...), and(...), or(...), leaves as integers or attrN.
// Throws Error(parse) with the offending position on malformed input.
AccessPolicy parse_policy(std::string_view text);
std::string format_policy(const AccessPolicy& policy);

// True iff `attrs` satisfies the tree. This is the production-side evaluator;
// tests check it against an independent recursive oracle.
bool policy_satisfied(const AccessPolicy& policy, const std::vector<AttrId>& attrs);

struct AbePublicKey {
    uint32_t universe = 0;
    std::vector<G1> attr_elems;  // T_i = g1^t_i
    Gt blind;                    // Y = e(g1, g2)^y

    Bytes encode() const;
    static std::optional<AbePublicKey> decode(std::span<const uint8_t> in);
};

struct AbeMasterKey {
    std::vector<Int> attr_scalars;  // t_i
    Int master;                     // y

    Bytes encode() const;
    static std::optional<AbeMasterKey> decode(std::span<const uint8_t> in);
};

struct AbeDecryptionKey {
    AccessPolicy policy;
    std::vector<G2> leaf_shares;  // one per policy leaf, depth-first order

    Bytes encode() const;
    static std::optional<AbeDecryptionKey> decode(std::span<const uint8_t> in);
};

struct AbeCiphertext {
    std::vector<AttrId> attrs;                      // sorted, distinct
    Gt masked;                                      // M * Y^s
    std::vector<std::pair<AttrId, G1>> components;  // T_i^s per attribute
    Ciphertext wrapped;                             // hybrid payload wrap

    Bytes encode() const;
    static std::optional<AbeCiphertext> decode(std::span<const uint8_t> in);
};

enum class DecryptStatus {
    ok,
    policy_unsatisfied,
    malformed,
};

struct DecryptResult {
    DecryptStatus status = DecryptStatus::malformed;
    Bytes payload;
};

std::pair<AbePublicKey, AbeMasterKey> setup(const BilinearSuite& suite, uint32_t universe_size,
                                            uint64_t rng_seed);

AbeDecryptionKey keygen(const BilinearSuite& suite, const AbeMasterKey& msk,
                        const AccessPolicy& policy, uint64_t rng_seed);

// Counted core: encrypts a GT element under an attribute set. This is the SF
// critical path the operation audit measures.
AbeCiphertext encrypt_element(const BilinearSuite& suite, const AbePublicKey& pk,
                              std::vector<AttrId> attrs, const Gt& message, uint64_t rng_seed);

// Counted core: recovers the GT element iff the key's policy is satisfied.
std::optional<Gt> decrypt_element(const BilinearSuite& suite, const AbeDecryptionKey& key,
                                  const AbeCiphertext& ct);

// Byte-payload hybrid on top of the core: a random GT mask is hashed into a
// symmetric wrap key for the payload.
AbeCiphertext encrypt(const BilinearSuite& suite, const AbePublicKey& pk,
                      std::vector<AttrId> attrs, std::span<const uint8_t> payload,
                      uint64_t rng_seed);

DecryptResult decrypt(const BilinearSuite& suite, const AbeDecryptionKey& key,
                      const AbeCiphertext& ct);

}  // namespace resiot::abe

#endif
