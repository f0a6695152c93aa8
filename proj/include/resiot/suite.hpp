#ifndef RESIOT_SUITE_HPP
#define RESIOT_SUITE_HPP

#include <optional>
#include <string>
#include <string_view>

#include "resiot/bn254.hpp"
#include "resiot/bytes.hpp"
#include "resiot/counters.hpp"

namespace resiot {

using bn::G1;
using bn::G2;
using bn::Gt;
using bn::Int;

struct DhKeypair {
    Int secret;
    G1 pub;  // g^secret
};

struct SessionKey {
    std::array<uint8_t, 32> key{};

    bool operator==(const SessionKey&) const = default;
};

// AEAD ciphertext (AES-256-GCM): 12-byte nonce, body, 16-byte tag.
struct Ciphertext {
    Bytes nonce;
    Bytes body;
    Bytes tag;

    Bytes encode() const;
    static std::optional<Ciphertext> decode(std::span<const uint8_t> in);
    bool operator==(const Ciphertext&) const = default;
};

// Pairing groups plus the symmetric/KDF primitives every protocol module
// uses. Group operations are written multiplicatively to match the usual
// pairing notation, and the *counted* entry points (g1_exp .. pair) feed the
// operation audit; keep SF critical paths on them.
class BilinearSuite {
public:
    static const BilinearSuite& standard();

    // Identifiers recorded in outputs so transcripts are reproducible.
    std::string curve_id() const { return "bn254"; }
    std::string kdf_id() const { return "sha256"; }
    std::string aead_id() const { return "aes256gcm"; }

    const Int& order() const { return bn::group_order(); }
    G1 g1() const { return G1::generator(); }
    G2 g2() const { return G2::generator(); }

    // Counted group operations.
    G1 g1_exp(const G1& base, const Int& e) const;
    G1 g1_mul(const G1& a, const G1& b) const;
    G2 g2_exp(const G2& base, const Int& e) const;
    G2 g2_mul(const G2& a, const G2& b) const;
    Gt gt_exp(const Gt& base, const Int& e) const;
    Gt gt_mul(const Gt& a, const Gt& b) const;
    Gt pair(const G1& p, const G2& q) const;

    // Uncounted helpers.
    Gt gt_inv_unitary(const Gt& e) const { return e.conj(); }
    Int random_scalar(Drbg& rng) const;
    Int nonzero_scalar(Drbg& rng) const;
    Int hash_to_scalar(std::span<const uint8_t> data, std::string_view domain) const;
    G1 hash_to_g1(std::string_view label) const;  // try-and-increment

    // Diffie-Hellman over G1.
    DhKeypair dh_generate(uint64_t rng_seed) const;
    DhKeypair dh_generate(Drbg& rng) const;
    SessionKey dh_agree(const DhKeypair& mine, const G1& theirs_public) const;

    // Authenticated symmetric encryption.
    Ciphertext sym_encrypt(const SessionKey& key, std::span<const uint8_t> plaintext,
                           uint64_t rng_seed) const;
    Ciphertext sym_encrypt_with_nonce(const SessionKey& key, std::span<const uint8_t> nonce12,
                                      std::span<const uint8_t> plaintext) const;
    std::optional<Bytes> sym_decrypt(const SessionKey& key, const Ciphertext& ct) const;

    SessionKey kdf(std::span<const uint8_t> input, std::string_view domain) const;
    // Deterministic 12-byte AEAD nonce bound to a purpose label.
    Bytes derive_nonce(std::span<const uint8_t> input, std::string_view purpose) const;
};

}  // namespace resiot

#endif
