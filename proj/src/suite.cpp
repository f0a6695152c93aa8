#include "resiot/suite.hpp"

#include <openssl/evp.h>

namespace resiot {

namespace {

constexpr size_t kNonceLen = 12;
constexpr size_t kTagLen = 16;

struct EvpCtx {
    EVP_CIPHER_CTX* ctx;
    EvpCtx() : ctx(EVP_CIPHER_CTX_new()) {
        if (!ctx) throw Error(Errc::internal, "EVP_CIPHER_CTX_new failed");
    }
    ~EvpCtx() { EVP_CIPHER_CTX_free(ctx); }
};

}  // namespace

Bytes Ciphertext::encode() const {
    ByteWriter w;
    w.blob(nonce);
    w.blob(body);
    w.blob(tag);
    return w.take();
}

std::optional<Ciphertext> Ciphertext::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        Ciphertext ct;
        ct.nonce = r.blob();
        ct.body = r.blob();
        ct.tag = r.blob();
        if (!r.done()) return std::nullopt;
        if (ct.nonce.size() != kNonceLen || ct.tag.size() != kTagLen) return std::nullopt;
        return ct;
    } catch (const Error&) {
        return std::nullopt;
    }
}

const BilinearSuite& BilinearSuite::standard() {
    static const BilinearSuite instance;
    return instance;
}

G1 BilinearSuite::g1_exp(const G1& base, const Int& e) const {
    counters::tick_exp_g1();
    return base.mul(e);
}

G1 BilinearSuite::g1_mul(const G1& a, const G1& b) const {
    counters::tick_mul_g1();
    return a.add(b);
}

G2 BilinearSuite::g2_exp(const G2& base, const Int& e) const {
    counters::tick_exp_g2();
    return base.mul(e);
}

G2 BilinearSuite::g2_mul(const G2& a, const G2& b) const {
    counters::tick_mul_g2();
    return a.add(b);
}

Gt BilinearSuite::gt_exp(const Gt& base, const Int& e) const {
    counters::tick_exp_gt();
    Int reduced;
    mpz_mod(reduced.get_mpz_t(), e.get_mpz_t(), order().get_mpz_t());
    return base.pow(reduced);
}

Gt BilinearSuite::gt_mul(const Gt& a, const Gt& b) const {
    counters::tick_mul_gt();
    return a * b;
}

Gt BilinearSuite::pair(const G1& p, const G2& q) const {
    counters::tick_pairing();
    return bn::pairing(p, q);
}

Int BilinearSuite::random_scalar(Drbg& rng) const {
    // 48 bytes mod r keeps the 2^-128 bias irrelevant at desk scale.
    Bytes wide = rng.bytes(48);
    Int v = bn::int_from_bytes(wide);
    Int out;
    mpz_mod(out.get_mpz_t(), v.get_mpz_t(), order().get_mpz_t());
    return out;
}

Int BilinearSuite::nonzero_scalar(Drbg& rng) const {
    for (;;) {
        Int v = random_scalar(rng);
        if (v != 0) return v;
    }
}

Int BilinearSuite::hash_to_scalar(std::span<const uint8_t> data, std::string_view domain) const {
    ByteWriter w;
    w.str("resiot-h2s");
    w.str(domain);
    w.blob(data);
    auto d0 = sha256(w.bytes());
    ByteWriter w2;
    w2.raw(d0);
    w2.str("x");
    auto d1 = sha256(w2.bytes());
    Bytes wide(d0.begin(), d0.end());
    wide.insert(wide.end(), d1.begin(), d1.begin() + 16);
    Int v = bn::int_from_bytes(wide);
    Int out;
    mpz_mod(out.get_mpz_t(), v.get_mpz_t(), order().get_mpz_t());
    return out;
}

G1 BilinearSuite::hash_to_g1(std::string_view label) const {
    for (uint32_t ctr = 0;; ++ctr) {
        ByteWriter w;
        w.str("resiot-h2g1");
        w.str(label);
        w.u32(ctr);
        auto digest = sha256(w.bytes());
        bn::Fp x(bn::int_from_bytes(digest));
        auto y = bn::g1_y_for_x(x);
        if (!y) continue;
        G1 p;
        p.infinity = false;
        p.x = x;
        p.y = *y;
        return p;  // cofactor 1: any curve point is in the r-order group
    }
}

DhKeypair BilinearSuite::dh_generate(uint64_t rng_seed) const {
    Drbg rng(rng_seed, "dh-keypair");
    return dh_generate(rng);
}

DhKeypair BilinearSuite::dh_generate(Drbg& rng) const {
    DhKeypair kp;
    kp.secret = nonzero_scalar(rng);
    kp.pub = g1().mul(kp.secret);
    return kp;
}

SessionKey BilinearSuite::dh_agree(const DhKeypair& mine, const G1& theirs_public) const {
    if (theirs_public.infinity) throw Error(Errc::crypto, "dh_agree: peer public is identity");
    if (!theirs_public.is_on_curve()) throw Error(Errc::crypto, "dh_agree: peer public off curve");
    G1 shared = theirs_public.mul(mine.secret);
    return kdf(bn::encode_g1(shared), "dh-shared");
}

SessionKey BilinearSuite::kdf(std::span<const uint8_t> input, std::string_view domain) const {
    ByteWriter w;
    w.str("resiot-kdf-sha256");
    w.str(domain);
    w.blob(input);
    SessionKey out;
    out.key = sha256(w.bytes());
    return out;
}

Bytes BilinearSuite::derive_nonce(std::span<const uint8_t> input, std::string_view purpose) const {
    ByteWriter w;
    w.str("resiot-nonce");
    w.str(purpose);
    w.blob(input);
    auto digest = sha256(w.bytes());
    return Bytes(digest.begin(), digest.begin() + kNonceLen);
}

Ciphertext BilinearSuite::sym_encrypt(const SessionKey& key, std::span<const uint8_t> plaintext,
                                      uint64_t rng_seed) const {
    Drbg rng(rng_seed, "sym-nonce");
    Bytes nonce = rng.bytes(kNonceLen);
    return sym_encrypt_with_nonce(key, nonce, plaintext);
}

Ciphertext BilinearSuite::sym_encrypt_with_nonce(const SessionKey& key,
                                                 std::span<const uint8_t> nonce12,
                                                 std::span<const uint8_t> plaintext) const {
    if (nonce12.size() != kNonceLen) throw Error(Errc::crypto, "sym_encrypt: bad nonce length");
    EvpCtx evp;
    if (EVP_EncryptInit_ex(evp.ctx, EVP_aes_256_gcm(), nullptr, key.key.data(), nonce12.data()) != 1)
        throw Error(Errc::internal, "EVP_EncryptInit failed");
    Ciphertext ct;
    ct.nonce.assign(nonce12.begin(), nonce12.end());
    ct.body.resize(plaintext.size());
    int len = 0;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(evp.ctx, ct.body.data(), &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1)
        throw Error(Errc::internal, "EVP_EncryptUpdate failed");
    int fin = 0;
    if (EVP_EncryptFinal_ex(evp.ctx, ct.body.data() + len, &fin) != 1)
        throw Error(Errc::internal, "EVP_EncryptFinal failed");
    ct.tag.resize(kTagLen);
    if (EVP_CIPHER_CTX_ctrl(evp.ctx, EVP_CTRL_GCM_GET_TAG, kTagLen, ct.tag.data()) != 1)
        throw Error(Errc::internal, "EVP get tag failed");
    return ct;
}

std::optional<Bytes> BilinearSuite::sym_decrypt(const SessionKey& key, const Ciphertext& ct) const {
    if (ct.nonce.size() != kNonceLen || ct.tag.size() != kTagLen) return std::nullopt;
    EvpCtx evp;
    if (EVP_DecryptInit_ex(evp.ctx, EVP_aes_256_gcm(), nullptr, key.key.data(), ct.nonce.data()) != 1)
        throw Error(Errc::internal, "EVP_DecryptInit failed");
    Bytes out(ct.body.size());
    int len = 0;
    if (!ct.body.empty() &&
        EVP_DecryptUpdate(evp.ctx, out.data(), &len, ct.body.data(),
                          static_cast<int>(ct.body.size())) != 1)
        return std::nullopt;
    Bytes tag = ct.tag;
    if (EVP_CIPHER_CTX_ctrl(evp.ctx, EVP_CTRL_GCM_SET_TAG, kTagLen, tag.data()) != 1)
        throw Error(Errc::internal, "EVP set tag failed");
    int fin = 0;
    if (EVP_DecryptFinal_ex(evp.ctx, out.data() + len, &fin) != 1) return std::nullopt;
    return out;
}

}  // namespace resiot
