#include "resiot/abe.hpp"

#include <algorithm>
#include <cctype>

namespace resiot::abe {

namespace {

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
        throw Error(Errc::crypto, "abe: non-invertible scalar");
    return t;
}

// Lagrange coefficient Delta_{i,S}(0) over the 1-based child indices in S.
Int lagrange_at_zero(uint32_t i, const std::vector<uint32_t>& s, const Int& m) {
    Int num(1), den(1);
    for (uint32_t j : s) {
        if (j == i) continue;
        num = mul_mod(num, Int(m - j), m);  // (0 - j) mod m
        Int diff = Int(static_cast<long>(i)) - Int(static_cast<long>(j));
        mpz_mod(diff.get_mpz_t(), diff.get_mpz_t(), m.get_mpz_t());
        den = mul_mod(den, diff, m);
    }
    return mul_mod(num, inv_mod(den, m), m);
}

void validate_node(const PolicyNode& node, uint32_t universe_size) {
    if (node.kind == PolicyNode::Kind::leaf) {
        if (node.attr >= universe_size)
            throw Error(Errc::validation, "policy leaf attribute outside universe");
        return;
    }
    if (node.children.empty())
        throw Error(Errc::validation, "policy threshold node has no children");
    if (node.threshold < 1 || node.threshold > node.children.size())
        throw Error(Errc::validation, "policy threshold out of range");
    for (const auto& child : node.children) validate_node(child, universe_size);
}

uint32_t count_leaves(const PolicyNode& node) {
    if (node.kind == PolicyNode::Kind::leaf) return 1;
    uint32_t n = 0;
    for (const auto& child : node.children) n += count_leaves(child);
    return n;
}

void encode_node(ByteWriter& w, const PolicyNode& node) {
    w.u8(static_cast<uint8_t>(node.kind));
    if (node.kind == PolicyNode::Kind::leaf) {
        w.u32(node.attr);
    } else {
        w.u32(node.threshold);
        w.u32(static_cast<uint32_t>(node.children.size()));
        for (const auto& child : node.children) encode_node(w, child);
    }
}

PolicyNode decode_node(ByteReader& r, int depth) {
    if (depth > 64) throw Error(Errc::parse, "policy nesting too deep");
    PolicyNode node;
    node.kind = static_cast<PolicyNode::Kind>(r.u8());
    if (node.kind == PolicyNode::Kind::leaf) {
        node.attr = r.u32();
    } else if (node.kind == PolicyNode::Kind::threshold) {
        node.threshold = r.u32();
        uint32_t n = r.u32();
        if (n > 4096) throw Error(Errc::parse, "policy node too wide");
        node.children.reserve(n);
        for (uint32_t i = 0; i < n; ++i) node.children.push_back(decode_node(r, depth + 1));
    } else {
        throw Error(Errc::parse, "unknown policy node kind");
    }
    return node;
}

bool node_satisfied(const PolicyNode& node, const std::vector<AttrId>& attrs) {
    if (node.kind == PolicyNode::Kind::leaf)
        return std::find(attrs.begin(), attrs.end(), node.attr) != attrs.end();
    uint32_t hits = 0;
    for (const auto& child : node.children)
        if (node_satisfied(child, attrs)) ++hits;
    return hits >= node.threshold;
}

void write_g1(ByteWriter& w, const G1& p) { w.blob(bn::encode_g1(p)); }
void write_g2(ByteWriter& w, const G2& p) { w.blob(bn::encode_g2(p)); }
void write_gt(ByteWriter& w, const Gt& e) { w.blob(bn::encode_gt(e)); }
void write_scalar(ByteWriter& w, const Int& s) { w.blob(bn::encode_scalar(s)); }

// --- policy text parser ----------------------------------------------------

struct PolicyParser {
    std::string_view text;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(Errc::parse,
                    "policy parse error at position " + std::to_string(pos) + ": " + what);
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    std::string ident() {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        if (start == pos) fail("expected attribute or operator");
        return std::string(text.substr(start, pos - start));
    }

    uint32_t number(const std::string& tok) {
        uint64_t v = 0;
        for (char c : tok) {
            if (!std::isdigit(static_cast<unsigned char>(c))) fail("expected a number");
            v = v * 10 + static_cast<uint64_t>(c - '0');
            if (v > 0xffffffffULL) fail("number out of range");
        }
        return static_cast<uint32_t>(v);
    }

    PolicyNode parse_node(int depth) {
        if (depth > 32) fail("nesting too deep");
        std::string tok = ident();
        if (tok == "thresh" || tok == "and" || tok == "or") {
            if (!consume('(')) fail("expected '(' after " + tok);
            PolicyNode node;
            node.kind = PolicyNode::Kind::threshold;
            if (tok == "thresh") {
                std::string t = ident();
                node.threshold = number(t);
                if (!consume(',')) fail("expected ',' after threshold");
            }
            node.children.push_back(parse_node(depth + 1));
            while (consume(',')) node.children.push_back(parse_node(depth + 1));
            if (!consume(')')) fail("expected ')'");
            if (tok == "and") node.threshold = static_cast<uint32_t>(node.children.size());
            if (tok == "or") node.threshold = 1;
            return node;
        }
        // leaf: "7" or "attr7"
        PolicyNode leaf;
        leaf.kind = PolicyNode::Kind::leaf;
        std::string digits = tok;
        if (tok.size() > 4 && tok.substr(0, 4) == "attr") digits = tok.substr(4);
        leaf.attr = number(digits);
        return leaf;
    }
};

void format_node(const PolicyNode& node, std::string& out) {
    if (node.kind == PolicyNode::Kind::leaf) {
        out += std::to_string(node.attr);
        return;
    }
    out += "thresh(" + std::to_string(node.threshold);
    for (const auto& child : node.children) {
        out += ", ";
        format_node(child, out);
    }
    out += ")";
}

// --- satisfying-subtree selection -------------------------------------------

struct Selection {
    const PolicyNode* node;
    std::vector<uint32_t> chosen_indices;      // 1-based, internal nodes only
    std::vector<Selection> chosen_children;
};

// Smallest-index-first deterministic choice of a satisfying subtree, so
// decryption cost is reproducible for a given (policy, attrs) pair.
std::optional<Selection> select_subtree(const PolicyNode& node, const std::vector<AttrId>& attrs) {
    Selection sel;
    sel.node = &node;
    if (node.kind == PolicyNode::Kind::leaf) {
        if (std::find(attrs.begin(), attrs.end(), node.attr) == attrs.end()) return std::nullopt;
        return sel;
    }
    for (uint32_t i = 0; i < node.children.size() && sel.chosen_children.size() < node.threshold;
         ++i) {
        auto child = select_subtree(node.children[i], attrs);
        if (child) {
            sel.chosen_indices.push_back(i + 1);
            sel.chosen_children.push_back(std::move(*child));
        }
    }
    if (sel.chosen_children.size() < node.threshold) return std::nullopt;
    return sel;
}

}  // namespace

void AccessPolicy::validate(uint32_t universe_size) const { validate_node(root, universe_size); }

uint32_t AccessPolicy::leaf_count() const { return count_leaves(root); }

Bytes AccessPolicy::encode() const {
    ByteWriter w;
    encode_node(w, root);
    return w.take();
}

std::optional<AccessPolicy> AccessPolicy::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        AccessPolicy p;
        p.root = decode_node(r, 0);
        if (!r.done()) return std::nullopt;
        return p;
    } catch (const Error&) {
        return std::nullopt;
    }
}

AccessPolicy parse_policy(std::string_view text) {
    PolicyParser parser{text};
    AccessPolicy policy;
    policy.root = parser.parse_node(0);
    parser.skip_ws();
    if (parser.pos != text.size()) parser.fail("trailing input");
    return policy;
}

std::string format_policy(const AccessPolicy& policy) {
    std::string out;
    format_node(policy.root, out);
    return out;
}

bool policy_satisfied(const AccessPolicy& policy, const std::vector<AttrId>& attrs) {
    return node_satisfied(policy.root, attrs);
}

Bytes AbePublicKey::encode() const {
    ByteWriter w;
    w.str("apk1");
    w.u32(universe);
    for (const auto& elem : attr_elems) write_g1(w, elem);
    write_gt(w, blind);
    return w.take();
}

std::optional<AbePublicKey> AbePublicKey::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        if (r.str() != "apk1") return std::nullopt;
        AbePublicKey k;
        k.universe = r.u32();
        if (k.universe > 65536) return std::nullopt;
        k.attr_elems.reserve(k.universe);
        for (uint32_t i = 0; i < k.universe; ++i) {
            auto p = bn::decode_g1(r.blob());
            if (!p) return std::nullopt;
            k.attr_elems.push_back(*p);
        }
        auto blind = bn::decode_gt(r.blob());
        if (!blind || !r.done()) return std::nullopt;
        k.blind = *blind;
        return k;
    } catch (const Error&) {
        return std::nullopt;
    }
}

Bytes AbeMasterKey::encode() const {
    ByteWriter w;
    w.str("amk1");
    w.u32(static_cast<uint32_t>(attr_scalars.size()));
    for (const auto& s : attr_scalars) write_scalar(w, s);
    write_scalar(w, master);
    return w.take();
}

std::optional<AbeMasterKey> AbeMasterKey::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        if (r.str() != "amk1") return std::nullopt;
        AbeMasterKey k;
        uint32_t n = r.u32();
        if (n > 65536) return std::nullopt;
        for (uint32_t i = 0; i < n; ++i) {
            auto s = bn::decode_scalar(r.blob());
            if (!s) return std::nullopt;
            k.attr_scalars.push_back(*s);
        }
        auto y = bn::decode_scalar(r.blob());
        if (!y || !r.done()) return std::nullopt;
        k.master = *y;
        return k;
    } catch (const Error&) {
        return std::nullopt;
    }
}

Bytes AbeDecryptionKey::encode() const {
    ByteWriter w;
    w.str("adk1");
    w.blob(policy.encode());
    w.u32(static_cast<uint32_t>(leaf_shares.size()));
    for (const auto& share : leaf_shares) write_g2(w, share);
    return w.take();
}

std::optional<AbeDecryptionKey> AbeDecryptionKey::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        if (r.str() != "adk1") return std::nullopt;
        AbeDecryptionKey k;
        auto policy = AccessPolicy::decode(r.blob());
        if (!policy) return std::nullopt;
        k.policy = *policy;
        uint32_t n = r.u32();
        if (n != k.policy.leaf_count()) return std::nullopt;
        for (uint32_t i = 0; i < n; ++i) {
            auto share = bn::decode_g2(r.blob());
            if (!share) return std::nullopt;
            k.leaf_shares.push_back(*share);
        }
        if (!r.done()) return std::nullopt;
        return k;
    } catch (const Error&) {
        return std::nullopt;
    }
}

Bytes AbeCiphertext::encode() const {
    ByteWriter w;
    w.str("act1");
    w.u32(static_cast<uint32_t>(attrs.size()));
    for (AttrId a : attrs) w.u32(a);
    write_gt(w, masked);
    w.u32(static_cast<uint32_t>(components.size()));
    for (const auto& [attr, elem] : components) {
        w.u32(attr);
        write_g1(w, elem);
    }
    w.blob(wrapped.encode());
    return w.take();
}

std::optional<AbeCiphertext> AbeCiphertext::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        if (r.str() != "act1") return std::nullopt;
        AbeCiphertext ct;
        uint32_t n = r.u32();
        if (n > 65536) return std::nullopt;
        for (uint32_t i = 0; i < n; ++i) ct.attrs.push_back(r.u32());
        auto masked = bn::decode_gt(r.blob());
        if (!masked) return std::nullopt;
        ct.masked = *masked;
        uint32_t m = r.u32();
        if (m != n) return std::nullopt;
        for (uint32_t i = 0; i < m; ++i) {
            uint32_t attr = r.u32();
            auto elem = bn::decode_g1(r.blob());
            if (!elem) return std::nullopt;
            ct.components.emplace_back(attr, *elem);
        }
        auto wrapped = Ciphertext::decode(r.blob());
        if (!wrapped || !r.done()) return std::nullopt;
        ct.wrapped = *wrapped;
        return ct;
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::pair<AbePublicKey, AbeMasterKey> setup(const BilinearSuite& suite, uint32_t universe_size,
                                            uint64_t rng_seed) {
    if (universe_size < 1) throw Error(Errc::validation, "abe setup: universe must be >= 1");
    Drbg rng(rng_seed, "abe-setup");
    AbePublicKey pk;
    AbeMasterKey msk;
    pk.universe = universe_size;
    for (uint32_t i = 0; i < universe_size; ++i) {
        Int t = suite.nonzero_scalar(rng);
        msk.attr_scalars.push_back(t);
        pk.attr_elems.push_back(suite.g1().mul(t));
    }
    msk.master = suite.nonzero_scalar(rng);
    pk.blind = bn::pairing(suite.g1(), suite.g2()).pow(msk.master);
    return {pk, msk};
}

namespace {

void share_secret(const BilinearSuite& suite, const AbeMasterKey& msk, const PolicyNode& node,
                  const Int& share, Drbg& rng, std::vector<G2>& out) {
    const Int& r = suite.order();
    if (node.kind == PolicyNode::Kind::leaf) {
        // D_x = g2^(q_x(0) / t_attr)
        Int exponent = mul_mod(share, inv_mod(msk.attr_scalars.at(node.attr), r), r);
        out.push_back(suite.g2().mul(exponent));
        return;
    }
    // Random polynomial of degree threshold-1 with q(0) = share; child i
    // (1-based) receives q(i).
    std::vector<Int> coeffs;
    coeffs.push_back(share);
    for (uint32_t d = 1; d < node.threshold; ++d) coeffs.push_back(suite.random_scalar(rng));
    for (uint32_t i = 0; i < node.children.size(); ++i) {
        Int x(static_cast<long>(i + 1));
        Int value(0);
        Int x_pow(1);
        for (const Int& c : coeffs) {
            value = add_mod(value, mul_mod(c, x_pow, r), r);
            x_pow = mul_mod(x_pow, x, r);
        }
        share_secret(suite, msk, node.children[i], value, rng, out);
    }
}

}  // namespace

AbeDecryptionKey keygen(const BilinearSuite& suite, const AbeMasterKey& msk,
                        const AccessPolicy& policy, uint64_t rng_seed) {
    policy.validate(static_cast<uint32_t>(msk.attr_scalars.size()));
    Drbg rng(rng_seed, "abe-keygen");
    AbeDecryptionKey key;
    key.policy = policy;
    share_secret(suite, msk, policy.root, msk.master, rng, key.leaf_shares);
    return key;
}

AbeCiphertext encrypt_element(const BilinearSuite& suite, const AbePublicKey& pk,
                              std::vector<AttrId> attrs, const Gt& message, uint64_t rng_seed) {
    if (attrs.empty()) throw Error(Errc::validation, "abe encrypt: attribute set is empty");
    std::sort(attrs.begin(), attrs.end());
    attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
    for (AttrId a : attrs)
        if (a >= pk.universe) throw Error(Errc::validation, "abe encrypt: unknown attribute id");

    Drbg rng(rng_seed, "abe-encrypt");
    Int s = suite.nonzero_scalar(rng);

    AbeCiphertext ct;
    ct.attrs = attrs;
    ct.masked = suite.gt_mul(message, suite.gt_exp(pk.blind, s));
    for (AttrId a : attrs) ct.components.emplace_back(a, suite.g1_exp(pk.attr_elems[a], s));
    return ct;
}

namespace {

// Recursive GPSW DecryptNode over the selected subtree.
Gt decrypt_node(const BilinearSuite& suite, const Selection& sel,
                const std::vector<std::pair<AttrId, G1>>& components,
                const std::vector<G2>& shares, uint32_t& leaf_cursor_all,
                const PolicyNode& full_node) {
    // leaf_cursor_all walks every leaf of the full policy (depth-first) so
    // shares line up even for unselected branches.
    if (full_node.kind == PolicyNode::Kind::leaf) {
        uint32_t my_share = leaf_cursor_all++;
        // selected leaf: pair the matching ciphertext component
        for (const auto& [attr, elem] : components) {
            if (attr == full_node.attr) return suite.pair(elem, shares.at(my_share));
        }
        throw Error(Errc::internal, "abe decrypt: selected leaf has no component");
    }
    // Walk children in order; recurse into selected ones, skip leaves of the
    // others to keep the cursor aligned.
    Gt acc = Gt::one();
    bool first = true;
    size_t sel_pos = 0;
    const Int& r = suite.order();
    for (uint32_t i = 0; i < full_node.children.size(); ++i) {
        bool selected = sel_pos < sel.chosen_indices.size() && sel.chosen_indices[sel_pos] == i + 1;
        if (!selected) {
            leaf_cursor_all += count_leaves(full_node.children[i]);
            continue;
        }
        Gt child_val = decrypt_node(suite, sel.chosen_children[sel_pos], components, shares,
                                    leaf_cursor_all, full_node.children[i]);
        Int coeff = lagrange_at_zero(i + 1, sel.chosen_indices, r);
        Gt term = suite.gt_exp(child_val, coeff);
        acc = first ? term : suite.gt_mul(acc, term);
        first = false;
        ++sel_pos;
    }
    return acc;
}

}  // namespace

std::optional<Gt> decrypt_element(const BilinearSuite& suite, const AbeDecryptionKey& key,
                                  const AbeCiphertext& ct) {
    auto sel = select_subtree(key.policy.root, ct.attrs);
    if (!sel) return std::nullopt;
    uint32_t cursor = 0;
    Gt root = decrypt_node(suite, *sel, ct.components, key.leaf_shares, cursor, key.policy.root);
    // root = Y^s; unmask via the unitary inverse
    return suite.gt_mul(ct.masked, suite.gt_inv_unitary(root));
}

AbeCiphertext encrypt(const BilinearSuite& suite, const AbePublicKey& pk,
                      std::vector<AttrId> attrs, std::span<const uint8_t> payload,
                      uint64_t rng_seed) {
    Drbg rng(rng_seed, "abe-hybrid");
    // Random GT mask, raw-pow on purpose: the wrapping layer sits outside the
    // counted SF core.
    Int rho = suite.nonzero_scalar(rng);
    Gt mask = pk.blind.pow(rho);
    uint64_t core_seed = rng.next_u64();
    AbeCiphertext ct = encrypt_element(suite, pk, std::move(attrs), mask, core_seed);
    SessionKey wrap_key = suite.kdf(bn::encode_gt(mask), "abe-wrap");
    Bytes nonce = rng.bytes(12);
    ct.wrapped = suite.sym_encrypt_with_nonce(wrap_key, nonce, payload);
    return ct;
}

DecryptResult decrypt(const BilinearSuite& suite, const AbeDecryptionKey& key,
                      const AbeCiphertext& ct) {
    DecryptResult out;
    auto mask = decrypt_element(suite, key, ct);
    if (!mask) {
        out.status = DecryptStatus::policy_unsatisfied;
        return out;
    }
    SessionKey wrap_key = suite.kdf(bn::encode_gt(*mask), "abe-wrap");
    auto payload = suite.sym_decrypt(wrap_key, ct.wrapped);
    if (!payload) {
        out.status = DecryptStatus::malformed;
        return out;
    }
    out.status = DecryptStatus::ok;
    out.payload = std::move(*payload);
    return out;
}

}  // namespace resiot::abe
