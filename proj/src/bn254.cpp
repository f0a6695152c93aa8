#include "resiot/bn254.hpp"

namespace resiot::bn {

namespace {

// Integer constants stand alone so the Fp constructors (which need the
// modulus) never re-enter the derived-constant initialization below.
const Int& bn_u() {
    static const Int u("4965661367192848881");
    return u;
}

const Int& ate_loop_count() {
    static const Int s = 6 * bn_u() + 2;
    return s;
}

const Int& sqrt_exp() {
    static const Int e = (field_modulus() + 1) / 4;
    return e;
}

struct Params {
    Fp b;           // G1: y^2 = x^3 + 3
    Fp2 twist_b;    // G2: y^2 = x^3 + 3/xi
    Fp2 gamma[6];   // gamma[i] = xi^(i*(p-1)/6), i in 1..5
    G2 g2_gen;

    Params() {
        b = Fp(3);

        Fp2 xi{Fp(9), Fp(1)};
        twist_b = Fp2{Fp(3), Fp(0)} * xi.inv();

        Int e = (field_modulus() - 1) / 6;
        for (int i = 1; i <= 5; ++i) gamma[i] = xi.pow(e * i);

        g2_gen.infinity = false;
        g2_gen.x = Fp2{
            Fp(Int("10857046999023057135944570762232829481370756359578518086990519993285655852781")),
            Fp(Int("11559732032986387107991004021392285783925812861821192530917403151452391805634"))};
        g2_gen.y = Fp2{
            Fp(Int("8495653923123431417604973247489272438418190587263600148770280649306958101930")),
            Fp(Int("4082367875863433681332203403145435568316851327593401208105741076214120093531"))};
    }
};

const Params& params() {
    static const Params instance;
    return instance;
}

}  // namespace

const Int& field_modulus() {
    static const Int p(
        "21888242871839275222246405745257275088696311157297823662689037894645226208583");
    return p;
}

const Int& group_order() {
    static const Int r(
        "21888242871839275222246405745257275088548364400416034343698204186575808495617");
    return r;
}

// ---------------------------------------------------------------------------
// Fp

Fp::Fp(long x) {
    v = x;
    mpz_mod(v.get_mpz_t(), v.get_mpz_t(), field_modulus().get_mpz_t());
}

Fp::Fp(Int x) : v(std::move(x)) {
    mpz_mod(v.get_mpz_t(), v.get_mpz_t(), field_modulus().get_mpz_t());
}

Fp Fp::operator+(const Fp& o) const {
    Int t = v + o.v;
    if (t >= field_modulus()) t -= field_modulus();
    Fp out;
    out.v = std::move(t);
    return out;
}

Fp Fp::operator-(const Fp& o) const {
    Int t = v - o.v;
    if (t < 0) t += field_modulus();
    Fp out;
    out.v = std::move(t);
    return out;
}

Fp Fp::operator*(const Fp& o) const {
    Fp out;
    out.v = v * o.v;
    mpz_mod(out.v.get_mpz_t(), out.v.get_mpz_t(), field_modulus().get_mpz_t());
    return out;
}

Fp Fp::neg() const {
    if (is_zero()) return *this;
    Fp out;
    out.v = field_modulus() - v;
    return out;
}

Fp Fp::inv() const {
    if (is_zero()) throw Error(Errc::internal, "Fp: inverse of zero");
    Fp out;
    mpz_invert(out.v.get_mpz_t(), v.get_mpz_t(), field_modulus().get_mpz_t());
    return out;
}

Fp Fp::pow(const Int& e) const {
    Fp out;
    mpz_powm(out.v.get_mpz_t(), v.get_mpz_t(), e.get_mpz_t(), field_modulus().get_mpz_t());
    return out;
}

std::optional<Fp> Fp::sqrt() const {
    Fp cand = pow(sqrt_exp());
    if (cand * cand == *this) return cand;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Fp2

Fp2 Fp2::operator+(const Fp2& o) const { return {a + o.a, b + o.b}; }
Fp2 Fp2::operator-(const Fp2& o) const { return {a - o.a, b - o.b}; }

Fp2 Fp2::operator*(const Fp2& o) const {
    Fp t0 = a * o.a;
    Fp t1 = b * o.b;
    Fp t2 = (a + b) * (o.a + o.b);
    return {t0 - t1, t2 - t0 - t1};
}

Fp2 Fp2::neg() const { return {a.neg(), b.neg()}; }

Fp2 Fp2::inv() const {
    Fp d = a * a + b * b;
    Fp di = d.inv();
    return {a * di, b.neg() * di};
}

Fp2 Fp2::sqr() const {
    Fp t = a * b;
    return {(a + b) * (a - b), t + t};
}

Fp2 Fp2::mul_xi() const {
    // (a + b*i) * (9 + i)
    Fp nine_a = a * Fp(9);
    Fp nine_b = b * Fp(9);
    return {nine_a - b, a + nine_b};
}

Fp2 Fp2::pow(const Int& e) const {
    Fp2 out = Fp2::one();
    size_t n = mpz_sizeinbase(e.get_mpz_t(), 2);
    if (e == 0) return out;
    for (size_t i = n; i-- > 0;) {
        out = out.sqr();
        if (mpz_tstbit(e.get_mpz_t(), i)) out = out * *this;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fp6

Fp6 Fp6::operator+(const Fp6& o) const { return {c0 + o.c0, c1 + o.c1, c2 + o.c2}; }
Fp6 Fp6::operator-(const Fp6& o) const { return {c0 - o.c0, c1 - o.c1, c2 - o.c2}; }

Fp6 Fp6::operator*(const Fp6& o) const {
    Fp2 t0 = c0 * o.c0;
    Fp2 t1 = c1 * o.c1;
    Fp2 t2 = c2 * o.c2;
    Fp2 r0 = t0 + ((c1 + c2) * (o.c1 + o.c2) - t1 - t2).mul_xi();
    Fp2 r1 = (c0 + c1) * (o.c0 + o.c1) - t0 - t1 + t2.mul_xi();
    Fp2 r2 = (c0 + c2) * (o.c0 + o.c2) - t0 - t2 + t1;
    return {r0, r1, r2};
}

Fp6 Fp6::neg() const { return {c0.neg(), c1.neg(), c2.neg()}; }

Fp6 Fp6::inv() const {
    Fp2 t0 = c0.sqr() - (c1 * c2).mul_xi();
    Fp2 t1 = c2.sqr().mul_xi() - c0 * c1;
    Fp2 t2 = c1.sqr() - c0 * c2;
    Fp2 d = c0 * t0 + (c2 * t1).mul_xi() + (c1 * t2).mul_xi();
    Fp2 di = d.inv();
    return {t0 * di, t1 * di, t2 * di};
}

// ---------------------------------------------------------------------------
// Fp12

Fp12 Fp12::operator+(const Fp12& o) const { return {c0 + o.c0, c1 + o.c1}; }
Fp12 Fp12::operator-(const Fp12& o) const { return {c0 - o.c0, c1 - o.c1}; }

Fp12 Fp12::operator*(const Fp12& o) const {
    Fp6 t0 = c0 * o.c0;
    Fp6 t1 = c1 * o.c1;
    Fp6 r0 = t0 + t1.mul_v();
    Fp6 r1 = (c0 + c1) * (o.c0 + o.c1) - t0 - t1;
    return {r0, r1};
}

Fp12 Fp12::sqr() const {
    Fp6 t = c0 * c1;
    Fp6 r0 = (c0 + c1) * (c0 + c1.mul_v()) - t - t.mul_v();
    Fp6 r1 = t + t;
    return {r0, r1};
}

Fp12 Fp12::inv() const {
    Fp6 t = (c0 * c0 - (c1 * c1).mul_v()).inv();
    return {c0 * t, (c1 * t).neg()};
}

Fp12 Fp12::frobenius() const {
    const auto& g = params().gamma;
    Fp6 r0{c0.c0.conj(), c0.c1.conj() * g[2], c0.c2.conj() * g[4]};
    Fp6 r1{c1.c0.conj() * g[1], c1.c1.conj() * g[3], c1.c2.conj() * g[5]};
    return {r0, r1};
}

Fp12 Fp12::pow(const Int& e) const {
    Fp12 out = Fp12::one();
    if (e == 0) return out;
    size_t n = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (size_t i = n; i-- > 0;) {
        out = out.sqr();
        if (mpz_tstbit(e.get_mpz_t(), i)) out = out * *this;
    }
    return out;
}

// ---------------------------------------------------------------------------
// G1

G1 G1::generator() {
    G1 g;
    g.infinity = false;
    g.x = Fp(1);
    g.y = Fp(2);
    return g;
}

bool G1::operator==(const G1& o) const {
    if (infinity || o.infinity) return infinity == o.infinity;
    return x == o.x && y == o.y;
}

bool G1::is_on_curve() const {
    if (infinity) return true;
    return y * y == x * x * x + params().b;
}

G1 G1::neg() const {
    if (infinity) return *this;
    G1 out = *this;
    out.y = y.neg();
    return out;
}

G1 G1::dbl() const {
    if (infinity || y.is_zero()) return G1::zero();
    Fp xx = x * x;
    Fp lambda = (xx + xx + xx) * (y + y).inv();
    G1 out;
    out.infinity = false;
    out.x = lambda * lambda - x - x;
    out.y = lambda * (x - out.x) - y;
    return out;
}

G1 G1::add(const G1& o) const {
    if (infinity) return o;
    if (o.infinity) return *this;
    if (x == o.x) {
        if (y == o.y) return dbl();
        return G1::zero();
    }
    Fp lambda = (o.y - y) * (o.x - x).inv();
    G1 out;
    out.infinity = false;
    out.x = lambda * lambda - x - o.x;
    out.y = lambda * (x - out.x) - y;
    return out;
}

G1 G1::mul(const Int& scalar) const {
    Int s;
    mpz_mod(s.get_mpz_t(), scalar.get_mpz_t(), group_order().get_mpz_t());
    G1 acc = G1::zero();
    if (s == 0 || infinity) return acc;
    size_t n = mpz_sizeinbase(s.get_mpz_t(), 2);
    for (size_t i = n; i-- > 0;) {
        acc = acc.dbl();
        if (mpz_tstbit(s.get_mpz_t(), i)) acc = acc.add(*this);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// G2

G2 G2::generator() { return params().g2_gen; }

bool G2::operator==(const G2& o) const {
    if (infinity || o.infinity) return infinity == o.infinity;
    return x == o.x && y == o.y;
}

bool G2::is_on_curve() const {
    if (infinity) return true;
    return y.sqr() == x.sqr() * x + params().twist_b;
}

bool G2::is_in_subgroup() const {
    return is_on_curve() && mul(group_order()).infinity;
}

G2 G2::neg() const {
    if (infinity) return *this;
    G2 out = *this;
    out.y = y.neg();
    return out;
}

G2 G2::dbl() const {
    if (infinity || y.is_zero()) return G2::zero();
    Fp2 xx = x.sqr();
    Fp2 lambda = (xx + xx + xx) * (y + y).inv();
    G2 out;
    out.infinity = false;
    out.x = lambda.sqr() - x - x;
    out.y = lambda * (x - out.x) - y;
    return out;
}

G2 G2::add(const G2& o) const {
    if (infinity) return o;
    if (o.infinity) return *this;
    if (x == o.x) {
        if (y == o.y) return dbl();
        return G2::zero();
    }
    Fp2 lambda = (o.y - y) * (o.x - x).inv();
    G2 out;
    out.infinity = false;
    out.x = lambda.sqr() - x - o.x;
    out.y = lambda * (x - out.x) - y;
    return out;
}

G2 G2::mul(const Int& scalar) const {
    Int s;
    mpz_mod(s.get_mpz_t(), scalar.get_mpz_t(), group_order().get_mpz_t());
    G2 acc = G2::zero();
    if (s == 0 || infinity) return acc;
    size_t n = mpz_sizeinbase(s.get_mpz_t(), 2);
    for (size_t i = n; i-- > 0;) {
        acc = acc.dbl();
        if (mpz_tstbit(s.get_mpz_t(), i)) acc = acc.add(*this);
    }
    return acc;
}

G2 G2::frobenius() const {
    if (infinity) return *this;
    G2 out;
    out.infinity = false;
    out.x = x.conj() * params().gamma[2];
    out.y = y.conj() * params().gamma[3];
    return out;
}

// ---------------------------------------------------------------------------
// Pairing

namespace {

// Line through the untwisted images of t and q, evaluated at p. Sparse in the
// w-power basis: y_p - lambda*x_p*w + (lambda*x_t - y_t)*w^3, vertical lines
// collapse to x_p - x_t*w^2.
Fp12 line_eval(const G2& t, const G2& q, const G1& p) {
    Fp12 out{Fp6::zero(), Fp6::zero()};
    if (t.x == q.x && !(t.y == q.y)) {
        // vertical
        out.c0.c0 = Fp2{p.x, Fp(0)};
        out.c0.c1 = t.x.neg();
        return out;
    }
    Fp2 lambda;
    if (t.x == q.x) {
        Fp2 xx = t.x.sqr();
        lambda = (xx + xx + xx) * (t.y + t.y).inv();
    } else {
        lambda = (q.y - t.y) * (q.x - t.x).inv();
    }
    out.c0.c0 = Fp2{p.y, Fp(0)};
    out.c1.c0 = lambda.mul_fp(p.x).neg();
    out.c1.c1 = lambda * t.x - t.y;
    return out;
}

}  // namespace

Fp12 miller_loop(const G1& p, const G2& q) {
    if (p.infinity || q.infinity) return Fp12::one();
    Fp12 f = Fp12::one();
    G2 t = q;
    const Int& s = ate_loop_count();
    size_t n = mpz_sizeinbase(s.get_mpz_t(), 2);
    for (size_t i = n - 1; i-- > 0;) {
        f = f.sqr() * line_eval(t, t, p);
        t = t.dbl();
        if (mpz_tstbit(s.get_mpz_t(), i)) {
            f = f * line_eval(t, q, p);
            t = t.add(q);
        }
    }
    G2 q1 = q.frobenius();
    G2 nq2 = q1.frobenius().neg();
    f = f * line_eval(t, q1, p);
    t = t.add(q1);
    f = f * line_eval(t, nq2, p);
    return f;
}

Fp12 final_exponentiation_easy(const Fp12& f) {
    Fp12 t = f.conj() * f.inv();       // f^(p^6 - 1)
    return t.frobenius().frobenius() * t;  // ^(p^2 + 1)
}

Fp12 final_exponentiation_hard(const Fp12& f) {
    // Devegili et al. decomposition of (p^4 - p^2 + 1)/r for BN curves;
    // inputs are cyclotomic, so conj() is the inverse.
    const Int& u = bn_u();
    Fp12 fp = f.frobenius();
    Fp12 fp2 = fp.frobenius();
    Fp12 fp3 = fp2.frobenius();
    Fp12 fu = f.pow(u);
    Fp12 fu2 = fu.pow(u);
    Fp12 fu3 = fu2.pow(u);
    Fp12 y3 = fu.frobenius().conj();
    Fp12 fu2p = fu2.frobenius();
    Fp12 fu3p = fu3.frobenius();
    Fp12 y2 = fu2.frobenius().frobenius();
    Fp12 y0 = fp * fp2 * fp3;
    Fp12 y1 = f.conj();
    Fp12 y5 = fu2.conj();
    Fp12 y4 = (fu * fu2p).conj();
    Fp12 y6 = (fu3 * fu3p).conj();

    Fp12 t0 = y6.sqr() * y4 * y5;
    Fp12 t1 = y3 * y5 * t0;
    t0 = t0 * y2;
    t1 = t1.sqr() * t0;
    t1 = t1.sqr();
    t0 = t1 * y1;
    t1 = t1 * y0;
    t0 = t0.sqr();
    return t0 * t1;
}

Fp12 final_exponentiation(const Fp12& f) {
    return final_exponentiation_hard(final_exponentiation_easy(f));
}

Gt pairing(const G1& p, const G2& q) {
    return final_exponentiation(miller_loop(p, q));
}

// ---------------------------------------------------------------------------
// Encodings

namespace {

void write_int32(ByteWriter& w, const Int& v) {
    uint8_t buf[32] = {0};
    size_t count = 0;
    size_t bytes = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
    if (bytes > 32) throw Error(Errc::internal, "field element exceeds 32 bytes");
    if (v != 0) mpz_export(buf + (32 - bytes), &count, 1, 1, 1, 0, v.get_mpz_t());
    w.raw(std::span<const uint8_t>(buf, 32));
}

Int read_int32(ByteReader& r) {
    Bytes buf = r.raw(32);
    Int v;
    mpz_import(v.get_mpz_t(), buf.size(), 1, 1, 1, 0, buf.data());
    return v;
}

}  // namespace

Int int_from_bytes(std::span<const uint8_t> in) {
    Int v;
    mpz_import(v.get_mpz_t(), in.size(), 1, 1, 1, 0, in.data());
    return v;
}

void encode_fp(ByteWriter& w, const Fp& e) { write_int32(w, e.v); }

Bytes encode_g1(const G1& p) {
    ByteWriter w;
    if (p.infinity) {
        w.u8(0);
        w.raw(Bytes(64, 0));
    } else {
        w.u8(1);
        encode_fp(w, p.x);
        encode_fp(w, p.y);
    }
    return w.take();
}

Bytes encode_g2(const G2& p) {
    ByteWriter w;
    if (p.infinity) {
        w.u8(0);
        w.raw(Bytes(128, 0));
    } else {
        w.u8(1);
        encode_fp(w, p.x.a);
        encode_fp(w, p.x.b);
        encode_fp(w, p.y.a);
        encode_fp(w, p.y.b);
    }
    return w.take();
}

Bytes encode_gt(const Gt& e) {
    ByteWriter w;
    for (const Fp2* c : {&e.c0.c0, &e.c0.c1, &e.c0.c2, &e.c1.c0, &e.c1.c1, &e.c1.c2}) {
        encode_fp(w, c->a);
        encode_fp(w, c->b);
    }
    return w.take();
}

Bytes encode_scalar(const Int& s) {
    Int v;
    mpz_mod(v.get_mpz_t(), s.get_mpz_t(), group_order().get_mpz_t());
    ByteWriter w;
    write_int32(w, v);
    return w.take();
}

std::optional<G1> decode_g1(std::span<const uint8_t> in) {
    if (in.size() != 65) return std::nullopt;
    ByteReader r(in);
    uint8_t flag = r.u8();
    Int xv = read_int32(r);
    Int yv = read_int32(r);
    if (flag == 0) {
        if (xv != 0 || yv != 0) return std::nullopt;
        return G1::zero();
    }
    if (flag != 1) return std::nullopt;
    if (xv >= field_modulus() || yv >= field_modulus()) return std::nullopt;
    G1 p;
    p.infinity = false;
    p.x = Fp(xv);
    p.y = Fp(yv);
    if (!p.is_on_curve()) return std::nullopt;
    return p;
}

std::optional<G2> decode_g2(std::span<const uint8_t> in) {
    if (in.size() != 129) return std::nullopt;
    ByteReader r(in);
    uint8_t flag = r.u8();
    Int coords[4];
    for (auto& c : coords) c = read_int32(r);
    if (flag == 0) {
        for (const auto& c : coords)
            if (c != 0) return std::nullopt;
        return G2::zero();
    }
    if (flag != 1) return std::nullopt;
    for (const auto& c : coords)
        if (c >= field_modulus()) return std::nullopt;
    G2 p;
    p.infinity = false;
    p.x = Fp2{Fp(coords[0]), Fp(coords[1])};
    p.y = Fp2{Fp(coords[2]), Fp(coords[3])};
    if (!p.is_on_curve() || !p.is_in_subgroup()) return std::nullopt;
    return p;
}

std::optional<Gt> decode_gt(std::span<const uint8_t> in) {
    if (in.size() != 384) return std::nullopt;
    ByteReader r(in);
    Int limbs[12];
    for (auto& l : limbs) {
        l = read_int32(r);
        if (l >= field_modulus()) return std::nullopt;
    }
    Gt e;
    Fp2* slots[6] = {&e.c0.c0, &e.c0.c1, &e.c0.c2, &e.c1.c0, &e.c1.c1, &e.c1.c2};
    for (int i = 0; i < 6; ++i) {
        slots[i]->a = Fp(limbs[2 * i]);
        slots[i]->b = Fp(limbs[2 * i + 1]);
    }
    return e;
}

std::optional<Int> decode_scalar(std::span<const uint8_t> in) {
    if (in.size() != 32) return std::nullopt;
    Int v = int_from_bytes(in);
    if (v >= group_order()) return std::nullopt;
    return v;
}

std::optional<Fp> g1_y_for_x(const Fp& x) {
    Fp rhs = x * x * x + params().b;
    auto y = rhs.sqrt();
    if (!y) return std::nullopt;
    Fp other = y->neg();
    return (y->v <= other.v) ? *y : other;
}

}  // namespace resiot::bn
