#include "resiot/bytes.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cmath>

namespace resiot {

std::string to_hex(std::span<const uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]);
        int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return out;
}

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data) {
    std::array<uint8_t, 32> out{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr);
    return out;
}

std::array<uint8_t, 32> hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> data) {
    std::array<uint8_t, 32> out{};
    unsigned int len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
         out.data(), &len);
    return out;
}

void ByteWriter::u32(uint32_t v) {
    out_.push_back(static_cast<uint8_t>(v >> 24));
    out_.push_back(static_cast<uint8_t>(v >> 16));
    out_.push_back(static_cast<uint8_t>(v >> 8));
    out_.push_back(static_cast<uint8_t>(v));
}

void ByteWriter::u64(uint64_t v) {
    u32(static_cast<uint32_t>(v >> 32));
    u32(static_cast<uint32_t>(v));
}

void ByteWriter::blob(std::span<const uint8_t> data) {
    u32(static_cast<uint32_t>(data.size()));
    raw(data);
}

void ByteWriter::str(std::string_view s) {
    u32(static_cast<uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
}

void ByteReader::need(size_t n) const {
    if (pos_ + n > data_.size()) throw Error(Errc::parse, "byte reader: truncated input");
}

uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

uint32_t ByteReader::u32() {
    need(4);
    uint32_t v = (uint32_t{data_[pos_]} << 24) | (uint32_t{data_[pos_ + 1]} << 16) |
                 (uint32_t{data_[pos_ + 2]} << 8) | uint32_t{data_[pos_ + 3]};
    pos_ += 4;
    return v;
}

uint64_t ByteReader::u64() {
    uint64_t hi = u32();
    return (hi << 32) | u32();
}

Bytes ByteReader::raw(size_t n) {
    need(n);
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

Bytes ByteReader::blob() {
    uint32_t n = u32();
    return raw(n);
}

std::string ByteReader::str() {
    Bytes b = blob();
    return std::string(b.begin(), b.end());
}

Drbg::Drbg(uint64_t seed, std::string_view domain) {
    ByteWriter w;
    w.str("resiot-drbg-v1");
    w.u64(seed);
    w.str(domain);
    key_ = sha256(w.bytes());
}

Drbg::Drbg(std::span<const uint8_t> seed, std::string_view domain) {
    ByteWriter w;
    w.str("resiot-drbg-v1");
    w.blob(seed);
    w.str(domain);
    key_ = sha256(w.bytes());
}

void Drbg::refill() {
    ByteWriter w;
    w.raw(key_);
    w.u64(counter_++);
    block_ = sha256(w.bytes());
    block_pos_ = 0;
}

void Drbg::fill(std::span<uint8_t> out) {
    for (size_t i = 0; i < out.size(); ++i) {
        if (block_pos_ == 32) refill();
        out[i] = block_[block_pos_++];
    }
}

Bytes Drbg::bytes(size_t n) {
    Bytes out(n);
    fill(out);
    return out;
}

uint64_t Drbg::next_u64() {
    std::array<uint8_t, 8> buf{};
    fill(buf);
    uint64_t v = 0;
    for (uint8_t b : buf) v = (v << 8) | b;
    return v;
}

Drbg Drbg::fork(std::string_view domain) {
    std::array<uint8_t, 32> child_seed{};
    fill(child_seed);
    return Drbg(child_seed, domain);
}

uint64_t SimRng::next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SimRng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SimRng::next_exponential(double rate) {
    double u = next_unit();
    return -std::log1p(-u) / rate;
}

}  // namespace resiot
