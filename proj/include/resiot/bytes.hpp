#ifndef RESIOT_BYTES_HPP
#define RESIOT_BYTES_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace resiot {

using Bytes = std::vector<uint8_t>;

enum class Errc {
    ok = 0,
    usage,
    io,
    parse,
    validation,
    crypto,
    expectation,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

std::string to_hex(std::span<const uint8_t> data);
std::optional<Bytes> from_hex(std::string_view hex);

// SHA-256 / HMAC-SHA256 (OpenSSL-backed).
std::array<uint8_t, 32> sha256(std::span<const uint8_t> data);
std::array<uint8_t, 32> hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> data);

// Length-prefixed deterministic encoding: u8/u32/u64 big-endian, byte strings
// as u32 length + raw bytes.
class ByteWriter {
public:
    void u8(uint8_t v) { out_.push_back(v); }
    void u32(uint32_t v);
    void u64(uint64_t v);
    void raw(std::span<const uint8_t> data) { out_.insert(out_.end(), data.begin(), data.end()); }
    void blob(std::span<const uint8_t> data);
    void str(std::string_view s);

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8();
    uint32_t u32();
    uint64_t u64();
    Bytes raw(size_t n);
    Bytes blob();
    std::string str();
    bool done() const { return pos_ == data_.size(); }
    size_t remaining() const { return data_.size() - pos_; }

private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;

    void need(size_t n) const;
};

// Deterministic SHA-256 counter-mode byte generator. All randomness in the
// artifact flows from explicit seeds through this, so every run is replayable.
class Drbg {
public:
    Drbg(uint64_t seed, std::string_view domain);
    Drbg(std::span<const uint8_t> seed, std::string_view domain);

    void fill(std::span<uint8_t> out);
    Bytes bytes(size_t n);
    uint64_t next_u64();
    // Child generator with an independent stream.
    Drbg fork(std::string_view domain);

private:
    std::array<uint8_t, 32> key_{};
    uint64_t counter_ = 0;
    std::array<uint8_t, 32> block_{};
    size_t block_pos_ = 32;

    void refill();
};

// splitmix64: cheap deterministic stream for simulation-side randomness.
class SimRng {
public:
    explicit SimRng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64();
    // Uniform in [0, 1).
    double next_unit();
    // Exponential with the given rate (per ms).
    double next_exponential(double rate);

private:
    uint64_t state_;
};

}  // namespace resiot

#endif
