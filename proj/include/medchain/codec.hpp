#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "medchain/digest.hpp"

namespace medchain {

using CanonicalBytes = std::vector<std::uint8_t>;

// Canonical encoding scheme (normative table in docs/encoding.md):
//   u8           one byte
//   u32 / u64    big-endian fixed width
//   i64          big-endian two's complement
//   string       u32 byte length + UTF-8 bytes
//   sequence     u32 element count + elements
//   variant      u8 tag + payload
//   digest       32 raw bytes
// Fields are written in declared order. The encoding of a value is unique:
// encode(a) == encode(b) iff a == b for values of the same type.

class Encoder {
public:
    void put_u8(std::uint8_t v) { buf_.push_back(v); }

    void put_u32(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }

    void put_u64(std::uint64_t v) {
        for (int shift = 56; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }

    void put_i64(std::int64_t v) { put_u64(static_cast<std::uint64_t>(v)); }

    void put_string(std::string_view s) {
        put_u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    void put_digest(const Digest256& d) {
        buf_.insert(buf_.end(), d.bytes.begin(), d.bytes.end());
    }

    void put_count(std::size_t n) { put_u32(static_cast<std::uint32_t>(n)); }

    const CanonicalBytes& bytes() const { return buf_; }
    CanonicalBytes take() { return std::move(buf_); }

private:
    CanonicalBytes buf_;
};

/// Thrown when bytes do not parse as a canonical encoding.
struct DecodeError : std::runtime_error {
    explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

class Decoder {
public:
    explicit Decoder(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t get_u8() {
        need(1);
        return data_[pos_++];
    }

    std::uint32_t get_u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
        return v;
    }

    std::uint64_t get_u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
        return v;
    }

    std::int64_t get_i64() { return static_cast<std::int64_t>(get_u64()); }

    std::string get_string() {
        std::uint32_t len = get_u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
        pos_ += len;
        return s;
    }

    Digest256 get_digest() {
        need(32);
        Digest256 d;
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(pos_), 32, d.bytes.begin());
        pos_ += 32;
        return d;
    }

    std::uint32_t get_count() { return get_u32(); }

    bool done() const { return pos_ == data_.size(); }

    /// Decoding must consume the input exactly; trailing bytes are an error.
    void expect_done() const {
        if (!done()) throw DecodeError("trailing bytes after value");
    }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw DecodeError("truncated input");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace medchain
