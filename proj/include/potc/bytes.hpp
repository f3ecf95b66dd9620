#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace potc {

using Bytes = std::vector<std::uint8_t>;
using Hash32 = std::array<std::uint8_t, 32>;
using Tick = std::uint64_t;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(const Bytes& b) {
    return std::string(b.begin(), b.end());
}

std::string hex(const std::uint8_t* data, std::size_t len);

inline std::string hex(const Bytes& b) { return hex(b.data(), b.size()); }
inline std::string hex(const Hash32& h) { return hex(h.data(), h.size()); }

// Short prefix for trace/log lines.
inline std::string hex8(const Hash32& h) { return hex(h.data(), 4); }

Bytes from_hex(std::string_view s);

// Canonical little-endian encoder. All multi-byte integers are fixed-width
// LE; variable-length byte fields are u64-length-prefixed.
struct Encoder {
    Bytes out;

    void u8(std::uint8_t v) { out.push_back(v); }
    void u16(std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void raw(const std::uint8_t* p, std::size_t n) { out.insert(out.end(), p, p + n); }
    void raw(const Bytes& b) { raw(b.data(), b.size()); }
    template <std::size_t N>
    void raw(const std::array<std::uint8_t, N>& a) { raw(a.data(), N); }
    void blob(const Bytes& b) {
        u64(b.size());
        raw(b);
    }
};

struct DecodeError : std::exception {
    const char* what() const noexcept override { return "truncated or malformed encoding"; }
};

struct Decoder {
    const std::uint8_t* p;
    const std::uint8_t* end;

    explicit Decoder(const Bytes& b) : p(b.data()), end(b.data() + b.size()) {}
    Decoder(const std::uint8_t* data, std::size_t len) : p(data), end(data + len) {}

    bool done() const { return p == end; }
    std::size_t remaining() const { return static_cast<std::size_t>(end - p); }

    void need(std::size_t n) const {
        if (remaining() < n) throw DecodeError{};
    }
    std::uint8_t u8() {
        need(1);
        return *p++;
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
        p += 2;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        p += 8;
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    Bytes raw(std::size_t n) {
        need(n);
        Bytes b(p, p + n);
        p += n;
        return b;
    }
    template <std::size_t N>
    std::array<std::uint8_t, N> arr() {
        need(N);
        std::array<std::uint8_t, N> a{};
        std::memcpy(a.data(), p, N);
        p += N;
        return a;
    }
    Bytes blob() {
        std::uint64_t n = u64();
        if (n > remaining()) throw DecodeError{};
        return raw(static_cast<std::size_t>(n));
    }
};

// splitmix64 finalizer; also the protocol's randomization generator core.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic RNG used everywhere randomness is needed (padding, latency,
// permutations). Seeded explicitly; never touches wall clock or std::random_device.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        return mix64(state);
    }
    // Unbiased enough at desk scale; avoids std distribution portability traps.
    std::uint64_t below(std::uint64_t bound) { return bound ? next() % bound : 0; }
    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

    Bytes bytes(std::size_t n) {
        Bytes b(n);
        for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(next());
        return b;
    }
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }
    Rng fork() { return Rng(next()); }
};

}  // namespace potc
