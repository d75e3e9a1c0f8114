#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

namespace rageval {

// Deterministic hashing and random generation used for every seed derivation
// in the harness. These are fully specified here (FNV-1a and splitmix64) so
// results are identical across platforms and standard-library versions.

class stable_hasher {
public:
    stable_hasher() = default;
    explicit stable_hasher(uint64_t basis) : h_(basis) {}

    // Fields are separated by a 0x1e byte so ("ab","c") != ("a","bc").
    stable_hasher& feed(std::string_view s) {
        bytes(s.data(), s.size());
        sep();
        return *this;
    }
    stable_hasher& feed(uint64_t v) {
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(buf, 8);
        sep();
        return *this;
    }
    stable_hasher& feed(int64_t v) { return feed(static_cast<uint64_t>(v)); }
    stable_hasher& feed(int v) { return feed(static_cast<uint64_t>(static_cast<int64_t>(v))); }
    stable_hasher& feed(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        return feed(bits);
    }

    uint64_t digest() const { return h_; }

private:
    uint64_t h_ = 0xcbf29ce484222325ull;

    void bytes(const void* p, size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            h_ ^= c[i];
            h_ *= 0x100000001b3ull;
        }
    }
    void sep() {
        h_ ^= 0x1e;
        h_ *= 0x100000001b3ull;
    }
};

template <typename... Fields>
uint64_t stable_hash(const Fields&... fields) {
    stable_hasher h;
    (h.feed(fields), ...);
    return h.digest();
}

std::string hex64(uint64_t v);

// 128-bit key (two independent FNV bases), used where collisions would
// corrupt a cache. Returns 32 lowercase hex chars.
template <typename... Fields>
std::string stable_hash128_hex(const Fields&... fields) {
    stable_hasher lo;
    stable_hasher hi(0x6c62272e07bb0142ull);
    (lo.feed(fields), ...);
    (hi.feed(fields), ...);
    return hex64(hi.digest()) + hex64(lo.digest());
}

// splitmix64: the sequence is a pure function of the seed.
class splitmix64 {
public:
    explicit splitmix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Modulo draw; the bias is irrelevant here, determinism is not.
    uint64_t next_below(uint64_t bound) { return next() % bound; }

    // Uniform in [0,1) with 53 significant bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller on two explicit uniforms.
    double next_normal();

private:
    uint64_t state_;
};

// Fisher-Yates driven by splitmix64(seed).
template <typename T>
void deterministic_shuffle(std::vector<T>& v, uint64_t seed) {
    splitmix64 rng(seed);
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace rageval
