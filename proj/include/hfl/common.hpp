#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hfl {

using i64 = std::int64_t;
using u64 = std::uint64_t;

[[noreturn]] inline void fail(const std::string& msg) { throw std::runtime_error(msg); }
inline void require(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
}

// Dense row-major matrix. Deliberately minimal: storage plus indexing.
template <typename T>
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<T> a;

    Mat() = default;
    Mat(int r, int c, T fill = T()) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    T& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    const T& operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
    bool empty() const { return a.empty(); }
    bool operator==(const Mat&) const = default;
};

inline u64 splitmix64(u64 x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Order-sensitive combination of seed components (seed, stream id, step, ...).
inline u64 seed_mix(std::initializer_list<u64> parts) {
    u64 h = 0x8000000000000001ull;
    for (u64 p : parts) h = splitmix64(h ^ p);
    return h;
}

// mt19937_64 is fully specified by the standard; the distributions are not,
// so all draws below are hand-rolled to keep outputs identical across stdlibs.
struct Rng {
    std::mt19937_64 eng;
    double spare = 0.0;
    bool has_spare = false;

    explicit Rng(u64 seed) : eng(seed) {}

    u64 next() { return eng(); }

    // uniform integer in [0, n), rejection sampled (no modulo bias)
    u64 below(u64 n) {
        require(n > 0, "Rng::below: n must be positive");
        const u64 limit = UINT64_MAX - UINT64_MAX % n;
        u64 v = eng();
        while (v >= limit) v = eng();
        return v % n;
    }

    // uniform in [0, 1)
    double unit() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller
    double normal() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        double u1 = unit();
        while (u1 <= 0.0) u1 = unit();
        const double u2 = unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare = r * std::sin(a);
        has_spare = true;
        return r * std::cos(a);
    }
};

// FNV-1a over raw bytes; used for weight snapshot fingerprints.
inline u64 hash_bytes(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    u64 h = 1469598103934665603ull;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace hfl
