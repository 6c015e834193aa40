#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace acspec {

// All recoverable failures are thrown as Error with a stable `kind` tag so
// callers (and the harness report) can match on them without string parsing.
struct Error : std::runtime_error {
    std::string kind;
    Error(std::string k, const std::string& msg)
        : std::runtime_error(k + ": " + msg), kind(std::move(k)) {}
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& msg) {
    throw Error(kind, msg);
}

inline void check(bool ok, const std::string& kind, const std::string& msg) {
    if (!ok) fail(kind, msg);
}

// Compensated (Kahan) accumulator. Integral quantities feed 1e-12-level
// assertions, so plain left-to-right summation over ~1e6 nodes is not enough.
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

// Deterministic chunked parallel-for. Chunk boundaries depend only on n, so
// reductions assembled chunk-by-chunk give identical results for any thread
// count.
namespace detail {
inline int& thread_count_ref() {
    static int n = 1;
    return n;
}
}  // namespace detail

inline void set_thread_count(int n) { detail::thread_count_ref() = n < 1 ? 1 : n; }
inline int thread_count() { return detail::thread_count_ref(); }

inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    const int nt = thread_count();
    if (nt <= 1 || n < 4096) {
        body(0, n);
        return;
    }
    const std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

// splitmix64: deterministic seed expansion for all stochastic pieces.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    // uniform in [-1, 1)
    double sym() { return 2.0 * (double(next() >> 11) * 0x1.0p-53) - 1.0; }
    // uniform in [0, 1)
    double uni() { return double(next() >> 11) * 0x1.0p-53; }
};

constexpr double kPi = 3.14159265358979323846264338327950288;

}  // namespace acspec
