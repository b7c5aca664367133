#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <thread>
#include <vector>

namespace trustrec {

// FNV-1a, used for content fingerprints and for deriving per-stage seeds.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a(s.data(), s.size(), h);
}

inline std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a(&v, sizeof(v), h);
}

// Derives an independent seed for a named pipeline stage from the run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    return fnv1a(tag, fnv1a_u64(seed));
}

// Runs fn(begin, end, chunk) over contiguous chunks of [0, n). Chunks write
// into caller-provided per-chunk buffers; the caller merges them in chunk
// order so results do not depend on the worker count.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t, int)>& fn) {
    if (n == 0) return;
    if (workers < 1) workers = 1;
    auto chunks = static_cast<std::size_t>(workers);
    if (chunks > n) chunks = n;
    if (chunks == 1) {
        fn(0, n, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    std::size_t base = n / chunks, rem = n % chunks, start = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t len = base + (c < rem ? 1 : 0);
        pool.emplace_back(fn, start, start + len, static_cast<int>(c));
        start += len;
    }
    for (auto& t : pool) t.join();
}

}  // namespace trustrec
