#include "portsim/rng.hpp"

namespace portsim {

namespace {

constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ull;
constexpr std::uint64_t kPhiloxW = 0x9E3779B97F4A7C15ull;  // golden ratio

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
    const unsigned __int128 prod =
        static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
    hi = static_cast<std::uint64_t>(prod >> 64);
    lo = static_cast<std::uint64_t>(prod);
}

}  // namespace

void RandomStream::fill_block() {
    std::uint64_t c0 = ctr_lo_;
    std::uint64_t c1 = ctr_hi_;
    std::uint64_t k = key_;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi, lo;
        mulhilo(kPhiloxM, c0, hi, lo);
        c0 = hi ^ k ^ c1;
        c1 = lo;
        k += kPhiloxW;
    }
    buf_[0] = c0;
    buf_[1] = c1;
    if (++ctr_lo_ == 0) ++ctr_hi_;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

RandomStream make_stream(std::uint64_t master_seed, std::uint64_t replication,
                         std::string_view stream_id) {
    std::uint64_t k = mix64(master_seed ^ 0x517cc1b727220a95ull);
    k = mix64(k + replication * 0x9E3779B97F4A7C15ull + 1);
    k = mix64(k ^ fnv1a64(stream_id));
    return RandomStream(k, std::string(stream_id));
}

}  // namespace portsim
