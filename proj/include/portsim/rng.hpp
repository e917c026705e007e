#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace portsim {

// Counter-based generator (Philox-2x64, 10 rounds). A stream is a pure
// function of (master_seed, replication, stream_id): no jump-ahead needed,
// replications can run in parallel without coordination, and the sequence
// is bit-identical across platforms.
class RandomStream {
public:
    RandomStream() = default;
    RandomStream(std::uint64_t key, std::string label)
        : key_(key), label_(std::move(label)) {}

    std::uint64_t next_u64() {
        if (buf_pos_ == 2) {
            fill_block();
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    // Uniform on [0,1) with 53 random bits. 1.0 is never returned, so
    // bernoulli(1) is always true and bernoulli(0) always false.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased integer on [0, n). Rejection on the top of the 64-bit range.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double exponential(double mean) {
        // u in [0,1) keeps the argument of log in (0,1]; sample is finite, >= 0.
        return -mean * std::log(1.0 - uniform());
    }

    const std::string& label() const { return label_; }
    std::uint64_t key() const { return key_; }

private:
    void fill_block();

    std::uint64_t key_ = 0;
    std::uint64_t ctr_lo_ = 0;
    std::uint64_t ctr_hi_ = 0;
    std::uint64_t buf_[2] = {0, 0};
    int buf_pos_ = 2;
    std::string label_;
};

// 64-bit FNV-1a over the stream label.
std::uint64_t fnv1a64(std::string_view s);

// SplitMix64 finalizer; good avalanche, used for key derivation.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent stream from (master_seed, replication, stream_id).
// Identical inputs give identical sequences; distinct (replication, stream_id)
// pairs give statistically independent streams.
RandomStream make_stream(std::uint64_t master_seed, std::uint64_t replication,
                         std::string_view stream_id);

}  // namespace portsim
