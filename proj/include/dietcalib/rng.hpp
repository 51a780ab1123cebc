#pragma once

#include <cstdint>

namespace dietcalib {

// Standard-normal quantile function (inverse CDF).
//
// Rational minimax approximation in three regimes (central, tail, far
// tail), absolute error below 1e-9 over (0, 1). Pure arithmetic: the same
// bits come back on every conforming platform, which keeps simulation
// streams reproducible across machines.
//
// Throws std::invalid_argument unless 0 < p < 1.
double normal_quantile(double p);

// Composes the identity of one replicate stream: each scenario cell owns a
// 32-bit block of replicate streams, so no two (cell, replicate) pairs can
// collide.
constexpr std::uint64_t compose_stream_id(std::uint64_t scenario_index,
                                          std::uint64_t replicate_index) {
    return (scenario_index << 32) + replicate_index;
}

// Counter-based pseudo-random stream.
//
// Each (master_seed, stream_id) pair names a statistically independent
// sequence: the per-stream key is a strong 64-bit hash of both, and draw k
// is a bijective mix of key + k * gamma (the splittable-generator
// construction). Output depends only on (key, counter), so streams can be
// created in any order, on any thread, and always yield the same values.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    // Next raw 64-bit word.
    std::uint64_t next_u64();

    // Uniform draw strictly inside (0, 1); 53-bit resolution, never 0 or 1,
    // so it is always a valid quantile argument.
    double next_uniform();

    // Standard-normal draw via the inverse CDF.
    double next_normal();

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t counter() const { return counter_; }

  private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace dietcalib
