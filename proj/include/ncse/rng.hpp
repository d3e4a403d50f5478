#pragma once

#include <cstdint>
#include <random>

#include "ncse/types.hpp"

namespace ncse {

// Deterministic random source. All randomness in the library flows through
// this class so that a fixed seed plus a fixed call sequence reproduces
// bit-identical results. std::mt19937_64 has a fully specified algorithm;
// the floating-point draws below avoid std::*_distribution, whose output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(RngSeed seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection removes modulo bias.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Marsaglia's polar method (one value cached).
  double normal();

  Vec normal_vec(Index n);

  // Derives an independent stream seed; used to give sub-computations their
  // own reproducible generators (seed, stream_id) -> seed'.
  static RngSeed derive(RngSeed seed, std::uint64_t stream_id);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ncse
