#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nodeop {

// Derives an independent child seed from a parent seed and a fixed label so
// that draws in one module never perturb another module's stream.
std::uint64_t fork_seed(std::uint64_t seed, std::string_view label,
                        std::uint64_t index = 0);

// Portable deterministic generator: mt19937_64 output is fixed by the
// standard, and the conversions below avoid implementation-defined
// distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, bound].
  std::uint64_t up_to(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace nodeop
