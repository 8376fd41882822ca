#include "nodeop/random.hpp"

#include "nodeop/hash.hpp"

namespace nodeop {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fork_seed(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ fnv1a(label)) + index);
}

std::uint64_t Rng::up_to(std::uint64_t bound) {
  if (bound == 0) return 0;
  if (bound == UINT64_MAX) return engine_();
  const std::uint64_t range = bound + 1;
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % range;
}

}  // namespace nodeop
