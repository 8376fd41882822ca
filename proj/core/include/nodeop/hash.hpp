#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace nodeop {

// 64-bit FNV-1a, used for batch digests and trace digests.
class Fnv1a {
 public:
  void update(std::string_view bytes);
  void update(std::uint64_t word);
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(std::string_view bytes);

// Fixed-width lowercase hex, 16 characters.
std::string to_hex(std::uint64_t value);

}  // namespace nodeop
