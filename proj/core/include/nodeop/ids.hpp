#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>

namespace nodeop {

// Discrete simulation time.
using Tick = std::uint64_t;

// String-backed identifier; the tag keeps operator and task ids apart.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}
  explicit Id(const char* value) : value_(value) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  auto operator<=>(const Id&) const = default;
  bool operator==(const Id&) const = default;

 private:
  std::string value_;
};

template <typename Tag>
std::ostream& operator<<(std::ostream& os, const Id<Tag>& id) {
  return os << id.str();
}

struct OperatorTag {};
struct TaskTag {};

using OperatorId = Id<OperatorTag>;
using TaskId = Id<TaskTag>;

}  // namespace nodeop
