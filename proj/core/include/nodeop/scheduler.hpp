#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodeop/ids.hpp"

namespace nodeop {

struct OperatorPriority {
  OperatorId id;
  double reputation = 0.0;
};

struct SubmissionWindow {
  OperatorId operator_id;
  Tick start_tick = 0;  // inclusive
  Tick end_tick = 0;    // exclusive
  std::size_t window_index = 0;
  bool is_fallback = false;
  std::optional<std::size_t> covers_window;

  bool overlaps(const SubmissionWindow& other) const {
    return start_tick < other.end_tick && other.start_tick < end_tick;
  }
  bool operator==(const SubmissionWindow&) const = default;
};

struct Schedule {
  Tick horizon_ticks = 0;
  Tick window_length = 0;
  Tick grace_length = 0;  // 0 disables fallbacks
  std::vector<SubmissionWindow> windows;  // sorted by start_tick

  // Fallback grace ticks that run past the horizon; the next epoch's
  // schedule must reserve them at its start.
  Tick spill_ticks = 0;

  const SubmissionWindow* find(std::size_t window_index) const;
  bool has_fallback_for(std::size_t window_index) const;
  std::size_t regular_window_count() const;
  bool operator==(const Schedule&) const = default;
};

// Tiles [0, horizon) with windows of `window_length`, handing them out
// round-robin over operators sorted by descending reputation (ties by id). A
// trailing remainder shorter than a window stays unassigned. The first
// `reserved_prefix` ticks are carved from the first window. The default grace
// is window_length / 2; it must stay below window_length.
Schedule assign_windows(std::span<const OperatorPriority> operators, Tick horizon,
                        Tick window_length, std::optional<Tick> grace_length = std::nullopt,
                        Tick reserved_prefix = 0);

struct FallbackDecision {
  std::optional<SubmissionWindow> fallback;
  bool unrecoverable = false;
  std::string reason;  // set when unrecoverable
};

// The fallback occupies [missed.end, missed.end + grace) and goes to the
// highest-reputation operator other than the misser (ties by id). Missing a
// fallback window, having a single operator or no grace is unrecoverable.
FallbackDecision on_window_miss(const Schedule& schedule, const SubmissionWindow& missed,
                                std::span<const OperatorPriority> operators);

// Inserts a fallback window and carves its ticks off the start of the
// regular window that follows it.
void apply_fallback(Schedule& schedule, const SubmissionWindow& fallback);

// One record per line: window_index, operator, start, end, is_fallback.
std::string export_schedule(const Schedule& schedule);

}  // namespace nodeop
