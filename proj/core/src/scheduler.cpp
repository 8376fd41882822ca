#include "nodeop/scheduler.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "nodeop/errors.hpp"

namespace nodeop {
namespace {

std::vector<OperatorPriority> by_priority(std::span<const OperatorPriority> operators) {
  std::vector<OperatorPriority> sorted(operators.begin(), operators.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.reputation != b.reputation) return a.reputation > b.reputation;
    return a.id < b.id;
  });
  return sorted;
}

}  // namespace

const SubmissionWindow* Schedule::find(std::size_t window_index) const {
  for (const auto& w : windows) {
    if (w.window_index == window_index) return &w;
  }
  return nullptr;
}

bool Schedule::has_fallback_for(std::size_t window_index) const {
  return std::any_of(windows.begin(), windows.end(), [&](const SubmissionWindow& w) {
    return w.is_fallback && w.covers_window == window_index;
  });
}

std::size_t Schedule::regular_window_count() const {
  return static_cast<std::size_t>(
      std::count_if(windows.begin(), windows.end(), [](const auto& w) { return !w.is_fallback; }));
}

Schedule assign_windows(std::span<const OperatorPriority> operators, Tick horizon,
                        Tick window_length, std::optional<Tick> grace_length,
                        Tick reserved_prefix) {
  if (operators.empty()) throw DomainError("assign_windows needs at least one operator");
  if (window_length == 0) throw DomainError("window_length must be positive");
  if (horizon < window_length) throw DomainError("horizon must be at least one window");
  std::set<OperatorId> ids;
  for (const auto& op : operators) {
    if (!ids.insert(op.id).second) throw DomainError("duplicate operator '" + op.id.str() + "'");
  }

  Schedule s;
  s.horizon_ticks = horizon;
  s.window_length = window_length;
  s.grace_length = grace_length.value_or(window_length / 2);
  if (s.grace_length >= window_length) throw DomainError("grace_length must be below window_length");
  if (reserved_prefix > s.grace_length) {
    throw DomainError("reserved prefix cannot exceed grace_length");
  }

  const auto order = by_priority(operators);
  const Tick count = horizon / window_length;
  for (Tick k = 0; k < count; ++k) {
    SubmissionWindow w;
    w.operator_id = order[k % order.size()].id;
    w.start_tick = k * window_length;
    w.end_tick = w.start_tick + window_length;
    w.window_index = static_cast<std::size_t>(k);
    if (k == 0) w.start_tick += reserved_prefix;
    s.windows.push_back(std::move(w));
  }
  return s;
}

FallbackDecision on_window_miss(const Schedule& schedule, const SubmissionWindow& missed,
                                std::span<const OperatorPriority> operators) {
  const SubmissionWindow* own = schedule.find(missed.window_index);
  if (own == nullptr || *own != missed) throw DomainError("missed window is not part of the schedule");
  if (schedule.has_fallback_for(missed.window_index)) {
    throw DomainError("a fallback was already issued for this window");
  }

  FallbackDecision out;
  if (missed.is_fallback) {
    out.unrecoverable = true;
    out.reason = "fallback window missed";
    return out;
  }
  if (schedule.grace_length == 0) {
    out.unrecoverable = true;
    out.reason = "no grace period";
    return out;
  }
  std::optional<OperatorPriority> best;
  for (const auto& op : by_priority(operators)) {
    if (op.id != missed.operator_id) {
      best = op;
      break;
    }
  }
  if (!best) {
    out.unrecoverable = true;
    out.reason = "no other operator can step in";
    return out;
  }

  std::size_t next_index = 0;
  for (const auto& w : schedule.windows) next_index = std::max(next_index, w.window_index + 1);

  SubmissionWindow fb;
  fb.operator_id = best->id;
  fb.start_tick = missed.end_tick;
  fb.end_tick = missed.end_tick + schedule.grace_length;
  fb.window_index = next_index;
  fb.is_fallback = true;
  fb.covers_window = missed.window_index;
  out.fallback = std::move(fb);
  return out;
}

void apply_fallback(Schedule& schedule, const SubmissionWindow& fallback) {
  if (!fallback.is_fallback || !fallback.covers_window) {
    throw DomainError("apply_fallback expects a fallback window");
  }
  if (schedule.has_fallback_for(*fallback.covers_window)) {
    throw DomainError("a fallback was already issued for this window");
  }
  for (auto& w : schedule.windows) {
    if (!w.is_fallback && w.start_tick < fallback.end_tick && w.end_tick > fallback.start_tick) {
      if (w.start_tick < fallback.start_tick) throw DomainError("fallback overlaps a running window");
      w.start_tick = fallback.end_tick;
      if (w.start_tick >= w.end_tick) throw DomainError("fallback consumes an entire window");
    }
  }
  if (fallback.end_tick > schedule.horizon_ticks) {
    schedule.spill_ticks = std::max(schedule.spill_ticks, fallback.end_tick - schedule.horizon_ticks);
  }
  schedule.windows.push_back(fallback);
  std::stable_sort(schedule.windows.begin(), schedule.windows.end(),
                   [](const auto& a, const auto& b) { return a.start_tick < b.start_tick; });
}

std::string export_schedule(const Schedule& schedule) {
  std::ostringstream os;
  for (const auto& w : schedule.windows) {
    os << w.window_index << '\t' << w.operator_id.str() << '\t' << w.start_tick << '\t'
       << w.end_tick << '\t' << (w.is_fallback ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace nodeop
