#include "nodeop/incentives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nodeop/errors.hpp"

namespace nodeop {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kTaskComplete: return "task-complete";
    case EventKind::kSubmitSuccess: return "submit-success";
    case EventKind::kMiss: return "miss";
    case EventKind::kConsensusFault: return "consensus-fault";
  }
  return "miss";
}

std::string_view to_string(LedgerKind kind) {
  switch (kind) {
    case LedgerKind::kReward: return "reward";
    case LedgerKind::kFee: return "fee";
    case LedgerKind::kSlash: return "slash";
  }
  return "slash";
}

EventKind event_kind_from_string(std::string_view text) {
  if (text == "task-complete") return EventKind::kTaskComplete;
  if (text == "submit-success") return EventKind::kSubmitSuccess;
  if (text == "miss") return EventKind::kMiss;
  if (text == "consensus-fault") return EventKind::kConsensusFault;
  throw DomainError("unknown event kind '" + std::string(text) + "'");
}

LedgerKind ledger_kind_from_string(std::string_view text) {
  if (text == "reward") return LedgerKind::kReward;
  if (text == "fee") return LedgerKind::kFee;
  if (text == "slash") return LedgerKind::kSlash;
  throw DomainError("unknown ledger kind '" + std::string(text) + "'");
}

void ReputationParams::validate() const {
  if (!(smoothing > 0.0 && smoothing < 1.0)) throw DomainError("smoothing must lie in (0, 1)");
  if (!(initial_trust >= 0.0 && initial_trust <= 1.0)) {
    throw DomainError("initial_trust must lie in [0, 1]");
  }
  if (!(slash_fraction > 0.0 && slash_fraction < 1.0)) {
    throw DomainError("slash_fraction must lie in (0, 1)");
  }
  if (!(std::isfinite(submission_fee) && submission_fee >= 0.0)) {
    throw DomainError("submission_fee must be finite and non-negative");
  }
}

Settlement settle(std::span<const SettlementEvent> events,
                  const std::map<OperatorId, double>& stakes,
                  const std::map<TaskId, double>& task_values, const ReputationParams& params) {
  params.validate();
  for (const auto& [task, value] : task_values) {
    if (!(value >= 0.0)) throw DomainError("task value of '" + task.str() + "' must be non-negative");
  }

  // Completers per task, for the proportional split.
  std::map<TaskId, double> performance_total;
  std::map<TaskId, std::size_t> completers;
  for (const auto& e : events) {
    if (!stakes.contains(e.operator_id)) {
      throw DomainError("settlement event for unknown operator '" + e.operator_id.str() + "'");
    }
    if (e.kind != EventKind::kTaskComplete) continue;
    if (!e.task || !task_values.contains(*e.task)) {
      throw DomainError("task-complete event references an unknown task");
    }
    if (!(e.performance >= 0.0) || !std::isfinite(e.performance)) {
      throw DomainError("performance score must be finite and non-negative");
    }
    performance_total[*e.task] += e.performance;
    ++completers[*e.task];
  }

  Settlement out;
  out.stakes = stakes;
  for (const auto& e : events) {
    switch (e.kind) {
      case EventKind::kTaskComplete: {
        const double total = performance_total[*e.task];
        const double share = total > 0.0 ? e.performance / total
                                         : 1.0 / static_cast<double>(completers[*e.task]);
        const double amount = task_values.at(*e.task) * share;
        out.entries.push_back({e.operator_id, e.tick, LedgerKind::kReward, amount, e.kind});
        out.total_disbursed += amount;
        break;
      }
      case EventKind::kSubmitSuccess:
        out.entries.push_back(
            {e.operator_id, e.tick, LedgerKind::kFee, params.submission_fee, e.kind});
        out.total_disbursed += params.submission_fee;
        break;
      case EventKind::kMiss:
      case EventKind::kConsensusFault: {
        double& stake = out.stakes[e.operator_id];
        const double amount = std::min(stake, params.slash_fraction * stake);
        stake -= amount;
        out.entries.push_back({e.operator_id, e.tick, LedgerKind::kSlash, amount, e.kind});
        out.total_slashed += amount;
        break;
      }
    }
  }
  return out;
}

double update_trust(double trust, std::span<const OutcomeRecord> outcomes, double smoothing) {
  if (!(smoothing > 0.0 && smoothing < 1.0)) throw DomainError("smoothing must lie in (0, 1)");
  for (const auto& o : outcomes) {
    const double v = o.value();
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("outcome values must lie in [0, 1]");
    trust = std::clamp(smoothing * trust + (1.0 - smoothing) * v, 0.0, 1.0);
  }
  return trust;
}

std::map<OperatorId, double> update_reputation(std::span<const OperatorState> operators,
                                               const std::map<OperatorId, double>& initial_trust,
                                               const ReputationParams& params) {
  std::map<OperatorId, double> out;
  for (const auto& op : operators) {
    auto it = initial_trust.find(op.id);
    const double start = it != initial_trust.end() ? it->second : params.initial_trust;
    out[op.id] = update_trust(start, op.reputation_history, params.smoothing);
  }
  return out;
}

double aggregate_results(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw DomainError("values and weights differ in length");
  if (values.empty()) throw DomainError("aggregation needs at least one value");
  double weighted = 0.0;
  double total = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw DomainError("weights must be finite and non-negative");
    }
    weighted += weights[i] * values[i];
    total += weights[i];
    if (weights[i] > 0.0) {
      lo = std::min(lo, values[i]);
      hi = std::max(hi, values[i]);
    }
  }
  if (!(total > 0.0)) throw DomainError("aggregation weights sum to zero");
  // Rounding can push the quotient an ulp past the extremes.
  return std::clamp(weighted / total, lo, hi);
}

AggregationReport make_aggregation_report(Tick tick, const std::map<OperatorId, double>& values,
                                          const std::map<OperatorId, double>& weights) {
  AggregationReport r;
  r.tick = tick;
  for (const auto& [id, v] : values) {
    auto it = weights.find(id);
    if (it == weights.end()) throw DomainError("no aggregation weight for '" + id.str() + "'");
    r.operators.push_back(id);
    r.values.push_back(v);
    r.weights.push_back(it->second);
  }
  r.aggregate = aggregate_results(r.values, r.weights);
  return r;
}

FeedbackResult feedback_iterate(const MetricsSnapshot& snapshot,
                                const std::map<OperatorId, double>& weights,
                                const AllocationVector& allocation) {
  FeedbackResult out;
  for (const auto& [id, w] : weights) {
    auto it = snapshot.trust.find(id);
    if (it == snapshot.trust.end()) {
      throw DomainError("metrics snapshot does not cover operator '" + id.str() + "'");
    }
  }
  for (const auto& [id, trust] : snapshot.trust) {
    out.weights[id] = trust;
    out.request.gain_scale[id] = trust;
  }
  out.request.warm_start = allocation;
  return out;
}

std::vector<TaskSpec> scale_gains(std::span<const TaskSpec> base, const ResolveRequest& request) {
  std::vector<TaskSpec> out(base.begin(), base.end());
  for (auto& task : out) {
    for (auto* table : {&task.consensus_gain, &task.performance_gain}) {
      for (auto& [id, gain] : *table) {
        auto it = request.gain_scale.find(id);
        if (it != request.gain_scale.end()) gain *= it->second;
      }
    }
  }
  return out;
}

}  // namespace nodeop
