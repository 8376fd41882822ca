#pragma once

#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nodeop/abm.hpp"
#include "nodeop/ids.hpp"

namespace nodeop {

enum class EventKind { kTaskComplete, kSubmitSuccess, kMiss, kConsensusFault };
enum class LedgerKind { kReward, kFee, kSlash };

std::string_view to_string(EventKind kind);
std::string_view to_string(LedgerKind kind);
EventKind event_kind_from_string(std::string_view text);
LedgerKind ledger_kind_from_string(std::string_view text);

struct SettlementEvent {
  OperatorId operator_id;
  Tick tick = 0;
  EventKind kind = EventKind::kSubmitSuccess;
  std::optional<TaskId> task;  // task-complete only
  double performance = 0.0;    // task-complete only, >= 0
};

struct LedgerEntry {
  OperatorId operator_id;
  Tick tick = 0;
  LedgerKind kind = LedgerKind::kFee;
  double amount = 0.0;  // always >= 0; the kind carries the sign
  EventKind reason = EventKind::kSubmitSuccess;

  bool operator==(const LedgerEntry&) const = default;
};

struct ReputationParams {
  double smoothing = 0.9;       // beta in (0, 1)
  double initial_trust = 0.5;   // in [0, 1]
  double slash_fraction = 0.05; // in (0, 1)
  double submission_fee = 1.0;  // tokens per successful submission

  void validate() const;
  bool operator==(const ReputationParams&) const = default;
};

struct Settlement {
  std::vector<LedgerEntry> entries;
  std::map<OperatorId, double> stakes;
  double total_disbursed = 0.0;
  double total_slashed = 0.0;
};

// Applies events in order. Task value is split among that task's completers
// in proportion to their performance (evenly if all report zero); a
// successful submission earns the fixed fee; a miss or consensus fault
// slashes slash_fraction of the current stake.
Settlement settle(std::span<const SettlementEvent> events,
                  const std::map<OperatorId, double>& stakes,
                  const std::map<TaskId, double>& task_values, const ReputationParams& params);

// T' = beta T + (1 - beta) outcome for each record in order, clamped to [0, 1].
double update_trust(double trust, std::span<const OutcomeRecord> outcomes, double smoothing);

// Trust of each operator recomputed from its full history, starting at
// `initial_trust[id]` (params.initial_trust when absent).
std::map<OperatorId, double> update_reputation(std::span<const OperatorState> operators,
                                               const std::map<OperatorId, double>& initial_trust,
                                               const ReputationParams& params);

// A = sum w_i R_i / sum w_i.
double aggregate_results(std::span<const double> values, std::span<const double> weights);

struct AggregationReport {
  Tick tick = 0;
  std::vector<OperatorId> operators;
  std::vector<double> values;   // R_i(t)
  std::vector<double> weights;  // w_i
  double aggregate = 0.0;       // A(t)

  bool operator==(const AggregationReport&) const = default;
};

AggregationReport make_aggregation_report(Tick tick, const std::map<OperatorId, double>& values,
                                          const std::map<OperatorId, double>& weights);

struct MetricsSnapshot {
  std::map<OperatorId, double> trust;
  std::map<OperatorId, double> performance;
};

// Gains of operator i are multiplied by gain_scale[i] on the next re-solve.
struct ResolveRequest {
  std::map<OperatorId, double> gain_scale;
  AllocationVector warm_start;
};

struct FeedbackResult {
  std::map<OperatorId, double> weights;
  ResolveRequest request;
};

// w_i <- T_i and a re-solve request with trust-scaled gains. Every weighted
// operator must appear in the snapshot.
FeedbackResult feedback_iterate(const MetricsSnapshot& snapshot,
                                const std::map<OperatorId, double>& weights,
                                const AllocationVector& allocation);

// Applies a re-solve request's gain scaling to a copy of the base tasks.
std::vector<TaskSpec> scale_gains(std::span<const TaskSpec> base, const ResolveRequest& request);

}  // namespace nodeop
