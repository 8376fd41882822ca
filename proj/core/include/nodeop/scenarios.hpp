#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nodeop/allocator.hpp"
#include "nodeop/ids.hpp"

namespace nodeop {

enum class ScenarioKind { kSequencer, kPayment };

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(std::string_view text);

// ---- L2 sequencer ----------------------------------------------------------

struct SequencerNodeLog {
  OperatorId id;
  double output = 0.0;             // R_i(t), transactions
  double consensus_score = 0.0;    // C_i(t, tau)
  double performance_score = 0.0;  // S_i(t, tau)
  double cost = 0.0;               // Cost_i(t)
  double resources = 0.0;          // Total Resources_i(t)
};

struct SequencerRunLog {
  std::vector<SequencerNodeLog> nodes;
  std::size_t failures = 0;  // Node Failures(t)
};

struct SequencerMetrics {
  double throughput = 0.0;           // T = sum R / L
  double latency = 0.0;              // L = sum t_validation / N
  double fault_tolerance = 0.0;      // F = 1 - failures / N
  double resource_efficiency = 0.0;  // E = (sum R - sum Cost) / sum Resources

  bool operator==(const SequencerMetrics&) const = default;
};

// t_validation = 1 / (C + S); throws UndefinedLatencyError when C + S == 0.
double validation_time(double consensus_score, double performance_score);

SequencerMetrics sequencer_metrics(const SequencerRunLog& log);

inline constexpr double kDefaultFailureKappa = 0.05;

// Per-window failure probability min(1, kappa / trust); 1 when trust is 0.
double failure_probability(double trust, double kappa = kDefaultFailureKappa);

// ---- Off-chain payment validation ------------------------------------------

struct ValidationStage {
  double latency = 0.0;
  double error_rate = 0.0;  // in [0, 1]

  bool operator==(const ValidationStage&) const = default;
};

struct PaymentNodeParams {
  double fee = 0.0;                 // F_i, tokens per validated transaction
  double validation_cost = 0.0;     // v, V(T) = v T^2 / 2
  double capacity = 0.0;            // C_i(t), transactions
  double validation_cost_cap = std::numeric_limits<double>::infinity();  // V_max
  double penalty = 0.0;             // lambda, per transaction-time unit late
  double error_cost = 0.0;          // gamma
  double error_rate = 0.0;          // e, E(T) = e T
  double deadline = 0.0;            // tau_max
  double validation_time = 0.0;     // t_validation

  void validate() const;
  bool operator==(const PaymentNodeParams&) const = default;
};

// Sums stage latencies into t_validation and composes error rates as
// 1 - prod(1 - e_s). Leaves params untouched when `stages` is empty.
PaymentNodeParams apply_stages(PaymentNodeParams params, std::span<const ValidationStage> stages);

double payment_validation_cost(const PaymentNodeParams& p, double transactions);
double payment_expected_errors(const PaymentNodeParams& p, double transactions);
double payment_penalty(const PaymentNodeParams& p, double transactions);

// U = F T - v T^2 / 2 - gamma e T - lambda max(0, T (t_validation - tau_max)).
// Throws ConstraintViolation if T exceeds capacity or V(T) exceeds V_max.
double payment_utility(const PaymentNodeParams& p, double transactions);

// Maximizer of payment_utility over the feasible range [0, min(C, T_vmax)].
double optimize_throughput(const PaymentNodeParams& p);

struct PaymentNodeLog {
  OperatorId id;
  double transactions = 0.0;     // T_i(t)
  double validation_cost = 0.0;  // V_i(t)
  double errors = 0.0;           // E(T_i(t))
  double penalty = 0.0;          // P_i(t)
  double profit = 0.0;           // contribution to Pi_total(t)
};

using PaymentTickLog = std::vector<PaymentNodeLog>;

struct PaymentMetrics {
  double total_transactions = 0.0;             // T_total
  std::optional<double> validation_efficiency; // E_validation, absent if sum V == 0
  std::optional<double> error_rate;            // E_error, absent if sum T == 0
  std::optional<double> revenue_growth;        // R_growth, absent if undefined
  double total_penalties = 0.0;

  bool operator==(const PaymentMetrics&) const = default;
};

// Metrics for the last tick of `history`; growth compares it to the one
// before.
PaymentMetrics payment_metrics(std::span<const PaymentTickLog> history);

struct PaymentConvergence {
  bool converged = false;
  StabilityReport stability;
};

// Convergence of the last two allocations in `history`, plus the Hessian of
// U in (T, F): [[-v, 1], [1, 0]], or [-v] when the fee is held fixed.
PaymentConvergence payment_convergence_check(std::span<const AllocationVector> history,
                                             double eps, const PaymentNodeParams& params,
                                             bool fee_fixed = false);

}  // namespace nodeop
