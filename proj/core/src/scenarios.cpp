#include "nodeop/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nodeop/errors.hpp"

namespace nodeop {

std::string_view to_string(ScenarioKind kind) {
  return kind == ScenarioKind::kSequencer ? "sequencer" : "payment";
}

ScenarioKind scenario_from_string(std::string_view text) {
  if (text == "sequencer") return ScenarioKind::kSequencer;
  if (text == "payment") return ScenarioKind::kPayment;
  throw DomainError("unknown scenario '" + std::string(text) + "'");
}

double validation_time(double consensus_score, double performance_score) {
  const double speed = consensus_score + performance_score;
  if (!(speed > 0.0)) throw UndefinedLatencyError("validation time undefined for C + S = 0");
  return 1.0 / speed;
}

SequencerMetrics sequencer_metrics(const SequencerRunLog& log) {
  const std::size_t n = log.nodes.size();
  if (n == 0) throw DomainError("sequencer metrics need at least one node");
  if (log.failures > n) throw DomainError("failures exceed node count");

  double validation_sum = 0.0;
  double output = 0.0;
  double cost = 0.0;
  double resources = 0.0;
  for (const auto& node : log.nodes) {
    if (node.output < 0.0 || node.cost < 0.0 || node.resources < 0.0) {
      throw DomainError("sequencer log values must be non-negative");
    }
    validation_sum += validation_time(node.consensus_score, node.performance_score);
    output += node.output;
    cost += node.cost;
    resources += node.resources;
  }
  if (!(resources > 0.0)) throw DomainError("total resources must be positive");

  SequencerMetrics m;
  m.latency = validation_sum / static_cast<double>(n);
  m.throughput = output / m.latency;
  m.fault_tolerance = 1.0 - static_cast<double>(log.failures) / static_cast<double>(n);
  m.resource_efficiency = (output - cost) / resources;
  return m;
}

double failure_probability(double trust, double kappa) {
  if (!(kappa >= 0.0)) throw DomainError("failure kappa must be non-negative");
  if (!(trust >= 0.0 && trust <= 1.0)) throw DomainError("trust must lie in [0, 1]");
  if (kappa == 0.0) return 0.0;
  if (trust == 0.0) return 1.0;
  return std::min(1.0, kappa / trust);
}

void PaymentNodeParams::validate() const {
  for (double v : {fee, validation_cost, capacity, penalty, error_cost, deadline, validation_time}) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("payment parameters must be finite and non-negative");
  }
  if (!(validation_cost_cap >= 0.0)) throw DomainError("validation cost cap must be non-negative");
  if (!(error_rate >= 0.0 && error_rate <= 1.0)) throw DomainError("error rate must lie in [0, 1]");
}

PaymentNodeParams apply_stages(PaymentNodeParams params, std::span<const ValidationStage> stages) {
  if (stages.empty()) return params;
  double latency = 0.0;
  double pass = 1.0;
  for (const auto& s : stages) {
    if (!(s.latency >= 0.0) || !(s.error_rate >= 0.0 && s.error_rate <= 1.0)) {
      throw DomainError("stage latency must be non-negative and error rate in [0, 1]");
    }
    latency += s.latency;
    pass *= 1.0 - s.error_rate;
  }
  params.validation_time = latency;
  params.error_rate = 1.0 - pass;
  return params;
}

double payment_validation_cost(const PaymentNodeParams& p, double transactions) {
  return p.validation_cost * transactions * transactions / 2.0;
}

double payment_expected_errors(const PaymentNodeParams& p, double transactions) {
  return p.error_rate * transactions;
}

double payment_penalty(const PaymentNodeParams& p, double transactions) {
  return p.penalty * std::max(0.0, transactions * (p.validation_time - p.deadline));
}

double payment_utility(const PaymentNodeParams& p, double transactions) {
  p.validate();
  if (!(transactions >= 0.0)) throw DomainError("transaction count must be non-negative");
  if (transactions > p.capacity) throw ConstraintViolation("transactions exceed capacity");
  const double cost = payment_validation_cost(p, transactions);
  if (cost > p.validation_cost_cap) throw ConstraintViolation("validation cost exceeds V_max");
  return p.fee * transactions - cost - p.error_cost * payment_expected_errors(p, transactions) -
         payment_penalty(p, transactions);
}

double optimize_throughput(const PaymentNodeParams& p) {
  p.validate();
  double upper = p.capacity;
  if (p.validation_cost > 0.0 && std::isfinite(p.validation_cost_cap)) {
    upper = std::min(upper, std::sqrt(2.0 * p.validation_cost_cap / p.validation_cost));
  }
  // U is concave: linear marginal value minus v T.
  const double lateness = std::max(0.0, p.validation_time - p.deadline);
  const double marginal = p.fee - p.error_cost * p.error_rate - p.penalty * lateness;
  if (!(marginal > 0.0)) return 0.0;
  if (p.validation_cost == 0.0) return upper;
  return std::clamp(marginal / p.validation_cost, 0.0, upper);
}

PaymentMetrics payment_metrics(std::span<const PaymentTickLog> history) {
  if (history.empty()) throw DomainError("payment metrics need at least one tick");
  auto totals = [](const PaymentTickLog& tick) {
    struct { double t = 0, v = 0, e = 0, p = 0, profit = 0; } s;
    for (const auto& n : tick) {
      s.t += n.transactions;
      s.v += n.validation_cost;
      s.e += n.errors;
      s.p += n.penalty;
      s.profit += n.profit;
    }
    return s;
  };
  const auto now = totals(history.back());
  PaymentMetrics m;
  m.total_transactions = now.t;
  m.total_penalties = now.p;
  if (now.v > 0.0) m.validation_efficiency = now.t / now.v;
  if (now.t > 0.0) m.error_rate = now.e / now.t;
  if (history.size() >= 2) {
    const auto before = totals(history[history.size() - 2]);
    if (before.profit != 0.0) m.revenue_growth = (now.profit - before.profit) / before.profit;
  }
  return m;
}

PaymentConvergence payment_convergence_check(std::span<const AllocationVector> history,
                                             double eps, const PaymentNodeParams& params,
                                             bool fee_fixed) {
  if (history.size() < 2) throw DomainError("convergence check needs at least two allocations");
  PaymentConvergence out;
  out.converged = check_convergence(history[history.size() - 2], history.back(), eps);
  const double v = params.validation_cost;
  out.stability = fee_fixed ? classify_hessian(SquareMatrix(1, {-v}))
                            : classify_hessian(SquareMatrix(2, {-v, 1.0, 1.0, 0.0}));
  return out;
}

}  // namespace nodeop
