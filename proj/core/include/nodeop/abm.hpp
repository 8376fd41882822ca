#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "nodeop/ids.hpp"

namespace nodeop {

// One observed outcome for an operator.
struct OutcomeRecord {
  bool success = false;
  double performance = 0.0;  // in [0, 1]
  Tick tick = 0;

  // Value fed into the trust moving average: failures count as zero.
  double value() const { return success ? performance : 0.0; }

  bool operator==(const OutcomeRecord&) const = default;
};

// An agent: a general node operator.
struct OperatorState {
  OperatorId id;
  double stake = 0.0;
  double trust = 0.5;      // T_i in [0, 1]
  double capacity = 0.0;   // C_i(t), transactions per window
  double resources = 1.0;  // R_i(t), abstract units
  std::vector<OutcomeRecord> reputation_history;

  void validate() const;
  bool operator==(const OperatorState&) const = default;
};

struct TaskSpec {
  TaskId id;
  double cost_rate = 0.0;        // k, per allocation unit
  double corruption_rate = 0.0;  // q, per allocation unit
  double resource_cap = 0.0;     // R(t, tau)
  double value = 0.0;            // reward pool in tokens
  std::map<OperatorId, double> consensus_gain;    // c_{i,tau}
  std::map<OperatorId, double> performance_gain;  // s_{i,tau}

  double consensus_gain_for(const OperatorId& agent) const;
  double performance_gain_for(const OperatorId& agent) const;

  // Checks non-negativity and that both gain tables cover every agent.
  void validate(std::span<const OperatorState> agents) const;
  bool operator==(const TaskSpec&) const = default;
};

struct ScenarioWeights {
  double w1 = 1.0;  // consensus
  double w2 = 1.0;  // performance

  void validate() const;
  bool operator==(const ScenarioWeights&) const = default;
};

struct Scores {
  double consensus = 0.0;
  double performance = 0.0;
};

// C = c ln(1+x), S = s ln(1+x).
Scores evaluate_scores(const OperatorState& agent, const TaskSpec& task, double x);

// U = w1 C(x) + w2 S(x) - k x - q x.
double compute_utility(const OperatorState& agent, const TaskSpec& task,
                       const ScenarioWeights& weights, double x);

// Dense (agent, task) -> allocation units, agent-major.
class AllocationVector {
 public:
  AllocationVector() = default;
  AllocationVector(std::vector<OperatorId> agents, std::vector<TaskId> tasks);

  static AllocationVector zeros(std::span<const OperatorState> agents,
                                std::span<const TaskSpec> tasks);

  const std::vector<OperatorId>& agents() const { return agents_; }
  const std::vector<TaskId>& tasks() const { return tasks_; }
  std::size_t size() const { return values_.size(); }

  double at(const OperatorId& agent, const TaskId& task) const;
  void set(const OperatorId& agent, const TaskId& task, double x);

  double operator()(std::size_t agent, std::size_t task) const {
    return values_[agent * tasks_.size() + task];
  }
  double& operator()(std::size_t agent, std::size_t task) {
    return values_[agent * tasks_.size() + task];
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::size_t agent_index(const OperatorId& agent) const;
  std::size_t task_index(const TaskId& task) const;

  double task_total(std::size_t task) const;
  bool same_index_sets(const AllocationVector& other) const;

  // Throws DomainError unless every entry is finite and non-negative and each
  // task total stays within its cap plus `tolerance`.
  void validate(std::span<const TaskSpec> tasks, double tolerance = 1e-6) const;

  bool operator==(const AllocationVector&) const = default;

 private:
  std::vector<OperatorId> agents_;
  std::vector<TaskId> tasks_;
  std::vector<double> values_;
};

struct Deviation {
  OperatorId agent;
  TaskId from;
  TaskId to;
  double gain = 0.0;  // U(to) - U(from)

  bool operator==(const Deviation&) const = default;
};

struct EquilibriumVerdict {
  bool equilibrium = true;
  std::vector<Deviation> deviations;  // sorted by (agent, from, to)
};

inline constexpr double kEquilibriumTolerance = 1e-9;

// An agent holding m > 0 units on task tau deviates to tau' when moving
// min(m, residual cap of tau') units there raises its utility by more than
// `tol`.
EquilibriumVerdict check_equilibrium(std::span<const OperatorState> agents,
                                     std::span<const TaskSpec> tasks,
                                     const ScenarioWeights& weights,
                                     const AllocationVector& x,
                                     double tol = kEquilibriumTolerance);

}  // namespace nodeop
