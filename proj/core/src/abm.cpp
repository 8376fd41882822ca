#include "nodeop/abm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nodeop/errors.hpp"

namespace nodeop {
namespace {

void require_finite_nonneg(double v, const std::string& what) {
  if (!std::isfinite(v)) throw DomainError(what + " must be finite");
  if (v < 0.0) throw DomainError(what + " must be non-negative");
}

void require_allocation(double x) {
  if (std::isnan(x) || x < 0.0) throw DomainError("allocation must be non-negative");
  if (!std::isfinite(x)) throw DomainError("allocation must be finite");
}

double gain_lookup(const std::map<OperatorId, double>& table, const OperatorId& agent,
                   const TaskId& task, const char* which) {
  auto it = table.find(agent);
  if (it == table.end()) {
    throw DomainError(std::string("task '") + task.str() + "' has no " + which +
                      " gain for agent '" + agent.str() + "'");
  }
  return it->second;
}

}  // namespace

void OperatorState::validate() const {
  if (id.empty()) throw DomainError("operator id must be non-empty");
  require_finite_nonneg(stake, "stake of '" + id.str() + "'");
  require_finite_nonneg(capacity, "capacity of '" + id.str() + "'");
  require_finite_nonneg(resources, "resources of '" + id.str() + "'");
  if (!(trust >= 0.0 && trust <= 1.0)) {
    throw DomainError("trust of '" + id.str() + "' must lie in [0, 1]");
  }
}

double TaskSpec::consensus_gain_for(const OperatorId& agent) const {
  return gain_lookup(consensus_gain, agent, id, "consensus");
}

double TaskSpec::performance_gain_for(const OperatorId& agent) const {
  return gain_lookup(performance_gain, agent, id, "performance");
}

void TaskSpec::validate(std::span<const OperatorState> agents) const {
  if (id.empty()) throw DomainError("task id must be non-empty");
  const std::string where = "task '" + id.str() + "' ";
  require_finite_nonneg(cost_rate, where + "cost_rate");
  require_finite_nonneg(corruption_rate, where + "corruption_rate");
  require_finite_nonneg(resource_cap, where + "resource_cap");
  require_finite_nonneg(value, where + "value");
  for (const auto& [agent, g] : consensus_gain) require_finite_nonneg(g, where + "consensus_gain");
  for (const auto& [agent, g] : performance_gain) require_finite_nonneg(g, where + "performance_gain");
  for (const auto& a : agents) {
    consensus_gain_for(a.id);
    performance_gain_for(a.id);
  }
}

void ScenarioWeights::validate() const {
  require_finite_nonneg(w1, "weight w1");
  require_finite_nonneg(w2, "weight w2");
  if (!(w1 + w2 > 0.0)) throw DomainError("weights w1 + w2 must be positive");
}

Scores evaluate_scores(const OperatorState& agent, const TaskSpec& task, double x) {
  require_allocation(x);
  const double log_term = std::log1p(x);
  return {task.consensus_gain_for(agent.id) * log_term,
          task.performance_gain_for(agent.id) * log_term};
}

double compute_utility(const OperatorState& agent, const TaskSpec& task,
                       const ScenarioWeights& weights, double x) {
  require_allocation(x);
  weights.validate();
  const double c = task.consensus_gain_for(agent.id);
  const double s = task.performance_gain_for(agent.id);
  for (double p : {c, s, task.cost_rate, task.corruption_rate, weights.w1, weights.w2}) {
    if (!std::isfinite(p)) throw DomainError("utility parameters must be finite");
  }
  const Scores scores = evaluate_scores(agent, task, x);
  return weights.w1 * scores.consensus + weights.w2 * scores.performance -
         task.cost_rate * x - task.corruption_rate * x;
}

AllocationVector::AllocationVector(std::vector<OperatorId> agents, std::vector<TaskId> tasks)
    : agents_(std::move(agents)), tasks_(std::move(tasks)),
      values_(agents_.size() * tasks_.size(), 0.0) {}

AllocationVector AllocationVector::zeros(std::span<const OperatorState> agents,
                                         std::span<const TaskSpec> tasks) {
  std::vector<OperatorId> a;
  std::vector<TaskId> t;
  for (const auto& op : agents) a.push_back(op.id);
  for (const auto& task : tasks) t.push_back(task.id);
  return AllocationVector(std::move(a), std::move(t));
}

std::size_t AllocationVector::agent_index(const OperatorId& agent) const {
  auto it = std::find(agents_.begin(), agents_.end(), agent);
  if (it == agents_.end()) throw DomainError("unknown agent '" + agent.str() + "'");
  return static_cast<std::size_t>(it - agents_.begin());
}

std::size_t AllocationVector::task_index(const TaskId& task) const {
  auto it = std::find(tasks_.begin(), tasks_.end(), task);
  if (it == tasks_.end()) throw DomainError("unknown task '" + task.str() + "'");
  return static_cast<std::size_t>(it - tasks_.begin());
}

double AllocationVector::at(const OperatorId& agent, const TaskId& task) const {
  return (*this)(agent_index(agent), task_index(task));
}

void AllocationVector::set(const OperatorId& agent, const TaskId& task, double x) {
  (*this)(agent_index(agent), task_index(task)) = x;
}

double AllocationVector::task_total(std::size_t task) const {
  double total = 0.0;
  for (std::size_t i = 0; i < agents_.size(); ++i) total += (*this)(i, task);
  return total;
}

bool AllocationVector::same_index_sets(const AllocationVector& other) const {
  return agents_ == other.agents_ && tasks_ == other.tasks_;
}

void AllocationVector::validate(std::span<const TaskSpec> tasks, double tolerance) const {
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError("allocation entries must be finite and non-negative");
    }
  }
  for (const auto& task : tasks) {
    const double total = task_total(task_index(task.id));
    if (total > task.resource_cap + tolerance) {
      throw DomainError("allocation exceeds resource cap of task '" + task.id.str() + "'");
    }
  }
}

EquilibriumVerdict check_equilibrium(std::span<const OperatorState> agents,
                                     std::span<const TaskSpec> tasks,
                                     const ScenarioWeights& weights,
                                     const AllocationVector& x, double tol) {
  if (tasks.empty()) throw DomainError("equilibrium check needs at least one task");
  x.validate(tasks);

  std::vector<double> residual;
  residual.reserve(tasks.size());
  for (const auto& task : tasks) {
    residual.push_back(std::max(0.0, task.resource_cap - x.task_total(x.task_index(task.id))));
  }

  EquilibriumVerdict verdict;
  for (const auto& agent : agents) {
    const std::size_t ai = x.agent_index(agent.id);
    for (const auto& from : tasks) {
      const double held = x(ai, x.task_index(from.id));
      if (held <= 0.0) continue;
      const double current = compute_utility(agent, from, weights, held);
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& to = tasks[t];
        if (to.id == from.id) continue;
        const double moved = std::min(held, residual[t]);
        const double gain = compute_utility(agent, to, weights, moved) - current;
        if (gain > tol) verdict.deviations.push_back({agent.id, from.id, to.id, gain});
      }
    }
  }
  std::sort(verdict.deviations.begin(), verdict.deviations.end(),
            [](const Deviation& a, const Deviation& b) {
              if (a.agent != b.agent) return a.agent < b.agent;
              if (a.from != b.from) return a.from < b.from;
              return a.to < b.to;
            });
  verdict.equilibrium = verdict.deviations.empty();
  return verdict;
}

}  // namespace nodeop
