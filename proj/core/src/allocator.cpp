#include "nodeop/allocator.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

#include "nodeop/errors.hpp"

namespace nodeop {
namespace {

// Agent/task order of x must match the spans passed alongside it.
void require_layout(std::span<const OperatorState> agents, std::span<const TaskSpec> tasks,
                    const AllocationVector& x) {
  if (x.agents().size() != agents.size() || x.tasks().size() != tasks.size()) {
    throw DomainError("allocation dimensions do not match agents x tasks");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (x.agents()[i] != agents[i].id) throw DomainError("allocation agent order mismatch");
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (x.tasks()[t] != tasks[t].id) throw DomainError("allocation task order mismatch");
  }
}

double marginal_gain(const OperatorState& agent, const TaskSpec& task,
                     const ScenarioWeights& weights) {
  return weights.w1 * task.consensus_gain_for(agent.id) +
         weights.w2 * task.performance_gain_for(agent.id);
}

double max_violation(std::span<const TaskSpec> tasks, const AllocationVector& x) {
  double worst = 0.0;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    worst = std::max(worst, x.task_total(t) - tasks[t].resource_cap);
  }
  return worst;
}

}  // namespace

void SolverConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(learning_rate)) throw DomainError("solver learning_rate must be finite and positive");
  if (!positive(tolerance)) throw DomainError("solver tolerance must be finite and positive");
  if (!positive(dual_step)) throw DomainError("solver dual_step must be finite and positive");
  if (max_iterations < 1) throw DomainError("solver max_iterations must be at least 1");
}

double welfare(std::span<const OperatorState> agents, std::span<const TaskSpec> tasks,
               const ScenarioWeights& weights, const AllocationVector& x) {
  require_layout(agents, tasks, x);
  double total = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      total += compute_utility(agents[i], tasks[t], weights, x(i, t));
    }
  }
  return total;
}

double lagrangian(std::span<const OperatorState> agents, std::span<const TaskSpec> tasks,
                  const ScenarioWeights& weights, const AllocationVector& x,
                  std::span<const double> multipliers) {
  if (multipliers.size() != tasks.size()) throw DomainError("one multiplier per task required");
  double value = welfare(agents, tasks, weights, x);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    value += multipliers[t] * (tasks[t].resource_cap - x.task_total(t));
  }
  return value;
}

std::vector<double> lagrangian_gradient(std::span<const OperatorState> agents,
                                        std::span<const TaskSpec> tasks,
                                        const ScenarioWeights& weights,
                                        const SolverState& state) {
  require_layout(agents, tasks, state.x);
  if (state.multipliers.size() != tasks.size()) {
    throw DomainError("one multiplier per task required");
  }
  std::vector<double> grad(state.x.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const double xi = state.x(i, t);
      if (!(xi >= 0.0) || !std::isfinite(xi)) throw DomainError("allocation must be finite and non-negative");
      grad[i * tasks.size() + t] = marginal_gain(agents[i], tasks[t], weights) / (1.0 + xi) -
                                   tasks[t].cost_rate - tasks[t].corruption_rate -
                                   state.multipliers[t];
    }
  }
  return grad;
}

AllocationResult solve_allocation(std::span<const OperatorState> agents,
                                  std::span<const TaskSpec> tasks,
                                  const ScenarioWeights& weights,
                                  const SolverConfig& config,
                                  const AllocationVector& initial) {
  config.validate();
  weights.validate();
  for (const auto& a : agents) a.validate();
  for (const auto& t : tasks) t.validate(agents);
  require_layout(agents, tasks, initial);
  initial.validate(tasks);

  SolverState state{initial, std::vector<double>(tasks.size(), 0.0), 0, 0.0};
  const double eps = config.tolerance;
  bool converged = false;

  while (state.iteration < config.max_iterations) {
    ++state.iteration;
    const std::vector<double> grad = lagrangian_gradient(agents, tasks, weights, state);

    double step_sq = 0.0;
    auto values = state.x.values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double next = std::max(0.0, values[k] + config.learning_rate * grad[k]);
      if (!std::isfinite(next)) throw SolverError("non-finite allocation", state.iteration);
      const double d = next - values[k];
      step_sq += d * d;
      values[k] = next;
    }
    state.last_step_norm = std::sqrt(step_sq);

    bool kkt_feasible = true;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const double slack = state.x.task_total(t) - tasks[t].resource_cap;
      state.multipliers[t] = std::max(0.0, state.multipliers[t] + config.dual_step * slack);
      if (slack > eps || (state.multipliers[t] > 0.0 && std::abs(slack) > eps)) {
        kkt_feasible = false;
      }
    }

    const double objective = welfare(agents, tasks, weights, state.x);
    if (!std::isfinite(objective)) throw SolverError("non-finite objective", state.iteration);

    if (state.last_step_norm < eps && kkt_feasible) {
      converged = true;
      break;
    }
  }

  ConvergenceReport report;
  report.converged = converged;
  report.iterations = state.iteration;
  report.final_step_norm = state.last_step_norm;
  report.constraint_violation = max_violation(tasks, state.x);
  report.multipliers = state.multipliers;
  report.welfare = welfare(agents, tasks, weights, state.x);
  return {std::move(state.x), std::move(report)};
}

bool check_convergence(std::span<const double> prev, std::span<const double> next, double eps) {
  if (prev.size() != next.size()) throw DomainError("convergence check on mismatched vectors");
  double sq = 0.0;
  for (std::size_t k = 0; k < prev.size(); ++k) {
    const double d = next[k] - prev[k];
    sq += d * d;
  }
  return std::sqrt(sq) < eps;
}

bool check_convergence(const AllocationVector& prev, const AllocationVector& next, double eps) {
  if (!prev.same_index_sets(next)) throw DomainError("convergence check on mismatched index sets");
  return check_convergence(prev.values(), next.values(), eps);
}

SquareMatrix::SquareMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), data_(std::move(row_major)) {
  if (data_.size() != n_ * n_) throw DomainError("matrix data does not match dimension");
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> diag) {
  SquareMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

std::string_view to_string(StabilityVerdict verdict) {
  switch (verdict) {
    case StabilityVerdict::kConcaveStable: return "concave-stable";
    case StabilityVerdict::kBoundary: return "boundary";
    case StabilityVerdict::kIndefinite: return "indefinite";
  }
  return "indefinite";
}

StabilityVerdict stability_verdict_from_string(std::string_view text) {
  if (text == "concave-stable") return StabilityVerdict::kConcaveStable;
  if (text == "boundary") return StabilityVerdict::kBoundary;
  if (text == "indefinite") return StabilityVerdict::kIndefinite;
  throw DomainError("unknown stability verdict '" + std::string(text) + "'");
}

StabilityReport classify_hessian(SquareMatrix hessian) {
  const std::size_t n = hessian.dim();
  if (n == 0) throw DomainError("empty Hessian");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (!std::isfinite(hessian(r, c))) throw DomainError("Hessian has non-finite entries");
      if (std::abs(hessian(r, c) - hessian(c, r)) > kEigenTolerance) {
        throw DomainError("Hessian is not symmetric");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = hessian(r, c);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending

  StabilityReport report;
  report.min_eigenvalue = ev(0);
  report.max_eigenvalue = ev(static_cast<Eigen::Index>(n) - 1);
  if (std::abs(report.min_eigenvalue) <= kEigenTolerance &&
      std::abs(report.max_eigenvalue) <= kEigenTolerance) {
    report.verdict = StabilityVerdict::kBoundary;
  } else if (report.max_eigenvalue <= kEigenTolerance) {
    report.verdict = StabilityVerdict::kConcaveStable;
  } else {
    report.verdict = StabilityVerdict::kIndefinite;
  }
  report.hessian = std::move(hessian);
  return report;
}

StabilityReport hessian_stability(std::span<const OperatorState> agents,
                                  std::span<const TaskSpec> tasks,
                                  const ScenarioWeights& weights, const AllocationVector& x) {
  require_layout(agents, tasks, x);
  x.validate(tasks);
  std::vector<double> diag(x.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const double denom = 1.0 + x(i, t);
      diag[i * tasks.size() + t] = -marginal_gain(agents[i], tasks[t], weights) / (denom * denom);
    }
  }
  return classify_hessian(SquareMatrix::diagonal(diag));
}

}  // namespace nodeop
