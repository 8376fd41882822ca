#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "nodeop/abm.hpp"

namespace nodeop {

struct SolverConfig {
  double learning_rate = 0.01;       // alpha
  double tolerance = 1e-6;           // epsilon
  std::size_t max_iterations = 100000;
  double dual_step = 0.05;           // eta, multiplier step

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

struct SolverState {
  AllocationVector x;
  std::vector<double> multipliers;  // one lambda per task, >= 0
  std::size_t iteration = 0;
  double last_step_norm = 0.0;
};

struct ConvergenceReport {
  bool converged = false;
  std::size_t iterations = 0;
  double final_step_norm = 0.0;
  // max over tasks of (sum_i x - R), clipped at zero.
  double constraint_violation = 0.0;
  std::vector<double> multipliers;
  double welfare = 0.0;

  bool operator==(const ConvergenceReport&) const = default;
};

struct AllocationResult {
  AllocationVector allocation;
  ConvergenceReport report;
};

// Sum of agent utilities over all (agent, task) entries.
double welfare(std::span<const OperatorState> agents, std::span<const TaskSpec> tasks,
               const ScenarioWeights& weights, const AllocationVector& x);

// Welfare plus sum_tau lambda_tau (R_tau - sum_i x_{i,tau}).
double lagrangian(std::span<const OperatorState> agents, std::span<const TaskSpec> tasks,
                  const ScenarioWeights& weights, const AllocationVector& x,
                  std::span<const double> multipliers);

// d L / d x_{i,tau} = (w1 c + w2 s) / (1 + x) - k - q - lambda_tau, laid out
// like AllocationVector::values().
std::vector<double> lagrangian_gradient(std::span<const OperatorState> agents,
                                        std::span<const TaskSpec> tasks,
                                        const ScenarioWeights& weights,
                                        const SolverState& state);

// Projected primal-dual ascent on the welfare:
//   x      <- max(0, x + alpha * grad_x L)
//   lambda <- max(0, lambda + eta * (sum_i x - R))
// Stops once ||x_{k+1} - x_k|| < epsilon and every cap is satisfied to
// within epsilon with complementary slackness (lambda > 0 only on binding
// caps).
AllocationResult solve_allocation(std::span<const OperatorState> agents,
                                  std::span<const TaskSpec> tasks,
                                  const ScenarioWeights& weights,
                                  const SolverConfig& config,
                                  const AllocationVector& initial);

// True iff the Euclidean norm of (next - prev) is strictly below eps.
bool check_convergence(const AllocationVector& prev, const AllocationVector& next, double eps);
bool check_convergence(std::span<const double> prev, std::span<const double> next, double eps);

// Dense square symmetric matrix, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  SquareMatrix(std::size_t n, std::vector<double> row_major);

  static SquareMatrix diagonal(std::span<const double> diag);

  std::size_t dim() const { return n_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  std::span<const double> data() const { return data_; }

  bool operator==(const SquareMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

enum class StabilityVerdict { kConcaveStable, kBoundary, kIndefinite };

std::string_view to_string(StabilityVerdict verdict);
StabilityVerdict stability_verdict_from_string(std::string_view text);

inline constexpr double kEigenTolerance = 1e-9;

struct StabilityReport {
  SquareMatrix hessian;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  StabilityVerdict verdict = StabilityVerdict::kBoundary;

  bool operator==(const StabilityReport&) const = default;
};

// boundary: whole spectrum within +-1e-9 of zero; concave-stable: max
// eigenvalue <= 1e-9; indefinite otherwise. Throws DomainError if the
// matrix is empty or asymmetric beyond 1e-9.
StabilityReport classify_hessian(SquareMatrix hessian);

// Hessian of the welfare objective at x; diagonal with entries
// -(w1 c + w2 s) / (1 + x)^2.
StabilityReport hessian_stability(std::span<const OperatorState> agents,
                                  std::span<const TaskSpec> tasks,
                                  const ScenarioWeights& weights, const AllocationVector& x);

}  // namespace nodeop
