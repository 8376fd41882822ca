#include "nodeop/allocator.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "nodeop/errors.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace nodeop {
namespace {

using testing::make_agents;
using testing::single_task;

SolverState state_at(const std::vector<OperatorState>& agents, const std::vector<TaskSpec>& tasks,
                     double x, double lambda) {
  SolverState st;
  st.x = AllocationVector::zeros(agents, tasks);
  for (auto& v : st.x.values()) v = x;
  st.multipliers.assign(tasks.size(), lambda);
  return st;
}

TEST(LagrangianGradient, Examples) {
  auto agents = make_agents(1);
  std::vector<TaskSpec> tasks{single_task(agents, {1.0}, {1.0}, 0.0, 0.0, 10.0)};
  EXPECT_DOUBLE_EQ(lagrangian_gradient(agents, tasks, {}, state_at(agents, tasks, 0.0, 0.0))[0], 2.0);
  tasks[0].cost_rate = 0.5;
  EXPECT_NEAR(lagrangian_gradient(agents, tasks, {}, state_at(agents, tasks, 3.0, 0.0))[0], 0.0, 1e-15);
  tasks = {single_task(agents, {0.0}, {0.0}, 1.0, 0.0, 10.0)};
  for (double x : {0.0, 0.5, 7.0}) {
    EXPECT_DOUBLE_EQ(lagrangian_gradient(agents, tasks, {}, state_at(agents, tasks, x, 0.0))[0], -1.0);
  }
  tasks = {single_task(agents, {1.0}, {1.0}, 0.0, 0.0, 10.0)};
  EXPECT_DOUBLE_EQ(lagrangian_gradient(agents, tasks, {}, state_at(agents, tasks, 1.0, 0.25))[0], 0.75);
}

TEST(LagrangianGradient, MatchesFiniteDifferences) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto in = testing::random_instance(rng, 3, 2);
    SolverState st = state_at(in.agents, in.tasks, 0.0, 0.0);
    for (auto& v : st.x.values()) v = testing::uniform(rng, 0.0, 1.0);
    for (auto& l : st.multipliers) l = testing::uniform(rng, 0.0, 1.0);
    auto grad = lagrangian_gradient(in.agents, in.tasks, in.weights, st);
    auto f = [&](const std::vector<double>& v) {
      AllocationVector x = st.x;
      std::copy(v.begin(), v.end(), x.values().begin());
      return lagrangian(in.agents, in.tasks, in.weights, x, st.multipliers);
    };
    std::vector<double> v(st.x.values().begin(), st.x.values().end());
    for (std::size_t k = 0; k < v.size(); ++k) {
      EXPECT_NEAR(grad[k], oracles::central_difference(f, v, k), 1e-6);
    }
  }
}

TEST(Lagrangian, AddsMultiplierTerms) {
  auto agents = make_agents(2);
  std::vector<TaskSpec> tasks{single_task(agents, {1.0, 2.0}, {0.0, 0.0}, 0.0, 0.0, 3.0)};
  auto x = AllocationVector::zeros(agents, tasks);
  x(0, 0) = 1.0;
  x(1, 0) = 1.0;
  const double w = welfare(agents, tasks, {}, x);
  EXPECT_NEAR(w, 3.0 * std::log(2.0), 1e-12);
  const std::vector<double> lambda{0.5};
  EXPECT_NEAR(lagrangian(agents, tasks, {}, x, lambda), w + 0.5 * (3.0 - 2.0), 1e-12);
  EXPECT_THROW(lagrangian(agents, tasks, {}, x, std::vector<double>{}), DomainError);
}

TEST(SolveAllocation, InteriorOptimum) {
  auto agents = make_agents(1);
  std::vector<TaskSpec> tasks{single_task(agents, {1.0}, {1.0}, 0.5, 0.0, 10.0)};
  auto r = solve_allocation(agents, tasks, {}, {}, AllocationVector::zeros(agents, tasks));
  EXPECT_TRUE(r.report.converged);
  EXPECT_NEAR(r.allocation(0, 0), 3.0, 1e-3);
  EXPECT_NEAR(r.report.multipliers[0], 0.0, 1e-6);
}

TEST(SolveAllocation, SymmetricBindingCap) {
  auto agents = make_agents(2);
  std::vector<TaskSpec> tasks{single_task(agents, {1.0, 1.0}, {1.0, 1.0}, 0.0, 0.0, 2.0)};
  auto r = solve_allocation(agents, tasks, {}, {}, AllocationVector::zeros(agents, tasks));
  EXPECT_TRUE(r.report.converged);
  EXPECT_NEAR(r.allocation(0, 0), 1.0, 1e-3);
  EXPECT_NEAR(r.allocation(1, 0), 1.0, 1e-3);
  EXPECT_LE(r.allocation.task_total(0), 2.0 + 1e-6);
}

TEST(SolveAllocation, KktCase) {
  auto agents = make_agents(2);
  std::vector<TaskSpec> tasks{single_task(agents, {2.0, 1.0}, {0.0, 0.0}, 0.0, 0.0, 3.0)};
  auto r = solve_allocation(agents, tasks, {}, {}, AllocationVector::zeros(agents, tasks));
  EXPECT_TRUE(r.report.converged);
  EXPECT_NEAR(r.allocation(0, 0), 7.0 / 3.0, 1e-3);
  EXPECT_NEAR(r.allocation(1, 0), 2.0 / 3.0, 1e-3);
  // lambda* = 2 / (1 + 7/3) = 0.6
  EXPECT_NEAR(r.report.multipliers[0], 0.6, 1e-3);
}

TEST(SolveAllocation, ConvergedAllocationsAreFeasibleEquilibria) {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    auto in = testing::random_instance(rng, 3);
    auto r = solve_allocation(in.agents, in.tasks, in.weights, {}, AllocationVector::zeros(in.agents, in.tasks));
    ASSERT_TRUE(r.report.converged);
    for (double v : r.allocation.values()) EXPECT_GE(v, 0.0);
    EXPECT_LE(r.allocation.task_total(0), in.tasks[0].resource_cap + 1e-6);
    EXPECT_LE(r.report.constraint_violation, 1e-6);
    EXPECT_TRUE(check_equilibrium(in.agents, in.tasks, in.weights, r.allocation).equilibrium);
  }
}

TEST(SolveAllocation, PermutingAgentsPermutesSolution) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto in = testing::random_instance(rng, 3);
    if (in.agents.size() < 2) continue;
    auto r = solve_allocation(in.agents, in.tasks, in.weights, {}, AllocationVector::zeros(in.agents, in.tasks));
    std::vector<OperatorState> rev(in.agents.rbegin(), in.agents.rend());
    auto rr = solve_allocation(rev, in.tasks, in.weights, {}, AllocationVector::zeros(rev, in.tasks));
    for (const auto& a : in.agents) {
      EXPECT_NEAR(r.allocation.at(a.id, in.tasks[0].id), rr.allocation.at(a.id, in.tasks[0].id), 1e-4);
    }
  }
}

TEST(SolveAllocation, WelfareMonotoneWithFixedMultiplier) {
  auto agents = make_agents(3);
  std::vector<TaskSpec> tasks{single_task(agents, {2.0, 1.0, 1.5}, {0.5, 1.0, 0.2}, 0.1, 0.05, 2.0)};
  auto base = solve_allocation(agents, tasks, {}, {}, AllocationVector::zeros(agents, tasks));
  const std::vector<double> lambda = base.report.multipliers;
  SolverState st;
  st.x = AllocationVector::zeros(agents, tasks);
  st.multipliers = lambda;
  double prev = lagrangian(agents, tasks, {}, st.x, lambda);
  for (int it = 0; it < 2000; ++it) {
    auto g = lagrangian_gradient(agents, tasks, {}, st);
    for (std::size_t k = 0; k < g.size(); ++k) {
      st.x.values()[k] = std::max(0.0, st.x.values()[k] + 0.01 * g[k]);
    }
    const double now = lagrangian(agents, tasks, {}, st.x, lambda);
    EXPECT_GE(now, prev - 1e-12);
    prev = now;
  }
}

TEST(SolveAllocation, Errors) {
  auto agents = make_agents(1);
  std::vector<TaskSpec> tasks{single_task(agents, {1.0}, {1.0}, 0.0, 0.0, 1.0)};
  auto x = AllocationVector::zeros(agents, tasks);
  x(0, 0) = 2.0;
  EXPECT_THROW(solve_allocation(agents, tasks, {}, {}, x), DomainError);
  SolverConfig bad;
  bad.learning_rate = 0.0;
  EXPECT_THROW(solve_allocation(agents, tasks, {}, bad, AllocationVector::zeros(agents, tasks)), DomainError);
  bad = {};
  bad.max_iterations = 0;
  EXPECT_THROW(bad.validate(), DomainError);
  AllocationVector wrong(std::vector<OperatorId>{OperatorId("zed")}, std::vector<TaskId>{tasks[0].id});
  EXPECT_THROW(solve_allocation(agents, tasks, {}, {}, wrong), DomainError);
}

TEST(SolveAllocation, NonFiniteObjectiveIsSolverError) {
  auto agents = make_agents(1);
  std::vector<TaskSpec> tasks{single_task(agents, {1e308}, {1e308}, 0.0, 0.0, 1e308)};
  SolverConfig cfg;
  cfg.learning_rate = 1e10;
  try {
    solve_allocation(agents, tasks, {}, cfg, AllocationVector::zeros(agents, tasks));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_LE(e.iteration(), 1u);
  }
}

TEST(SolveAllocation, IterationBudget) {
  auto agents = make_agents(1);
  std::vector<TaskSpec> tasks{single_task(agents, {1.0}, {1.0}, 0.5, 0.0, 10.0)};
  SolverConfig cfg;
  cfg.max_iterations = 5;
  auto r = solve_allocation(agents, tasks, {}, cfg, AllocationVector::zeros(agents, tasks));
  EXPECT_FALSE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 5u);
}

TEST(CheckConvergence, Examples) {
  std::vector<double> a{1.0, 2.0};
  EXPECT_TRUE(check_convergence(a, a, 1e-12));
  std::vector<double> b{1.0 + 3e-7, 2.0 + 4e-7};
  EXPECT_TRUE(check_convergence(a, b, 1e-6));
  EXPECT_FALSE(check_convergence(a, b, 1e-7));
  EXPECT_THROW(check_convergence(a, std::vector<double>{1.0}, 1e-6), DomainError);

  auto agents = make_agents(2);
  std::vector<TaskSpec> tasks{single_task(agents, {1, 1}, {1, 1}, 0, 0, 1)};
  auto x = AllocationVector::zeros(agents, tasks);
  auto other = AllocationVector::zeros(make_agents(1), tasks);
  EXPECT_TRUE(check_convergence(x, x, 1e-6));
  EXPECT_THROW(check_convergence(x, other, 1e-6), DomainError);
}

TEST(ClassifyHessian, Examples) {
  auto r = classify_hessian(SquareMatrix::diagonal(std::vector<double>{-2.0, -1.0}));
  EXPECT_EQ(r.verdict, StabilityVerdict::kConcaveStable);
  EXPECT_NEAR(r.min_eigenvalue, -2.0, 1e-12);
  EXPECT_NEAR(r.max_eigenvalue, -1.0, 1e-12);

  EXPECT_EQ(classify_hessian(SquareMatrix(3)).verdict, StabilityVerdict::kBoundary);

  r = classify_hessian(SquareMatrix(2, {1.0, 2.0, 2.0, 1.0}));
  EXPECT_EQ(r.verdict, StabilityVerdict::kIndefinite);
  EXPECT_NEAR(r.min_eigenvalue, -1.0, 1e-9);
  EXPECT_NEAR(r.max_eigenvalue, 3.0, 1e-9);

  EXPECT_THROW(classify_hessian(SquareMatrix(2, {1.0, 2.0, 0.0, 1.0})), DomainError);
  EXPECT_THROW(classify_hessian(SquareMatrix()), DomainError);
  EXPECT_THROW(SquareMatrix(2, {1.0}), DomainError);
}

TEST(ClassifyHessian, RandomSymmetricMatchesClosedForm) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const double a = testing::uniform(rng, -3, 3), b = testing::uniform(rng, -3, 3),
                 d = testing::uniform(rng, -3, 3);
    auto r = classify_hessian(SquareMatrix(2, {a, b, b, d}));
    auto [lo, hi] = oracles::eig2(a, b, d);
    EXPECT_NEAR(r.min_eigenvalue, lo, 1e-9);
    EXPECT_NEAR(r.max_eigenvalue, hi, 1e-9);
    EXPECT_EQ(r.verdict, hi <= 1e-9 ? StabilityVerdict::kConcaveStable : StabilityVerdict::kIndefinite);
  }
}

TEST(HessianStability, DiagonalOfWelfare) {
  auto agents = make_agents(2);
  std::vector<TaskSpec> tasks{single_task(agents, {2.0, 1.0}, {0.0, 1.0}, 0.0, 0.0, 3.0)};
  auto x = AllocationVector::zeros(agents, tasks);
  x(0, 0) = 1.0;
  x(1, 0) = 0.0;
  auto r = hessian_stability(agents, tasks, {}, x);
  ASSERT_EQ(r.hessian.dim(), 2u);
  EXPECT_NEAR(r.hessian(0, 0), -0.5, 1e-15);
  EXPECT_NEAR(r.hessian(1, 1), -2.0, 1e-15);
  EXPECT_EQ(r.hessian(0, 1), 0.0);
  EXPECT_EQ(r.verdict, StabilityVerdict::kConcaveStable);

  auto zero_gains = single_task(agents, {0.0, 0.0}, {0.0, 0.0}, 1.0, 0.0, 3.0);
  std::vector<TaskSpec> flat{zero_gains};
  EXPECT_EQ(hessian_stability(agents, flat, {}, x).verdict, StabilityVerdict::kBoundary);

  AllocationVector wrong = AllocationVector::zeros(make_agents(1), tasks);
  EXPECT_THROW(hessian_stability(agents, tasks, {}, wrong), DomainError);
}

TEST(StabilityVerdict, RoundTrip) {
  for (auto v : {StabilityVerdict::kConcaveStable, StabilityVerdict::kBoundary, StabilityVerdict::kIndefinite}) {
    EXPECT_EQ(stability_verdict_from_string(to_string(v)), v);
  }
  EXPECT_THROW(stability_verdict_from_string("stable"), DomainError);
}

}  // namespace
}  // namespace nodeop
