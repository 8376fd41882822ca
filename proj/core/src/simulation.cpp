#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "nodeop/errors.hpp"
#include "nodeop/harness.hpp"
#include "nodeop/hash.hpp"
#include "nodeop/random.hpp"

namespace nodeop {
namespace {

const TaskId kPaymentTask("payment");

Batch make_batch(std::uint64_t height, std::size_t size) {
  Batch b;
  b.transactions.reserve(size);
  for (std::size_t k = 0; k < size; ++k) {
    b.transactions.push_back("h" + std::to_string(height) + "-tx" + std::to_string(k));
  }
  return b;
}

struct OperatorTally {
  std::size_t windows = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
};

class Simulation {
 public:
  explicit Simulation(const RunConfig& config)
      : config_(config), failure_rng_(fork_seed(config.seed, "failures", 0)) {
    for (const auto& op : config_.operators) {
      OperatorState s;
      s.id = op.id;
      s.stake = op.stake;
      s.trust = op.trust;
      s.capacity = op.capacity;
      s.resources = op.resources;
      states_.push_back(s);
      stakes_[op.id] = op.stake;
      initial_trust_[op.id] = op.trust;
      weights_[op.id] = op.trust;
      request_.gain_scale[op.id] = op.trust;
    }
    request_.warm_start = AllocationVector::zeros(states_, config_.tasks);
    report_.scenario = config_.scenario;
    report_.seed = config_.seed;
  }

  SimulationResult run() {
    for (std::size_t e = 0; e < config_.epochs; ++e) run_epoch(e);
    for (const auto& s : states_) {
      OperatorLedgerSummary& sum = report_.ledger.operators[s.id];
      sum.final_stake = stakes_.at(s.id);
      sum.final_trust = s.trust;
    }
    for (const auto& entry : report_.ledger_entries) {
      OperatorLedgerSummary& sum = report_.ledger.operators[entry.operator_id];
      switch (entry.kind) {
        case LedgerKind::kReward: sum.rewards += entry.amount; break;
        case LedgerKind::kFee: sum.fees += entry.amount; break;
        case LedgerKind::kSlash: sum.slashed += entry.amount; break;
      }
    }
    const std::string exported = export_trace(trace_);
    report_.trace_digest = to_hex(fnv1a(exported));
    report_.trace_events = trace_.size();
    return {std::move(report_), std::move(trace_)};
  }

 private:
  const OperatorConfig& op_config(const OperatorId& id) const {
    for (const auto& op : config_.operators) {
      if (op.id == id) return op;
    }
    throw DomainError("unknown operator '" + id.str() + "'");
  }

  std::vector<OperatorPriority> priorities() const {
    std::vector<OperatorPriority> out;
    for (const auto& s : states_) out.push_back({s.id, s.trust});
    return out;
  }

  std::vector<ValidatorDescriptor> validators() const {
    std::vector<ValidatorDescriptor> out;
    for (const auto& op : config_.operators) {
      // A fully slashed stake would be rejected; keep a vanishing weight.
      const double stake = std::max(stakes_.at(op.id), 1e-12);
      out.push_back({op.id, stake, op.behavior, op.region_latency});
    }
    return out;
  }

  void run_epoch(std::size_t epoch) {
    const Tick base = static_cast<Tick>(epoch) * config_.schedule.horizon;
    Tick tick = base;
    try {
      EpochReport er;
      er.epoch = epoch;

      const std::vector<TaskSpec> tasks = scale_gains(config_.tasks, request_);
      AllocationResult alloc =
          solve_allocation(states_, tasks, config_.weights, config_.solver, request_.warm_start);
      er.convergence = alloc.report;
      er.stability = hessian_stability(states_, tasks, config_.weights, alloc.allocation);

      Schedule schedule = assign_windows(priorities(), config_.schedule.horizon,
                                         config_.schedule.window_length,
                                         config_.schedule.grace_length, spill_);
      std::vector<SettlementEvent> events;
      std::map<OperatorId, OperatorTally> tally;
      std::map<OperatorId, std::vector<OutcomeRecord>> outcomes;

      for (std::size_t pos = 0; pos < schedule.windows.size(); ++pos) {
        const SubmissionWindow window = schedule.windows[pos];
        tick = base + window.start_tick;
        const OperatorConfig& occupant = op_config(window.operator_id);
        const double trust = state(window.operator_id).trust;
        const double u = failure_rng_.uniform();
        const bool failed = occupant.behavior != Behavior::kHonest ||
                            u < failure_probability(trust, config_.incentives.failure_kappa);

        const std::vector<ValidatorDescriptor> vals = validators();
        NetworkModel net = config_.network;
        net.rng_seed = fork_seed(config_.seed, "network", height_);
        ConsensusParams params;
        params.max_rounds = config_.consensus.max_rounds;
        params.base_timeout = config_.consensus.base_timeout;
        params.height = height_;
        params.start_tick = tick;
        RoundOutcome outcome =
            run_height(vals, make_batch(height_, config_.consensus.batch_size), net, params);
        ++height_;
        ++er.heights;
        trace_.insert(trace_.end(), outcome.trace.begin(), outcome.trace.end());

        std::set<OperatorId> offenders;
        for (const auto& f : outcome.faults) {
          if (offenders.insert(f.offender).second) {
            events.push_back({f.offender, f.tick, EventKind::kConsensusFault, std::nullopt, 0.0});
          }
        }

        const Tick end_tick = base + window.end_tick;
        OperatorTally& t = tally[window.operator_id];
        ++t.windows;
        if (outcome.committed) {
          ++er.commits;
          er.signer_counts.push_back(outcome.signature ? outcome.signature->signer_set.size() : 0);
        } else {
          er.signer_counts.push_back(0);
        }
        if (outcome.committed && !failed) {
          ++t.successes;
          events.push_back({window.operator_id, end_tick, EventKind::kSubmitSuccess, std::nullopt, 0.0});
          outcomes[window.operator_id].push_back({true, 1.0, end_tick});
          continue;
        }

        ++t.failures;
        ++er.misses;
        events.push_back({window.operator_id, end_tick, EventKind::kMiss, std::nullopt, 0.0});
        outcomes[window.operator_id].push_back({false, 0.0, end_tick});
        FallbackDecision decision = on_window_miss(schedule, window, priorities());
        if (decision.fallback) {
          apply_fallback(schedule, *decision.fallback);
          ++er.fallbacks;
        } else {
          ++er.unrecoverable;
        }
      }
      tick = base + config_.schedule.horizon;
      spill_ = schedule.spill_ticks;
      er.windows = schedule.windows;

      // Task rewards go to operators that were allocated work and delivered.
      std::map<TaskId, double> task_values;
      std::map<OperatorId, double> performance;
      for (std::size_t j = 0; j < tasks.size(); ++j) task_values[tasks[j].id] = tasks[j].value;
      for (std::size_t i = 0; i < states_.size(); ++i) {
        const OperatorTally& t = tally[states_[i].id];
        const double ratio = t.windows == 0 ? 1.0
                                            : static_cast<double>(t.successes) /
                                                  static_cast<double>(t.windows);
        performance[states_[i].id] = ratio;
        if (t.successes == 0 && t.windows > 0) continue;
        for (std::size_t j = 0; j < tasks.size(); ++j) {
          const double x = alloc.allocation(i, j);
          if (x <= 0.0) continue;
          const Scores s = evaluate_scores(states_[i], tasks[j], x);
          events.push_back({states_[i].id, tick, EventKind::kTaskComplete, tasks[j].id,
                            ratio * (config_.weights.w1 * s.consensus + config_.weights.w2 * s.performance)});
        }
      }
      std::stable_sort(events.begin(), events.end(),
                       [](const SettlementEvent& a, const SettlementEvent& b) { return a.tick < b.tick; });
      Settlement settlement = settle(events, stakes_, task_values, config_.incentives.reputation);
      stakes_ = settlement.stakes;
      report_.ledger.total_disbursed += settlement.total_disbursed;
      report_.ledger.total_slashed += settlement.total_slashed;
      report_.ledger_entries.insert(report_.ledger_entries.end(), settlement.entries.begin(),
                                    settlement.entries.end());

      for (auto& s : states_) {
        auto& rec = outcomes[s.id];
        s.reputation_history.insert(s.reputation_history.end(), rec.begin(), rec.end());
        s.stake = stakes_.at(s.id);
      }
      const auto trust = update_reputation(states_, initial_trust_, config_.incentives.reputation);
      for (auto& s : states_) s.trust = trust.at(s.id);

      std::map<OperatorId, double> output;
      for (const auto& s : states_) {
        output[s.id] = static_cast<double>(tally[s.id].successes * config_.consensus.batch_size);
      }
      if (config_.scenario == ScenarioKind::kSequencer) {
        er.sequencer = sequencer_epoch(tasks, alloc.allocation, tally, output);
      } else {
        payment_epoch(er, performance);
      }
      try {
        er.aggregation = make_aggregation_report(tick, output, weights_);
      } catch (const DomainError&) {
        er.aggregation.reset();
      }

      MetricsSnapshot snapshot{trust, performance};
      FeedbackResult fb = feedback_iterate(snapshot, weights_, alloc.allocation);
      weights_ = fb.weights;
      request_ = fb.request;

      for (const auto& s : states_) {
        er.stakes[s.id] = stakes_.at(s.id);
        er.trust[s.id] = s.trust;
      }
      er.failures = failures_;
      report_.epochs.push_back(std::move(er));
    } catch (const SimulationError&) {
      throw;
    } catch (const DomainError& e) {
      throw SimulationError(e.what(), epoch, tick);
    } catch (const SolverError& e) {
      throw SimulationError(e.what(), epoch, tick);
    }
  }

  OperatorState& state(const OperatorId& id) {
    for (auto& s : states_) {
      if (s.id == id) return s;
    }
    throw DomainError("unknown operator '" + id.str() + "'");
  }

  // Nodes holding no allocation have an undefined validation time and are
  // left out of the sequencer log.
  std::optional<SequencerMetrics> sequencer_epoch(const std::vector<TaskSpec>& tasks,
                                                  const AllocationVector& x,
                                                  std::map<OperatorId, OperatorTally>& tally,
                                                  const std::map<OperatorId, double>& output) {
    SequencerRunLog log;
    failures_ = 0;
    for (std::size_t i = 0; i < states_.size(); ++i) {
      SequencerNodeLog node;
      node.id = states_[i].id;
      node.output = output.at(node.id);
      node.resources = states_[i].resources;
      for (std::size_t j = 0; j < tasks.size(); ++j) {
        const Scores s = evaluate_scores(states_[i], tasks[j], x(i, j));
        node.consensus_score += s.consensus;
        node.performance_score += s.performance;
        node.cost += (tasks[j].cost_rate + tasks[j].corruption_rate) * x(i, j);
      }
      if (!(node.consensus_score + node.performance_score > 0.0)) continue;
      if (tally[node.id].failures > 0) ++log.failures;
      log.nodes.push_back(node);
    }
    failures_ = log.failures;
    double resources = 0.0;
    for (const auto& n : log.nodes) resources += n.resources;
    if (log.nodes.empty() || !(resources > 0.0)) return std::nullopt;
    return sequencer_metrics(log);
  }

  void payment_epoch(EpochReport& er, const std::map<OperatorId, double>& performance) {
    std::vector<OperatorId> ids;
    std::vector<const OperatorConfig*> ops;
    for (const auto& op : config_.operators) {
      if (op.payment) {
        ids.push_back(op.id);
        ops.push_back(&op);
      }
    }
    PaymentTickLog tick_log;
    AllocationVector throughput(ids, {kPaymentTask});
    failures_ = 0;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const OperatorConfig& op = *ops[k];
      PaymentNodeParams p = apply_stages(op.payment->params, op.payment->stages);
      p.capacity = op.capacity;
      const double ratio = performance.at(op.id);
      if (ratio < 1.0) ++failures_;
      const double T = optimize_throughput(p) * ratio;
      throughput(k, 0) = T;
      PaymentNodeLog node;
      node.id = op.id;
      node.transactions = T;
      node.validation_cost = payment_validation_cost(p, T);
      node.errors = payment_expected_errors(p, T);
      node.penalty = payment_penalty(p, T);
      node.profit = payment_utility(p, T);
      tick_log.push_back(node);
    }
    payment_history_.push_back(std::move(tick_log));
    throughput_history_.push_back(throughput);
    er.payment = payment_metrics(payment_history_);

    const std::size_t n = throughput_history_.size();
    std::vector<AllocationVector> last;
    if (n >= 2) {
      last = {throughput_history_[n - 2], throughput_history_[n - 1]};
    } else {
      last = {throughput_history_[0], throughput_history_[0]};
    }
    for (std::size_t k = 0; k < ops.size(); ++k) {
      PaymentNodeParams p = apply_stages(ops[k]->payment->params, ops[k]->payment->stages);
      p.capacity = ops[k]->capacity;
      PaymentConvergence c =
          payment_convergence_check(last, config_.solver.tolerance, p, ops[k]->payment->fee_fixed);
      if (n >= 2 && k == 0) er.payment_converged = c.converged;
      er.payment_stability.push_back(std::move(c.stability));
    }
  }

  const RunConfig& config_;
  Rng failure_rng_;
  std::vector<OperatorState> states_;
  std::map<OperatorId, double> stakes_;
  std::map<OperatorId, double> initial_trust_;
  std::map<OperatorId, double> weights_;
  ResolveRequest request_;
  std::vector<PaymentTickLog> payment_history_;
  std::vector<AllocationVector> throughput_history_;
  std::size_t failures_ = 0;
  Tick spill_ = 0;
  std::uint64_t height_ = 0;
  std::vector<TraceEvent> trace_;
  RunReport report_;
};

}  // namespace

SimulationResult simulate(const RunConfig& config) { return Simulation(config).run(); }

RunReport run_simulation(const RunConfig& config) { return simulate(config).report; }

}  // namespace nodeop
