#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nodeop/abm.hpp"
#include "nodeop/allocator.hpp"
#include "nodeop/consensus.hpp"
#include "nodeop/incentives.hpp"
#include "nodeop/scenarios.hpp"
#include "nodeop/scheduler.hpp"

namespace nodeop {

struct PaymentConfig {
  // capacity is taken from the operator's capacity.
  PaymentNodeParams params;
  std::vector<ValidationStage> stages;
  bool fee_fixed = false;

  bool operator==(const PaymentConfig&) const = default;
};

struct OperatorConfig {
  OperatorId id;
  double stake = 100.0;
  Behavior behavior = Behavior::kHonest;
  Tick region_latency = 1;
  double capacity = 1000.0;
  double resources = 1.0;
  double trust = 0.5;  // initial trust
  std::optional<PaymentConfig> payment;

  bool operator==(const OperatorConfig&) const = default;
};

struct ScheduleConfig {
  Tick horizon = 40;
  Tick window_length = 10;
  Tick grace_length = 5;

  bool operator==(const ScheduleConfig&) const = default;
};

struct ConsensusConfig {
  std::uint32_t max_rounds = 10;
  Tick base_timeout = 4;
  std::size_t batch_size = 16;

  bool operator==(const ConsensusConfig&) const = default;
};

struct IncentiveConfig {
  ReputationParams reputation;
  double failure_kappa = kDefaultFailureKappa;

  bool operator==(const IncentiveConfig&) const = default;
};

struct RunConfig {
  ScenarioKind scenario = ScenarioKind::kSequencer;
  std::vector<OperatorConfig> operators;
  std::vector<TaskSpec> tasks;
  ScenarioWeights weights;
  SolverConfig solver;
  NetworkModel network;  // rng_seed is derived from `seed` per height
  ScheduleConfig schedule;
  ConsensusConfig consensus;
  IncentiveConfig incentives;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;
};

// Parses and fully validates a JSON run configuration. Every default is
// materialized in the returned value. Throws ConfigError.
RunConfig load_config(std::string_view text);
RunConfig load_config_file(const std::filesystem::path& path);

// Canonical JSON with every field explicit.
std::string write_config(const RunConfig& config);

struct EpochReport {
  std::size_t epoch = 0;
  std::optional<SequencerMetrics> sequencer;
  std::optional<PaymentMetrics> payment;
  ConvergenceReport convergence;
  StabilityReport stability;
  std::optional<AggregationReport> aggregation;
  std::optional<bool> payment_converged;
  std::vector<StabilityReport> payment_stability;  // payment operators, config order
  std::vector<SubmissionWindow> windows;
  std::size_t heights = 0;
  std::size_t commits = 0;
  std::size_t misses = 0;
  std::size_t fallbacks = 0;
  std::size_t unrecoverable = 0;
  std::size_t failures = 0;
  std::vector<std::size_t> signer_counts;  // per height, 0 when not committed
  std::map<OperatorId, double> stakes;     // end of epoch
  std::map<OperatorId, double> trust;      // end of epoch

  bool operator==(const EpochReport&) const = default;
};

struct OperatorLedgerSummary {
  double rewards = 0.0;
  double fees = 0.0;
  double slashed = 0.0;
  double final_stake = 0.0;
  double final_trust = 0.0;

  bool operator==(const OperatorLedgerSummary&) const = default;
};

struct LedgerSummary {
  std::map<OperatorId, OperatorLedgerSummary> operators;
  double total_disbursed = 0.0;
  double total_slashed = 0.0;

  bool operator==(const LedgerSummary&) const = default;
};

struct RunReport {
  ScenarioKind scenario = ScenarioKind::kSequencer;
  std::uint64_t seed = 0;
  std::vector<EpochReport> epochs;
  LedgerSummary ledger;
  std::vector<LedgerEntry> ledger_entries;
  std::string trace_digest;  // FNV-1a over the exported event trace
  std::size_t trace_events = 0;

  bool operator==(const RunReport&) const = default;
};

struct SimulationResult {
  RunReport report;
  std::vector<TraceEvent> trace;
};

// Per epoch: allocate, schedule, run one consensus height per window, settle,
// update reputation, apply feedback, compute metrics. Deterministic in
// (config, seed). Module errors surface as SimulationError.
SimulationResult simulate(const RunConfig& config);
RunReport run_simulation(const RunConfig& config);

enum class ReportFormat { kJson, kCsv };

ReportFormat report_format_from_string(std::string_view text);

// Metric names emitted per epoch in CSV output, in order.
std::vector<std::string> csv_metric_names(ScenarioKind scenario);

std::string render_report(const RunReport& report, ReportFormat format);
void write_report(const RunReport& report, ReportFormat format,
                  const std::filesystem::path& destination);

// Reads a JSON report produced by render_report.
RunReport parse_report(std::string_view json);
RunReport read_report(const std::filesystem::path& path);

// Human-readable table of the per-epoch metrics.
std::string format_report_summary(const RunReport& report);

// Ordered ledger records: operator, tick, kind, amount, reason.
std::string export_ledger(std::span<const LedgerEntry> entries);

}  // namespace nodeop
