#include "nodeop/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nodeop/errors.hpp"

#ifndef NODEOP_TEST_DATA
#define NODEOP_TEST_DATA "tests/data"
#endif

namespace nodeop {
namespace {

std::string data_path(const std::string& name) { return std::string(NODEOP_TEST_DATA) + "/" + name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("nodeop_" + name);
}

ConfigError::Kind config_error_kind(const std::string& text, std::string* field = nullptr) {
  try {
    load_config(text);
  } catch (const ConfigError& e) {
    if (field) *field = e.field();
    return e.kind();
  }
  ADD_FAILURE() << "expected ConfigError";
  return ConfigError::Kind::kParse;
}

TEST(LoadConfig, MinimalFillsDefaults) {
  RunConfig c = load_config_file(data_path("minimal.json"));
  EXPECT_EQ(c.scenario, ScenarioKind::kSequencer);
  EXPECT_EQ(c.epochs, 1u);
  EXPECT_EQ(c.seed, 0u);
  EXPECT_EQ(c.solver.learning_rate, 0.01);
  EXPECT_EQ(c.solver.tolerance, 1e-6);
  EXPECT_EQ(c.solver.max_iterations, 100000u);
  EXPECT_EQ(c.weights.w1, 1.0);
  EXPECT_EQ(c.weights.w2, 1.0);
  EXPECT_EQ(c.schedule.grace_length, c.schedule.window_length / 2);
  EXPECT_EQ(c.incentives.reputation.slash_fraction, 0.05);
  EXPECT_EQ(c.incentives.failure_kappa, 0.05);
  ASSERT_EQ(c.operators.size(), 1u);
  EXPECT_EQ(c.operators[0].trust, 0.5);
  EXPECT_EQ(c.operators[0].behavior, Behavior::kHonest);
}

TEST(LoadConfig, ZeroWeightsNamed) {
  std::string field;
  const std::string text = R"({"weights": {"w1": 0, "w2": 0},
    "operators": [{"id": "a"}],
    "tasks": [{"id": "t", "consensus_gain": {"a": 1}, "performance_gain": {"a": 1}}]})";
  EXPECT_EQ(config_error_kind(text, &field), ConfigError::Kind::kSemantic);
  EXPECT_EQ(field, "weights");
}

TEST(LoadConfig, DuplicateOperator) {
  std::string field;
  const std::string text = R"({"operators": [{"id": "a"}, {"id": "a"}],
    "tasks": [{"id": "t", "consensus_gain": {"a": 1}, "performance_gain": {"a": 1}}]})";
  EXPECT_EQ(config_error_kind(text, &field), ConfigError::Kind::kSemantic);
  EXPECT_EQ(field, "operators[1].id");
}

TEST(LoadConfig, UnknownFieldsAtAnyDepth) {
  std::string field;
  EXPECT_EQ(config_error_kind(R"({"operators": [{"id": "a"}], "tasks": [], "colour": 1})", &field),
            ConfigError::Kind::kUnknownField);
  EXPECT_EQ(field, "colour");
  const std::string nested = R"({"solver": {"learning_rate": 0.1, "momentum": 0.9},
    "operators": [{"id": "a"}],
    "tasks": [{"id": "t", "consensus_gain": {"a": 1}, "performance_gain": {"a": 1}}]})";
  EXPECT_EQ(config_error_kind(nested, &field), ConfigError::Kind::kUnknownField);
  EXPECT_EQ(field, "solver.momentum");
  const std::string op = R"({"operators": [{"id": "a", "nick": "x"}],
    "tasks": [{"id": "t", "consensus_gain": {"a": 1}, "performance_gain": {"a": 1}}]})";
  EXPECT_EQ(config_error_kind(op, &field), ConfigError::Kind::kUnknownField);
  EXPECT_EQ(field, "operators[0].nick");
}

TEST(LoadConfig, ParseErrorPosition) {
  try {
    load_config("{\n  \"epochs\": 2,\n  \"seed\": ]\n}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), ConfigError::Kind::kParse);
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 11u);
  }
}

TEST(LoadConfig, SemanticErrors) {
  const std::string gains = R"("consensus_gain": {"a": 1}, "performance_gain": {"a": 1})";
  auto with = [&](const std::string& extra, const std::string& task_extra = "") {
    return R"({"operators": [{"id": "a"}], )" + extra + R"("tasks": [{"id": "t", )" + task_extra + gains + "}]}";
  };
  std::string field;
  EXPECT_EQ(config_error_kind(with(R"("scenario": "rollup", )"), &field), ConfigError::Kind::kSemantic);
  EXPECT_EQ(field, "scenario");
  config_error_kind(with(R"("solver": {"learning_rate": -1}, )"), &field);
  EXPECT_EQ(field, "solver");
  config_error_kind(with(R"("network": {"drop_probability": 1.0}, )"), &field);
  EXPECT_EQ(field, "network.drop_probability");
  config_error_kind(with(R"("schedule": {"window_length": 10, "grace_length": 10}, )"), &field);
  EXPECT_EQ(field, "schedule.grace_length");
  config_error_kind(with(R"("consensus": {"max_rounds": 0}, )"), &field);
  EXPECT_EQ(field, "consensus.max_rounds");
  config_error_kind(with("", R"("cost_rate": -1, )"), &field);
  EXPECT_EQ(field, "tasks[0].cost_rate");
  config_error_kind(with(R"("epochs": -3, )"), &field);
  EXPECT_EQ(field, "epochs");
  config_error_kind(R"({"operators": [{"id": "a"}, {"id": "b"}],
    "tasks": [{"id": "t", "consensus_gain": {"a": 1}, "performance_gain": {"a": 1, "b": 1}}]})", &field);
  EXPECT_EQ(field, "tasks[0].consensus_gain");
  config_error_kind(R"({"operators": [{"id": "a"}],
    "tasks": [{"id": "t", "consensus_gain": {"a": 1, "z": 1}, "performance_gain": {"a": 1}}]})", &field);
  EXPECT_EQ(field, "tasks[0].consensus_gain.z");
  config_error_kind(with(R"("scenario": "payment", )"), &field);
  EXPECT_EQ(field, "operators");
  config_error_kind(R"({"operators": [{"id": "a", "behavior": "lazy"}], "tasks": []})", &field);
  EXPECT_EQ(field, "operators[0].behavior");
  config_error_kind(R"({"operators": [], "tasks": []})", &field);
  EXPECT_EQ(field, "operators");
}

TEST(LoadConfig, MissingFile) {
  EXPECT_THROW(load_config_file("/nonexistent/config.json"), ConfigError);
}

TEST(WriteConfig, RoundTrip) {
  for (const char* name : {"minimal.json", "sequencer_honest.json", "payment.json"}) {
    const RunConfig c = load_config_file(data_path(name));
    const RunConfig again = load_config(write_config(c));
    EXPECT_EQ(again, c) << name;
    EXPECT_EQ(write_config(again), write_config(c)) << name;
  }
}

TEST(RunSimulation, DeterministicReports) {
  RunConfig c = load_config_file(data_path("payment.json"));
  const std::string a = render_report(run_simulation(c), ReportFormat::kJson);
  const std::string b = render_report(run_simulation(c), ReportFormat::kJson);
  EXPECT_EQ(a, b);
  c.seed += 1;
  EXPECT_NE(run_simulation(c).trace_digest, parse_report(a).trace_digest);
}

TEST(RunSimulation, AllHonestFourValidatorsKeepFullFaultTolerance) {
  const RunConfig c = load_config_file(data_path("sequencer_honest.json"));
  const RunReport r = run_simulation(c);
  ASSERT_EQ(r.epochs.size(), c.epochs);
  for (const auto& e : r.epochs) {
    ASSERT_TRUE(e.sequencer.has_value());
    EXPECT_EQ(e.sequencer->fault_tolerance, 1.0);
    EXPECT_EQ(e.misses, 0u);
    for (auto n : e.signer_counts) EXPECT_EQ(n, 4u);
  }
  EXPECT_EQ(r.ledger.total_slashed, 0.0);
}

TEST(RunSimulation, AllSuccessMonotone) {
  const RunConfig c = load_config_file(data_path("sequencer_honest.json"));
  const RunReport r = run_simulation(c);
  std::map<OperatorId, double> trust, stake;
  for (const auto& op : c.operators) {
    trust[op.id] = op.trust;
    stake[op.id] = op.stake;
  }
  for (const auto& e : r.epochs) {
    for (const auto& [id, t] : e.trust) {
      EXPECT_GE(t, trust[id]);
      trust[id] = t;
    }
    for (const auto& [id, s] : e.stakes) {
      EXPECT_GE(s, stake[id]);
      stake[id] = s;
    }
  }
}

TEST(RunSimulation, SilentValidatorDropsSignerAndIsSlashed) {
  RunConfig c = load_config_file(data_path("sequencer_honest.json"));
  const RunReport honest = run_simulation(c);
  c.operators[3].behavior = Behavior::kSilent;
  const RunReport r = run_simulation(c);
  const OperatorId silent = c.operators[3].id;
  for (std::size_t e = 0; e < r.epochs.size(); ++e) {
    for (std::size_t h = 0; h < r.epochs[e].signer_counts.size(); ++h) {
      if (r.epochs[e].signer_counts[h] == 0) continue;
      EXPECT_EQ(r.epochs[e].signer_counts[h], 3u);
    }
    EXPECT_LT(r.epochs[e].sequencer->fault_tolerance, 1.0);
  }
  EXPECT_EQ(honest.epochs[0].signer_counts[0], 4u);
  bool slashed = false;
  for (const auto& entry : r.ledger_entries) {
    slashed |= entry.operator_id == silent && entry.kind == LedgerKind::kSlash;
  }
  EXPECT_TRUE(slashed);
  EXPECT_GT(r.ledger.operators.at(silent).slashed, 0.0);
  EXPECT_GT(r.epochs[0].fallbacks, 0u);
}

TEST(RunSimulation, PaymentScenario) {
  const RunConfig c = load_config_file(data_path("payment.json"));
  const RunReport r = run_simulation(c);
  ASSERT_EQ(r.epochs.size(), 4u);
  for (const auto& e : r.epochs) {
    ASSERT_TRUE(e.payment.has_value());
    EXPECT_FALSE(e.sequencer.has_value());
    EXPECT_GT(e.payment->total_transactions, 0.0);
    ASSERT_EQ(e.payment_stability.size(), 3u);
    EXPECT_EQ(e.payment_stability[0].verdict, StabilityVerdict::kIndefinite);
    EXPECT_EQ(e.payment_stability[2].hessian.dim(), 1u);
  }
  EXPECT_FALSE(r.epochs[0].payment_converged.has_value());
  EXPECT_TRUE(r.epochs[1].payment_converged.has_value());
}

TEST(RunSimulation, ZeroEpochs) {
  RunConfig c = load_config_file(data_path("minimal.json"));
  c.epochs = 0;
  const RunReport r = run_simulation(c);
  EXPECT_TRUE(r.epochs.empty());
  EXPECT_EQ(r.trace_events, 0u);
  EXPECT_EQ(render_report(r, ReportFormat::kCsv), "epoch,metric,value\n");
  EXPECT_EQ(parse_report(render_report(r, ReportFormat::kJson)), r);
}

TEST(RunSimulation, ModuleErrorsCarryEpoch) {
  RunConfig c = load_config_file(data_path("minimal.json"));
  c.solver.learning_rate = 1e300;
  c.tasks[0].consensus_gain.begin()->second = 1e308;
  c.tasks[0].resource_cap = 1e308;
  EXPECT_THROW(run_simulation(c), SimulationError);
}

TEST(Report, JsonRoundTrip) {
  for (const char* name : {"sequencer_honest.json", "payment.json"}) {
    const RunReport r = run_simulation(load_config_file(data_path(name)));
    const auto path = temp_file(std::string(name) + ".report.json");
    write_report(r, ReportFormat::kJson, path);
    EXPECT_EQ(read_report(path), r) << name;
    std::filesystem::remove(path);
  }
}

TEST(Report, CsvShape) {
  const RunReport r = run_simulation(load_config_file(data_path("payment.json")));
  const std::string csv = render_report(r, ReportFormat::kCsv);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, r.epochs.size() * csv_metric_names(r.scenario).size() + 1);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,metric,value");
  // Growth is undefined in the first epoch.
  EXPECT_NE(csv.find("0,revenue_growth,\n"), std::string::npos);
}

TEST(Report, CsvSeventeenDigits) {
  RunReport r;
  EpochReport e;
  e.sequencer = SequencerMetrics{0.1, 1.0 / 3.0, 1.0, 2.0};
  r.epochs.push_back(e);
  const std::string csv = render_report(r, ReportFormat::kCsv);
  EXPECT_NE(csv.find("0,throughput,0.10000000000000001\n"), std::string::npos);
  EXPECT_NE(csv.find("0,latency,0.33333333333333331\n"), std::string::npos);
}

TEST(Report, UnwritableDestination) {
  EXPECT_THROW(write_report(RunReport{}, ReportFormat::kJson, "/nonexistent/dir/report.json"), IoError);
  EXPECT_THROW(read_report("/nonexistent/report.json"), IoError);
  EXPECT_THROW(parse_report("{\"scenario\": 1}"), IoError);
}

TEST(Report, FormatFromString) {
  EXPECT_EQ(report_format_from_string("csv"), ReportFormat::kCsv);
  EXPECT_THROW(report_format_from_string("xml"), DomainError);
}

TEST(Report, SummaryAndLedgerExport) {
  RunConfig c = load_config_file(data_path("sequencer_honest.json"));
  c.operators[1].behavior = Behavior::kSilent;
  const RunReport r = run_simulation(c);
  const std::string summary = format_report_summary(r);
  EXPECT_NE(summary.find("throughput"), std::string::npos);
  EXPECT_NE(summary.find(r.trace_digest), std::string::npos);
  const std::string ledger = export_ledger(r.ledger_entries);
  std::size_t lines = 0;
  for (char ch : ledger) lines += ch == '\n';
  EXPECT_EQ(lines, r.ledger_entries.size());
  EXPECT_NE(ledger.find("bob\t"), std::string::npos);
  EXPECT_NE(ledger.find("\tslash\t"), std::string::npos);
}

TEST(Simulate, TraceMatchesDigest) {
  const SimulationResult s = simulate(load_config_file(data_path("sequencer_honest.json")));
  EXPECT_EQ(s.trace.size(), s.report.trace_events);
  EXPECT_FALSE(s.trace.empty());
  EXPECT_EQ(s.report.trace_digest.size(), 16u);
}

}  // namespace
}  // namespace nodeop
