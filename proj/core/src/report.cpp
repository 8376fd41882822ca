#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nodeop/errors.hpp"
#include "nodeop/harness.hpp"

namespace nodeop {
namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> get_opt(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

json to_json(const StabilityReport& s) {
  return {{"dim", s.hessian.dim()},
          {"hessian", std::vector<double>(s.hessian.data().begin(), s.hessian.data().end())},
          {"min_eigenvalue", s.min_eigenvalue},
          {"max_eigenvalue", s.max_eigenvalue},
          {"verdict", std::string(to_string(s.verdict))}};
}

StabilityReport stability_from_json(const json& j) {
  StabilityReport s;
  s.hessian = SquareMatrix(j.at("dim").get<std::size_t>(), j.at("hessian").get<std::vector<double>>());
  s.min_eigenvalue = j.at("min_eigenvalue").get<double>();
  s.max_eigenvalue = j.at("max_eigenvalue").get<double>();
  s.verdict = stability_verdict_from_string(j.at("verdict").get<std::string>());
  return s;
}

json id_map(const std::map<OperatorId, double>& m) {
  json out = json::object();
  for (const auto& [id, v] : m) out[id.str()] = v;
  return out;
}

std::map<OperatorId, double> id_map_from(const json& j) {
  std::map<OperatorId, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[OperatorId(it.key())] = it->get<double>();
  return out;
}

json to_json(const EpochReport& e) {
  json j;
  j["epoch"] = e.epoch;
  if (e.sequencer) {
    j["sequencer"] = {{"throughput", e.sequencer->throughput},
                      {"latency", e.sequencer->latency},
                      {"fault_tolerance", e.sequencer->fault_tolerance},
                      {"resource_efficiency", e.sequencer->resource_efficiency}};
  } else {
    j["sequencer"] = nullptr;
  }
  if (e.payment) {
    j["payment"] = {{"total_transactions", e.payment->total_transactions},
                    {"validation_efficiency", opt(e.payment->validation_efficiency)},
                    {"error_rate", opt(e.payment->error_rate)},
                    {"revenue_growth", opt(e.payment->revenue_growth)},
                    {"total_penalties", e.payment->total_penalties}};
  } else {
    j["payment"] = nullptr;
  }
  j["convergence"] = {{"converged", e.convergence.converged},
                      {"iterations", e.convergence.iterations},
                      {"final_step_norm", e.convergence.final_step_norm},
                      {"constraint_violation", e.convergence.constraint_violation},
                      {"multipliers", e.convergence.multipliers},
                      {"welfare", e.convergence.welfare}};
  j["stability"] = to_json(e.stability);
  if (e.aggregation) {
    json ops = json::array();
    for (const auto& id : e.aggregation->operators) ops.push_back(id.str());
    j["aggregation"] = {{"tick", e.aggregation->tick},
                        {"operators", ops},
                        {"values", e.aggregation->values},
                        {"weights", e.aggregation->weights},
                        {"aggregate", e.aggregation->aggregate}};
  } else {
    j["aggregation"] = nullptr;
  }
  j["payment_converged"] = e.payment_converged ? json(*e.payment_converged) : json(nullptr);
  json ps = json::array();
  for (const auto& s : e.payment_stability) ps.push_back(to_json(s));
  j["payment_stability"] = ps;
  json windows = json::array();
  for (const auto& w : e.windows) {
    windows.push_back({{"operator", w.operator_id.str()},
                       {"start", w.start_tick},
                       {"end", w.end_tick},
                       {"index", w.window_index},
                       {"fallback", w.is_fallback},
                       {"covers", w.covers_window ? json(*w.covers_window) : json(nullptr)}});
  }
  j["windows"] = windows;
  j["heights"] = e.heights;
  j["commits"] = e.commits;
  j["misses"] = e.misses;
  j["fallbacks"] = e.fallbacks;
  j["unrecoverable"] = e.unrecoverable;
  j["failures"] = e.failures;
  j["signer_counts"] = e.signer_counts;
  j["stakes"] = id_map(e.stakes);
  j["trust"] = id_map(e.trust);
  return j;
}

EpochReport epoch_from_json(const json& j) {
  EpochReport e;
  e.epoch = j.at("epoch").get<std::size_t>();
  if (const json& s = j.at("sequencer"); !s.is_null()) {
    e.sequencer = SequencerMetrics{s.at("throughput").get<double>(), s.at("latency").get<double>(),
                                   s.at("fault_tolerance").get<double>(),
                                   s.at("resource_efficiency").get<double>()};
  }
  if (const json& p = j.at("payment"); !p.is_null()) {
    PaymentMetrics m;
    m.total_transactions = p.at("total_transactions").get<double>();
    m.validation_efficiency = get_opt(p, "validation_efficiency");
    m.error_rate = get_opt(p, "error_rate");
    m.revenue_growth = get_opt(p, "revenue_growth");
    m.total_penalties = p.at("total_penalties").get<double>();
    e.payment = m;
  }
  const json& c = j.at("convergence");
  e.convergence.converged = c.at("converged").get<bool>();
  e.convergence.iterations = c.at("iterations").get<std::size_t>();
  e.convergence.final_step_norm = c.at("final_step_norm").get<double>();
  e.convergence.constraint_violation = c.at("constraint_violation").get<double>();
  e.convergence.multipliers = c.at("multipliers").get<std::vector<double>>();
  e.convergence.welfare = c.at("welfare").get<double>();
  e.stability = stability_from_json(j.at("stability"));
  if (const json& a = j.at("aggregation"); !a.is_null()) {
    AggregationReport r;
    r.tick = a.at("tick").get<Tick>();
    for (const auto& id : a.at("operators")) r.operators.emplace_back(id.get<std::string>());
    r.values = a.at("values").get<std::vector<double>>();
    r.weights = a.at("weights").get<std::vector<double>>();
    r.aggregate = a.at("aggregate").get<double>();
    e.aggregation = std::move(r);
  }
  if (const json& pc = j.at("payment_converged"); !pc.is_null()) e.payment_converged = pc.get<bool>();
  for (const auto& s : j.at("payment_stability")) e.payment_stability.push_back(stability_from_json(s));
  for (const auto& w : j.at("windows")) {
    SubmissionWindow sw;
    sw.operator_id = OperatorId(w.at("operator").get<std::string>());
    sw.start_tick = w.at("start").get<Tick>();
    sw.end_tick = w.at("end").get<Tick>();
    sw.window_index = w.at("index").get<std::size_t>();
    sw.is_fallback = w.at("fallback").get<bool>();
    if (!w.at("covers").is_null()) sw.covers_window = w.at("covers").get<std::size_t>();
    e.windows.push_back(std::move(sw));
  }
  e.heights = j.at("heights").get<std::size_t>();
  e.commits = j.at("commits").get<std::size_t>();
  e.misses = j.at("misses").get<std::size_t>();
  e.fallbacks = j.at("fallbacks").get<std::size_t>();
  e.unrecoverable = j.at("unrecoverable").get<std::size_t>();
  e.failures = j.at("failures").get<std::size_t>();
  e.signer_counts = j.at("signer_counts").get<std::vector<std::size_t>>();
  e.stakes = id_map_from(j.at("stakes"));
  e.trust = id_map_from(j.at("trust"));
  return e;
}

json to_json(const RunReport& r) {
  json j;
  j["scenario"] = std::string(to_string(r.scenario));
  j["seed"] = r.seed;
  json epochs = json::array();
  for (const auto& e : r.epochs) epochs.push_back(to_json(e));
  j["epochs"] = epochs;
  json ops = json::object();
  for (const auto& [id, s] : r.ledger.operators) {
    ops[id.str()] = {{"rewards", s.rewards},
                     {"fees", s.fees},
                     {"slashed", s.slashed},
                     {"final_stake", s.final_stake},
                     {"final_trust", s.final_trust}};
  }
  j["ledger"] = {{"operators", ops},
                 {"total_disbursed", r.ledger.total_disbursed},
                 {"total_slashed", r.ledger.total_slashed}};
  json entries = json::array();
  for (const auto& e : r.ledger_entries) {
    entries.push_back({{"operator", e.operator_id.str()},
                       {"tick", e.tick},
                       {"kind", std::string(to_string(e.kind))},
                       {"amount", e.amount},
                       {"reason", std::string(to_string(e.reason))}});
  }
  j["ledger_entries"] = entries;
  j["trace_digest"] = r.trace_digest;
  j["trace_events"] = r.trace_events;
  return j;
}

std::vector<std::optional<double>> metric_values(const EpochReport& e, ScenarioKind scenario) {
  if (scenario == ScenarioKind::kSequencer) {
    if (!e.sequencer) return {std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    return {e.sequencer->throughput, e.sequencer->latency, e.sequencer->fault_tolerance,
            e.sequencer->resource_efficiency};
  }
  if (!e.payment) return {std::nullopt, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
  return {e.payment->total_transactions, e.payment->validation_efficiency, e.payment->error_rate,
          e.payment->revenue_growth, e.payment->total_penalties};
}

}  // namespace

ReportFormat report_format_from_string(std::string_view text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "csv") return ReportFormat::kCsv;
  throw DomainError("report format must be 'json' or 'csv'");
}

std::vector<std::string> csv_metric_names(ScenarioKind scenario) {
  if (scenario == ScenarioKind::kSequencer) {
    return {"throughput", "latency", "fault_tolerance", "resource_efficiency"};
  }
  return {"total_transactions", "validation_efficiency", "error_rate", "revenue_growth",
          "total_penalties"};
}

std::string render_report(const RunReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return to_json(report).dump(2) + "\n";
  std::string out = "epoch,metric,value\n";
  const auto names = csv_metric_names(report.scenario);
  for (const auto& e : report.epochs) {
    const auto values = metric_values(e, report.scenario);
    for (std::size_t m = 0; m < names.size(); ++m) {
      out += std::to_string(e.epoch) + "," + names[m] + "," + (values[m] ? g17(*values[m]) : "") + "\n";
    }
  }
  return out;
}

void write_report(const RunReport& report, ReportFormat format,
                  const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + destination.string() + "' for writing");
  out << render_report(report, format);
  out.flush();
  if (!out) throw IoError("failed writing '" + destination.string() + "'");
}

RunReport parse_report(std::string_view text) {
  try {
    const json j = json::parse(text.begin(), text.end());
    RunReport r;
    r.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("epochs")) r.epochs.push_back(epoch_from_json(e));
    const json& l = j.at("ledger");
    for (auto it = l.at("operators").begin(); it != l.at("operators").end(); ++it) {
      const json& s = *it;
      r.ledger.operators[OperatorId(it.key())] = {
          s.at("rewards").get<double>(), s.at("fees").get<double>(), s.at("slashed").get<double>(),
          s.at("final_stake").get<double>(), s.at("final_trust").get<double>()};
    }
    r.ledger.total_disbursed = l.at("total_disbursed").get<double>();
    r.ledger.total_slashed = l.at("total_slashed").get<double>();
    for (const auto& e : j.at("ledger_entries")) {
      r.ledger_entries.push_back({OperatorId(e.at("operator").get<std::string>()),
                                  e.at("tick").get<Tick>(),
                                  ledger_kind_from_string(e.at("kind").get<std::string>()),
                                  e.at("amount").get<double>(),
                                  event_kind_from_string(e.at("reason").get<std::string>())});
    }
    r.trace_digest = j.at("trace_digest").get<std::string>();
    r.trace_events = j.at("trace_events").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
}

RunReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read report '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str());
}

std::string format_report_summary(const RunReport& report) {
  std::ostringstream out;
  out << "scenario " << to_string(report.scenario) << ", seed " << report.seed << ", "
      << report.epochs.size() << " epoch(s), trace " << report.trace_digest << " ("
      << report.trace_events << " events)\n";
  const auto names = csv_metric_names(report.scenario);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-6s", "epoch");
  out << buf;
  for (const auto& n : names) {
    std::snprintf(buf, sizeof buf, " %22s", n.c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, " %8s %8s %8s", "commits", "misses", "fallback");
  out << buf << "\n";
  for (const auto& e : report.epochs) {
    std::snprintf(buf, sizeof buf, "%-6zu", e.epoch);
    out << buf;
    for (const auto& v : metric_values(e, report.scenario)) {
      if (v) {
        std::snprintf(buf, sizeof buf, " %22.6g", *v);
      } else {
        std::snprintf(buf, sizeof buf, " %22s", "-");
      }
      out << buf;
    }
    std::snprintf(buf, sizeof buf, " %8zu %8zu %8zu", e.commits, e.misses, e.fallbacks);
    out << buf << "\n";
  }
  out << "ledger: disbursed " << g17(report.ledger.total_disbursed) << ", slashed "
      << g17(report.ledger.total_slashed) << "\n";
  for (const auto& [id, s] : report.ledger.operators) {
    std::snprintf(buf, sizeof buf, "  %-12s stake %12.4f  trust %.4f  rewards %10.4f  fees %8.2f  slashed %10.4f\n",
                  id.str().c_str(), s.final_stake, s.final_trust, s.rewards, s.fees, s.slashed);
    out << buf;
  }
  return out.str();
}

std::string export_ledger(std::span<const LedgerEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.operator_id.str() + "\t" + std::to_string(e.tick) + "\t" + std::string(to_string(e.kind)) +
           "\t" + g17(e.amount) + "\t" + std::string(to_string(e.reason)) + "\n";
  }
  return out;
}

}  // namespace nodeop
