#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nodeop/errors.hpp"
#include "nodeop/harness.hpp"

namespace nodeop {
namespace {

using nlohmann::json;
using Kind = ConfigError::Kind;

[[noreturn]] void semantic(const std::string& field, const std::string& what) {
  throw ConfigError(Kind::kSemantic, field, field + ": " + what);
}

// Reads an object's members, tracking which keys were consumed so that
// leftovers can be rejected as unknown fields.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) semantic(path_.empty() ? "<root>" : path_, "must be an object");
  }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number()) semantic(path(key), "must be a number");
    return v->get<double>();
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      semantic(path(key), "must be a non-negative integer");
    }
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_boolean()) semantic(path(key), "must be a boolean");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = child(key);
    if (!v) return fallback;
    if (!v->is_string()) semantic(path(key), "must be a string");
    return v->get<std::string>();
  }

  std::string required_text(const std::string& key) {
    const json* v = child(key);
    if (!v) semantic(path(key), "is required");
    if (!v->is_string() || v->get<std::string>().empty()) semantic(path(key), "must be a non-empty string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        const std::string field = path(it.key());
        throw ConfigError(Kind::kUnknownField, field, "unknown field '" + field + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const json& require_array(const json* v, const std::string& field) {
  if (!v) semantic(field, "is required");
  if (!v->is_array()) semantic(field, "must be an array");
  return *v;
}

void non_negative(double v, const std::string& field) {
  if (!std::isfinite(v) || v < 0.0) semantic(field, "must be finite and non-negative");
}

PaymentConfig parse_payment(const json& j, const std::string& path, double capacity) {
  Fields f(j, path);
  PaymentConfig pc;
  PaymentNodeParams& p = pc.params;
  p.fee = f.number("fee", 0.0);
  p.validation_cost = f.number("validation_cost", 0.0);
  p.validation_cost_cap = f.number("validation_cost_cap", std::numeric_limits<double>::infinity());
  p.penalty = f.number("penalty", 0.0);
  p.error_cost = f.number("error_cost", 0.0);
  p.error_rate = f.number("error_rate", 0.0);
  p.deadline = f.number("deadline", 0.0);
  p.validation_time = f.number("validation_time", 0.0);
  p.capacity = capacity;
  pc.fee_fixed = f.boolean("fee_fixed", false);
  if (const json* stages = f.child("stages")) {
    const json& arr = require_array(stages, f.path("stages"));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Fields s(arr[i], f.path("stages") + "[" + std::to_string(i) + "]");
      ValidationStage st;
      st.latency = s.number("latency", 0.0);
      st.error_rate = s.number("error_rate", 0.0);
      s.finish();
      non_negative(st.latency, s.path("latency"));
      if (!(st.error_rate >= 0.0 && st.error_rate <= 1.0)) semantic(s.path("error_rate"), "must lie in [0, 1]");
      pc.stages.push_back(st);
    }
  }
  f.finish();
  for (const auto& [name, v] : {std::pair{"fee", p.fee}, {"validation_cost", p.validation_cost},
                                {"penalty", p.penalty}, {"error_cost", p.error_cost},
                                {"deadline", p.deadline}, {"validation_time", p.validation_time}}) {
    non_negative(v, f.path(name));
  }
  if (!(p.validation_cost_cap >= 0.0)) semantic(f.path("validation_cost_cap"), "must be non-negative");
  if (!(p.error_rate >= 0.0 && p.error_rate <= 1.0)) semantic(f.path("error_rate"), "must lie in [0, 1]");
  return pc;
}

OperatorConfig parse_operator(const json& j, const std::string& path, double default_trust) {
  Fields f(j, path);
  OperatorConfig op;
  op.id = OperatorId(f.required_text("id"));
  op.stake = f.number("stake", op.stake);
  const std::string behavior = f.text("behavior", "honest");
  try {
    op.behavior = behavior_from_string(behavior);
  } catch (const DomainError&) {
    semantic(f.path("behavior"), "unknown behavior '" + behavior + "'");
  }
  op.region_latency = f.count("region_latency", op.region_latency);
  op.capacity = f.number("capacity", op.capacity);
  op.resources = f.number("resources", op.resources);
  op.trust = f.number("trust", default_trust);
  if (const json* p = f.child("payment")) op.payment = parse_payment(*p, f.path("payment"), op.capacity);
  f.finish();

  if (!(std::isfinite(op.stake) && op.stake > 0.0)) semantic(f.path("stake"), "must be positive");
  non_negative(op.capacity, f.path("capacity"));
  non_negative(op.resources, f.path("resources"));
  if (!(op.trust >= 0.0 && op.trust <= 1.0)) semantic(f.path("trust"), "must lie in [0, 1]");
  return op;
}

std::map<OperatorId, double> parse_gains(const json* j, const std::string& path) {
  if (!j) semantic(path, "is required");
  if (!j->is_object()) semantic(path, "must be an object mapping operator ids to gains");
  std::map<OperatorId, double> out;
  for (auto it = j->begin(); it != j->end(); ++it) {
    const std::string field = path + "." + it.key();
    if (!it->is_number()) semantic(field, "must be a number");
    const double g = it->get<double>();
    non_negative(g, field);
    out[OperatorId(it.key())] = g;
  }
  return out;
}

TaskSpec parse_task(const json& j, const std::string& path) {
  Fields f(j, path);
  TaskSpec t;
  t.id = TaskId(f.required_text("id"));
  t.cost_rate = f.number("cost_rate", 0.0);
  t.corruption_rate = f.number("corruption_rate", 0.0);
  t.resource_cap = f.number("resource_cap", 0.0);
  t.value = f.number("value", 0.0);
  t.consensus_gain = parse_gains(f.child("consensus_gain"), f.path("consensus_gain"));
  t.performance_gain = parse_gains(f.child("performance_gain"), f.path("performance_gain"));
  f.finish();
  non_negative(t.cost_rate, f.path("cost_rate"));
  non_negative(t.corruption_rate, f.path("corruption_rate"));
  non_negative(t.resource_cap, f.path("resource_cap"));
  non_negative(t.value, f.path("value"));
  return t;
}

void check_cross_references(const RunConfig& c) {
  std::set<OperatorId> ops;
  for (std::size_t i = 0; i < c.operators.size(); ++i) {
    if (!ops.insert(c.operators[i].id).second) {
      semantic("operators[" + std::to_string(i) + "].id",
               "duplicate operator id '" + c.operators[i].id.str() + "'");
    }
  }
  std::set<TaskId> tasks;
  for (std::size_t t = 0; t < c.tasks.size(); ++t) {
    const std::string path = "tasks[" + std::to_string(t) + "]";
    const TaskSpec& task = c.tasks[t];
    if (!tasks.insert(task.id).second) {
      semantic(path + ".id", "duplicate task id '" + task.id.str() + "'");
    }
    for (const auto* table : {&task.consensus_gain, &task.performance_gain}) {
      const std::string name = table == &task.consensus_gain ? ".consensus_gain" : ".performance_gain";
      for (const auto& [id, g] : *table) {
        if (!ops.contains(id)) semantic(path + name + "." + id.str(), "references an unknown operator");
      }
      for (const auto& id : ops) {
        if (!table->contains(id)) semantic(path + name, "has no entry for operator '" + id.str() + "'");
      }
    }
  }
  for (std::size_t p = 0; p < c.network.partition_schedule.size(); ++p) {
    for (const auto& id : c.network.partition_schedule[p].members) {
      if (!ops.contains(id)) {
        semantic("network.partitions[" + std::to_string(p) + "].validators",
                 "references unknown operator '" + id.str() + "'");
      }
    }
  }
  if (c.scenario == ScenarioKind::kPayment) {
    bool any = false;
    for (const auto& op : c.operators) any = any || op.payment.has_value();
    if (!any) semantic("operators", "payment scenario needs at least one operator with payment parameters");
  }
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

RunConfig load_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    throw ConfigError(Kind::kParse, "",
                      "parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ": " + e.what(),
                      line, column);
  }

  RunConfig c;
  Fields f(root, "");
  const std::string scenario = f.text("scenario", "sequencer");
  try {
    c.scenario = scenario_from_string(scenario);
  } catch (const DomainError&) {
    semantic("scenario", "must be 'sequencer' or 'payment'");
  }
  c.epochs = f.count("epochs", 1);
  c.seed = f.count("seed", 0);

  if (const json* w = f.child("weights")) {
    Fields wf(*w, "weights");
    c.weights.w1 = wf.number("w1", 1.0);
    c.weights.w2 = wf.number("w2", 1.0);
    wf.finish();
  }
  if (!(std::isfinite(c.weights.w1) && c.weights.w1 >= 0.0 && std::isfinite(c.weights.w2) &&
        c.weights.w2 >= 0.0 && c.weights.w1 + c.weights.w2 > 0.0)) {
    semantic("weights", "w1 and w2 must be non-negative with w1 + w2 > 0");
  }

  if (const json* s = f.child("solver")) {
    Fields sf(*s, "solver");
    c.solver.learning_rate = sf.number("learning_rate", c.solver.learning_rate);
    c.solver.tolerance = sf.number("tolerance", c.solver.tolerance);
    c.solver.max_iterations = sf.count("max_iterations", c.solver.max_iterations);
    c.solver.dual_step = sf.number("dual_step", c.solver.dual_step);
    sf.finish();
  }
  try {
    c.solver.validate();
  } catch (const DomainError& e) {
    semantic("solver", e.what());
  }

  if (const json* n = f.child("network")) {
    Fields nf(*n, "network");
    c.network.drop_probability = nf.number("drop_probability", 0.0);
    c.network.latency_jitter = nf.count("latency_jitter", 0);
    if (const json* parts = nf.child("partitions")) {
      const json& arr = require_array(parts, "network.partitions");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "network.partitions[" + std::to_string(i) + "]";
        Fields pf(arr[i], path);
        Partition p;
        p.start = pf.count("start", 0);
        p.end = pf.count("end", 0);
        const json& members = require_array(pf.child("validators"), path + ".validators");
        for (const auto& m : members) {
          if (!m.is_string()) semantic(path + ".validators", "must list operator ids");
          p.members.insert(OperatorId(m.get<std::string>()));
        }
        pf.finish();
        if (p.end < p.start) semantic(path, "end must not precede start");
        c.network.partition_schedule.push_back(std::move(p));
      }
    }
    nf.finish();
  }
  if (!(c.network.drop_probability >= 0.0 && c.network.drop_probability < 1.0)) {
    semantic("network.drop_probability", "must lie in [0, 1)");
  }

  if (const json* s = f.child("schedule")) {
    Fields sf(*s, "schedule");
    c.schedule.horizon = sf.count("horizon", c.schedule.horizon);
    c.schedule.window_length = sf.count("window_length", c.schedule.window_length);
    c.schedule.grace_length = sf.count("grace_length", c.schedule.window_length / 2);
    sf.finish();
  }
  if (c.schedule.window_length == 0) semantic("schedule.window_length", "must be positive");
  if (c.schedule.horizon < c.schedule.window_length) semantic("schedule.horizon", "must be at least one window");
  if (c.schedule.grace_length >= c.schedule.window_length) {
    semantic("schedule.grace_length", "must be below window_length");
  }

  if (const json* s = f.child("consensus")) {
    Fields cf(*s, "consensus");
    c.consensus.max_rounds = static_cast<std::uint32_t>(cf.count("max_rounds", c.consensus.max_rounds));
    c.consensus.base_timeout = cf.count("base_timeout", c.consensus.base_timeout);
    c.consensus.batch_size = cf.count("batch_size", c.consensus.batch_size);
    cf.finish();
  }
  if (c.consensus.max_rounds < 1 || c.consensus.max_rounds > 40) {
    semantic("consensus.max_rounds", "must lie in [1, 40]");
  }
  if (c.consensus.base_timeout < 1) semantic("consensus.base_timeout", "must be positive");
  if (c.consensus.batch_size < 1) semantic("consensus.batch_size", "must be positive");

  if (const json* s = f.child("incentives")) {
    Fields inf(*s, "incentives");
    ReputationParams& r = c.incentives.reputation;
    r.smoothing = inf.number("smoothing", r.smoothing);
    r.initial_trust = inf.number("initial_trust", r.initial_trust);
    r.slash_fraction = inf.number("slash_fraction", r.slash_fraction);
    r.submission_fee = inf.number("submission_fee", r.submission_fee);
    c.incentives.failure_kappa = inf.number("failure_kappa", c.incentives.failure_kappa);
    inf.finish();
  }
  try {
    c.incentives.reputation.validate();
  } catch (const DomainError& e) {
    semantic("incentives", e.what());
  }
  non_negative(c.incentives.failure_kappa, "incentives.failure_kappa");

  const json* ops_json = f.child("operators");
  const json* tasks_json = f.child("tasks");
  f.finish();

  const json& ops = require_array(ops_json, "operators");
  if (ops.empty()) semantic("operators", "must list at least one operator");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    c.operators.push_back(
        parse_operator(ops[i], "operators[" + std::to_string(i) + "]", c.incentives.reputation.initial_trust));
  }
  const json& tasks = require_array(tasks_json, "tasks");
  if (tasks.empty()) semantic("tasks", "must list at least one task");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    c.tasks.push_back(parse_task(tasks[i], "tasks[" + std::to_string(i) + "]"));
  }

  check_cross_references(c);
  return c;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(Kind::kParse, "", "cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

std::string write_config(const RunConfig& c) {
  json root;
  root["scenario"] = std::string(to_string(c.scenario));
  root["epochs"] = c.epochs;
  root["seed"] = c.seed;
  root["weights"] = {{"w1", c.weights.w1}, {"w2", c.weights.w2}};
  root["solver"] = {{"learning_rate", c.solver.learning_rate},
                    {"tolerance", c.solver.tolerance},
                    {"max_iterations", c.solver.max_iterations},
                    {"dual_step", c.solver.dual_step}};
  json partitions = json::array();
  for (const auto& p : c.network.partition_schedule) {
    json members = json::array();
    for (const auto& m : p.members) members.push_back(m.str());
    partitions.push_back({{"start", p.start}, {"end", p.end}, {"validators", members}});
  }
  root["network"] = {{"drop_probability", c.network.drop_probability},
                     {"latency_jitter", c.network.latency_jitter},
                     {"partitions", partitions}};
  root["schedule"] = {{"horizon", c.schedule.horizon},
                      {"window_length", c.schedule.window_length},
                      {"grace_length", c.schedule.grace_length}};
  root["consensus"] = {{"max_rounds", c.consensus.max_rounds},
                       {"base_timeout", c.consensus.base_timeout},
                       {"batch_size", c.consensus.batch_size}};
  const ReputationParams& r = c.incentives.reputation;
  root["incentives"] = {{"smoothing", r.smoothing},
                        {"initial_trust", r.initial_trust},
                        {"slash_fraction", r.slash_fraction},
                        {"submission_fee", r.submission_fee},
                        {"failure_kappa", c.incentives.failure_kappa}};
  json ops = json::array();
  for (const auto& op : c.operators) {
    json o = {{"id", op.id.str()},
              {"stake", op.stake},
              {"behavior", std::string(to_string(op.behavior))},
              {"region_latency", op.region_latency},
              {"capacity", op.capacity},
              {"resources", op.resources},
              {"trust", op.trust}};
    if (op.payment) {
      const PaymentNodeParams& p = op.payment->params;
      json pj = {{"fee", p.fee},
                 {"validation_cost", p.validation_cost},
                 {"penalty", p.penalty},
                 {"error_cost", p.error_cost},
                 {"error_rate", p.error_rate},
                 {"deadline", p.deadline},
                 {"validation_time", p.validation_time},
                 {"fee_fixed", op.payment->fee_fixed}};
      if (std::isfinite(p.validation_cost_cap)) pj["validation_cost_cap"] = p.validation_cost_cap;
      json stages = json::array();
      for (const auto& s : op.payment->stages) {
        stages.push_back({{"latency", s.latency}, {"error_rate", s.error_rate}});
      }
      pj["stages"] = stages;
      o["payment"] = pj;
    }
    ops.push_back(o);
  }
  root["operators"] = ops;
  json tasks = json::array();
  for (const auto& t : c.tasks) {
    json cg = json::object();
    json pg = json::object();
    for (const auto& [id, g] : t.consensus_gain) cg[id.str()] = g;
    for (const auto& [id, g] : t.performance_gain) pg[id.str()] = g;
    tasks.push_back({{"id", t.id.str()},
                     {"cost_rate", t.cost_rate},
                     {"corruption_rate", t.corruption_rate},
                     {"resource_cap", t.resource_cap},
                     {"value", t.value},
                     {"consensus_gain", cg},
                     {"performance_gain", pg}});
  }
  root["tasks"] = tasks;
  return root.dump(2) + "\n";
}

}  // namespace nodeop
