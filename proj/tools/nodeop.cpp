#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nodeop/errors.hpp"
#include "nodeop/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigFailure = 1;
constexpr int kRuntimeFailure = 2;

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::string out;
  std::string format = "json";
};

int do_run(const RunArgs& args) {
  nodeop::RunConfig config = nodeop::load_config_file(args.config);
  if (args.seed) config.seed = *args.seed;
  if (args.epochs) config.epochs = *args.epochs;
  const nodeop::ReportFormat format = nodeop::report_format_from_string(args.format);
  const nodeop::RunReport report = nodeop::run_simulation(config);
  if (args.out.empty() || args.out == "-") {
    std::cout << nodeop::render_report(report, format);
  } else {
    nodeop::write_report(report, format, args.out);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nodeop: node operator allocation, consensus and incentive simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a simulation and write its report");
  run->add_option("--config", run_args.config, "JSON run configuration")->required();
  run->add_option("--seed", run_args.seed, "Override the configured seed");
  run->add_option("--epochs", run_args.epochs, "Override the configured epoch count");
  run->add_option("--out", run_args.out, "Report destination (stdout when omitted)");
  run->add_option("--format", run_args.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check a configuration file");
  validate->add_option("--config", validate_config, "JSON run configuration")->required();

  std::string report_path;
  auto* metrics = app.add_subcommand("metrics", "Pretty-print a JSON report");
  metrics->add_option("--report", report_path, "Report written by 'run --format json'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    if (*run) return do_run(run_args);
    if (*validate) {
      const nodeop::RunConfig c = nodeop::load_config_file(validate_config);
      std::cout << "ok: " << c.operators.size() << " operator(s), " << c.tasks.size()
                << " task(s), " << c.epochs << " epoch(s)\n";
      return kOk;
    }
    if (*metrics) {
      std::cout << nodeop::format_report_summary(nodeop::read_report(report_path));
      return kOk;
    }
  } catch (const nodeop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kRuntimeFailure;
}
