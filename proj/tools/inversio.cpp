#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

#include "inversio/acceptance.hpp"
#include "inversio/characteristics.hpp"
#include "inversio/cli.hpp"
#include "inversio/errors.hpp"
#include "inversio/parallel.hpp"
#include "inversio/simd/kernels.hpp"

namespace {

int run(const std::string& path) {
  using namespace inversio;
  ExperimentConfig config;
  try {
    config = load_config(path);
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  std::vector<TestReport> reports;
  try {
    reports = run_experiment(config);
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const Unsupported& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 3;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  }

  // Human-readable lines go to stderr so stdout carries only the report.
  bool all = true;
  for (const auto& r : reports) {
    std::fprintf(stderr, "%-60s %-8s value=%-12.6g threshold=%-10.4g runtime=%.2fs\n", r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.value, r.threshold, r.runtime_s);
    for (const auto& d : r.details)
      std::fprintf(stderr, "  %-20s statistic=%-12.6g value=%.6g\n", d.name.c_str(), d.statistic,
                   d.value);
    for (const auto& note : r.notes) std::fprintf(stderr, "  note: %s\n", note.c_str());
    all = all && r.pass;
  }
  if (!config.record_runtime)
    for (auto& r : reports) r.runtime_s = 0.0;
  if (!config.output.empty()) emit_report(reports, config.format, config.output);
  else std::cout << format_reports(reports, config.format);
  return all ? 0 : 1;
}

int suite(bool quick) {
  const auto results = inversio::run_acceptance(quick, [](const std::string& line) {
    std::cout << "  " << line << "\n" << std::flush;
  });
  inversio::print_acceptance(std::cout, results);
  for (const auto& r : results)
    if (!r.pass) return 1;
  return 0;
}

int list_families() {
  for (const auto& f : inversio::list_families())
    std::printf("%-20s %-18s %s\n", f.id.c_str(), f.parameters.c_str(), f.summary.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and numerical checks of the space inversion property"};
  app.require_subcommand(1);
  std::string config;
  auto* run_cmd = app.add_subcommand("run", "run one experiment config");
  run_cmd->add_option("config", config, "key = value config file")->required();
  bool quick = false;
  auto* suite_cmd = app.add_subcommand("suite", "run the acceptance matrix");
  suite_cmd->add_flag("--quick", quick, "smaller sample sizes");
  auto* list_cmd = app.add_subcommand("list-families", "list registered families");
  CLI11_PARSE(app, argc, argv);

  try {
    std::fprintf(stderr, "workers: %zu, simd: %s\n", inversio::worker_count(),
                 inversio::simd::isa_name(inversio::simd::active_isa()));
    if (*run_cmd) return run(config);
    if (*suite_cmd) return suite(quick);
    if (*list_cmd) return list_families();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
