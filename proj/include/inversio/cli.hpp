#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "inversio/characteristics.hpp"
#include "inversio/report.hpp"

namespace inversio {

// Flat key = value experiment description. Lists are comma separated.
struct ExperimentConfig {
  std::string family;
  FamilyParams params;
  std::string test;
  std::vector<double> x0;
  std::vector<double> y;
  std::vector<double> times;
  double t_end = 0.0;
  double dt = 1e-3;
  std::size_t N = 10000;
  std::uint64_t seed = 0;
  std::string output;
  std::string format = "csv";
  // Test function for excessive, kelvin-exit and generator tests.
  std::string function;
  std::vector<double> annulus;
  std::optional<double> threshold;
  // Negative controls: the IP reweighting uses h^h_power.
  double h_power = 1.0;
  // generator: "harmonic" passes on a vanishing residual, "defect" on a
  // residual at least the threshold.
  std::string expect = "harmonic";
  std::string target;
  FamilyParams target_params;
  std::size_t points = 1000;
  std::size_t permutations = 999;
  bool record_runtime = false;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

std::vector<TestReport> run_experiment(const ExperimentConfig& config);

std::string format_reports(const std::vector<TestReport>& reports, const std::string& format);
// Writes the reports; throws Error with the path on I/O failure.
void emit_report(const std::vector<TestReport>& reports, const std::string& format, const std::string& path);
// Inverse of the JSON format (fields of the CSV columns only).
std::vector<TestReport> parse_json_reports(const std::string& text);

}  // namespace inversio
