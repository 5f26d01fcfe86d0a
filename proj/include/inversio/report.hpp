#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace inversio {

enum class ReportKind { PValue, Residual };

struct SubTest {
  std::string name;
  double statistic = 0.0;
  double value = 0.0;
};

// Outcome of one verification. For p-value reports pass means value >
// threshold; for residual reports, value < threshold.
struct TestReport {
  std::string name;
  ReportKind kind = ReportKind::PValue;
  double statistic = 0.0;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::size_t n = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  double runtime_s = 0.0;
  std::vector<SubTest> details;
  std::vector<std::string> notes;

  void decide() { pass = kind == ReportKind::PValue ? value > threshold : value < threshold; }
};

}  // namespace inversio
