#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace inversio {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double runtime_s = 0.0;
};

// The acceptance matrix. `quick` shrinks sample sizes for smoke runs; the
// statistical thresholds are unchanged. `progress` receives one line per
// finished check when given.
std::vector<CriterionResult> run_acceptance(bool quick, const std::function<void(const std::string&)>& progress = {});

void print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results);

}  // namespace inversio
