#pragma once

#include <string>
#include <vector>

namespace remex {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
};

/// Built-in oracle suites: "kernels", "axioms", "consistency",
/// "information". tolerance_scale multiplies every suite tolerance
/// (a test hook; 1.0 for normal runs).
std::vector<SuiteResult> run_selftest(const std::vector<std::string>& suites,
                                      double tolerance_scale = 1.0);

std::vector<std::string> selftest_suite_names();

}  // namespace remex
