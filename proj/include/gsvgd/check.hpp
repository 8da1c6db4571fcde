#pragma once

#include <string>
#include <vector>

namespace gsvgd::check {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// Invariant and oracle checks on small instances; fast enough for a smoke run.
std::vector<CheckResult> run_checks();

}  // namespace gsvgd::check
