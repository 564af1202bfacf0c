// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Verification suites: property fuzzing, oracle equivalences, cost-table
// reproduction, and bound validation. Shared by the `fedsim verify`
// subcommand and the acceptance test binary.

#pragma once

#include <string>
#include <vector>

namespace fedsim {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured-vs-expected margins
};

struct SuiteReport {
  std::string name;
  bool pass = false;
  std::vector<CheckResult> checks;
  double seconds = 0.0;
};

// Concrete suite names, in acceptance-criterion order.
const std::vector<std::string>& verify_suite_names();

// Runs one suite by name. Throws std::invalid_argument for unknown names.
SuiteReport run_verify_suite(const std::string& name);

// Selector: a suite name, "bounds" (perturbation + lemma1), or "all".
std::vector<SuiteReport> run_verify(const std::string& selector);

std::string report_to_json(const std::vector<SuiteReport>& reports);

}  // namespace fedsim
