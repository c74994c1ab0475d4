#pragma once

/// @file
/// Randomized property suites behind the `verify` command. Each suite draws
/// `count` instances from its own named sub-stream of `seed`, checks them
/// independently (optionally in parallel) and aggregates in instance order.

#include <cstdint>
#include <string>
#include <vector>

#include "issgf/json_util.h"

namespace issgf {

struct VerifyOptions {
  std::uint64_t seed = 0;
  int count = 20;
  /// Worker threads; 0 uses the hardware concurrency.
  int threads = 1;
  /// Dimensions for the spectrum suites; 0 draws them per instance.
  int n = 0;
  int m = 0;
  int k = 0;
  /// Safe-set parameters for the invariance suite.
  double alpha = 1.0;
  double y_bar = 1.0;
  /// Simulated horizon for the invariance and dissipation suites.
  double t_end = 20.0;
};

struct VerifyReport {
  std::string suite;
  bool passed = false;
  int instances = 0;
  int failures = 0;
  /// Suite-specific aggregates (worst errors, counts, ...).
  Json details;
  /// Up to ten failing instances with their diagnostics.
  Json failed_instances = Json::array();
};

/// dissipation, invariance, origin-spectrum, target-spectrum, equilibria,
/// tensor-identities.
const std::vector<std::string>& VerifySuiteNames();

/// Throws InvalidArgument for unknown suites or invalid options.
VerifyReport RunVerifySuite(const std::string& suite, const VerifyOptions& opts);

Json VerifyReportToJson(const VerifyReport& r, const VerifyOptions& opts);

}  // namespace issgf
