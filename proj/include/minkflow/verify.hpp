#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minkflow/sphere_grid.hpp"

namespace minkflow {

/// One measured quantity of a check. Lower-bound items pass when value >= -tolerance (inequality
/// margins); the others pass when value <= tolerance (residuals, deviations from equality).
struct CheckItem {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool lower_bound = false;
  bool pass = false;
};

struct CheckResult {
  std::string name;
  int samples = 0;
  std::vector<CheckItem> items;
  bool pass() const;
};

struct VerifyOptions {
  GridPtr grid;
  int samples = 20;
  std::uint64_t seed = 7;
  /// Empty runs every check in all_checks().
  std::vector<std::string> checks;
  /// Replaces every item tolerance when set.
  std::optional<double> tolerance;
  /// Per-item overrides, keyed "check.item" (e.g. "bs.ellipsoid").
  std::map<std::string, double> item_tolerance;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool pass() const;
};

/// af, af_psi, bs, polar, dzp, holder.
const std::vector<std::string>& all_checks();

/// Throws Error(config) for an unknown check name.
VerifyReport run_verify(const VerifyOptions& opts);

}  // namespace minkflow
