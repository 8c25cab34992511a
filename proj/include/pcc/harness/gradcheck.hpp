#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pcc::harness {

struct GradCheckOptions {
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  double step = 1e-3;
  double rel_tol = 1e-4;
  double abs_tol = 1e-6;
  // Coordinates compared per trial; 0 means every input coordinate.
  std::size_t max_coords = 0;
  // Called with a one-line description of every failing coordinate.
  std::function<void(const std::string&)> on_failure;
};

struct GradCheckResult {
  std::string op;
  std::size_t trials = 0;
  std::size_t coords_checked = 0;
  std::size_t kinks_rejected = 0;  // coordinates resampled
  std::size_t failures = 0;
  // Failures whose central difference at step/100 agrees with the analytic
  // gradient to 1e-4 relative: finite-difference truncation error rather
  // than a wrong gradient.
  std::size_t truncation_failures = 0;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;  // over coordinates outside the absolute band
  std::string worst;         // parameter holding the largest relative error
  bool ok() const { return failures == 0 && coords_checked > 0; }
};

std::vector<std::string> gradcheck_ops();

// Central differences in f64 against the tape gradient. Throws BadArgument
// for an unknown op.
GradCheckResult gradcheck(const std::string& op,
                          const GradCheckOptions& opts = {});

}  // namespace pcc::harness
