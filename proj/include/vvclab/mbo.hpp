#pragma once

// Model-based per-step dispatch oracle: with the true network and scenario,
// search the reactive-power box for minimum loss under voltage limits.

#include <vector>

#include "vvclab/env.hpp"

namespace vvclab::mbo {

struct OracleOptions {
  /// Penalty on violation during the search; <= 0 means 10 * c_v.
  double penalty = 0.0;
  /// Pattern step (MVar) below which the search stops.
  double tol = 1e-5;
  /// First pattern step as a fraction of each device's range.
  double initial_step = 0.25;
  int max_evaluations = 20000;
  int polish_iterations = 20;
  bool restore_feasibility = true;
};

struct OracleResult {
  std::vector<double> action;  // MVar
  double loss_mw = 0.0;
  double vvr = 0.0;            // against the nominal limits
  double objective = 0.0;      // loss + c_v * vvr
  int evaluations = 0;         // power-flow calls
};

struct OracleReport {
  OracleResult penalized;
  /// Search repeated from `penalized` with a much larger penalty; equals
  /// `penalized` when that is already feasible.
  OracleResult restored;
  /// Lowest loss + c_v * vvr among the two and the zero dispatch.
  OracleResult chosen;
};

OracleReport optimize_step_report(const env::VvcEnv& env, const env::Scenario& scenario,
                                  const OracleOptions& options = {});

/// Starts from zero dispatch, so the result never scores worse than it.
/// Throws OracleError if every candidate power flow diverges.
OracleResult optimize_step(const env::VvcEnv& env, const env::Scenario& scenario,
                           const OracleOptions& options = {});

env::Policy oracle_policy(const env::VvcEnv& env, const OracleOptions& options = {});

}  // namespace vvclab::mbo
