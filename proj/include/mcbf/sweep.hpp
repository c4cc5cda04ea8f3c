#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcbf/parallel.hpp"
#include "mcbf/primal_decomposition.hpp"
#include "mcbf/scenario.hpp"

namespace mcbf {

/// One scheme on one trial at one sweep point. Power schemes report watts
/// in `objective`, balancing schemes the achieved minimum SINR (linear).
/// theta is NaN for schemes that do not take an ICI level.
struct ResultRecord {
  std::string scheme;
  int trial = 0;
  std::uint64_t seed = 0;  ///< channel seed of the trial
  double gamma_db = 0.0;
  double d_db = 0.0;
  double p_max = 0.0;
  double theta = 0.0;
  bool feasible = false;
  double objective = 0.0;
  double relaxed = 0.0;   ///< relaxed optimum (SDR power or bisection level)
  bool rank_one = false;  ///< every covariance of the relaxed solution is rank one
  double avg_rank = 0.0;  ///< sum of ranks over the number of groups
  bool randomized = false;
  int iterations = 0;     ///< algorithm iterations or bisection calls
  long long signaling = 0;  ///< backhaul scalars (CSI scalars for centralized)
  double wall_ms = 0.0;
  std::string note;       ///< reason when infeasible
};

/// Field-wise equality with NaN equal to NaN; wall time is skipped when
/// `ignore_timing` is set.
bool SameRecord(const ResultRecord& a, const ResultRecord& b, bool ignore_timing = false);

struct TraceRecord {
  std::string scheme;
  int trial = 0;
  double gamma_db = 0.0;
  double d_db = 0.0;
  TraceRow row;
};

struct SweepOptions {
  Execution execution = Execution::kParallel;
  bool timing = true;  ///< false leaves wall_ms at 0, for reproducibility checks
};

struct SweepOutput {
  std::vector<ResultRecord> records;  ///< canonical order: point, scheme, theta, trial
  std::vector<TraceRecord> traces;
};

/// Runs every (trial, sweep point) task, in parallel across tasks when
/// requested. Output does not depend on the execution mode.
SweepOutput RunSweep(const ScenarioConfig& config, const SweepOptions& options = {});

/// Averages over feasible trials; infeasible ones are counted, not averaged.
struct SummaryRow {
  std::string scheme;
  double gamma_db = 0.0;
  double d_db = 0.0;
  double p_max = 0.0;
  double theta = 0.0;
  int trials = 0;
  int feasible = 0;
  int infeasible = 0;
  double mean_objective = 0.0;  ///< NaN when no trial is feasible
  double mean_relaxed = 0.0;
  int rank_one = 0;             ///< trials with all covariances rank one
  int higher_rank = 0;
  double mean_higher_rank = 0.0;  ///< average rank over higher-rank trials, NaN if none
  double mean_iterations = 0.0;
  double mean_signaling = 0.0;
  double mean_wall_ms = 0.0;
};

std::vector<SummaryRow> Summarize(const std::vector<ResultRecord>& records);

}  // namespace mcbf
