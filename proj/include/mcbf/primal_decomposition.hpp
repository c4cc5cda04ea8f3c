#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mcbf/backhaul.hpp"
#include "mcbf/conic/problem.hpp"
#include "mcbf/conic/solver.hpp"
#include "mcbf/ici.hpp"
#include "mcbf/network.hpp"
#include "mcbf/parallel.hpp"

namespace mcbf {

/// Row and variable bookkeeping of a per-BS problem.
struct CellLayout {
  int b = 0;
  std::vector<int> groups;       ///< network group of matrix variable i
  std::vector<int> users;        ///< users served by b
  std::vector<int> sinr_rows;    ///< row of users[i]
  std::vector<int> cap_pairs;    ///< outgoing pairs, in canonical order
  std::vector<int> cap_rows;     ///< row of cap_pairs[i]
  std::vector<int> theta_pairs;  ///< pairs with a scalar copy (ADMM only)
  std::vector<int> theta_vars;   ///< scalar variable of theta_pairs[i]
};

struct CellProblem {
  conic::ConicProblem problem;
  CellLayout layout;
};

/// Local problem of BS b for fixed ICI levels `theta` (indexed by pair):
/// SINR rows of its users with incoming ICI fixed, caps on the ICI it
/// causes, and its own sum power as objective.
CellProblem AssembleSubproblem(int b, const ChannelSet& channels, const Topology& topology,
                               const IciPairs& pairs, const Eigen::VectorXd& theta);

struct CellSolve {
  conic::ConicSolution solution;
  CellLayout layout;
  bool feasible = false;
  double power = 0.0;  ///< BS sum power when feasible
};

CellSolve SolveSubproblem(int b, const ChannelSet& channels, const Topology& topology,
                          const IciPairs& pairs, const Eigen::VectorXd& theta,
                          const conic::SolverOptions& solver = {});

/// Dual side information of one BS. lambda is set for incoming pairs
/// (gamma_u times the SINR-row multiplier), mu for outgoing pairs (minus
/// the cap-row multiplier); other entries are zero.
struct DualSides {
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
};

/// Throws StateError when the solution is not Optimal or lacks duals.
DualSides ExtractDualSides(const conic::ConicSolution& solution, const CellLayout& layout,
                           const Topology& topology, const IciPairs& pairs);

/// s = lambda - mu per pair, from the sides reported by every BS.
Eigen::VectorXd AssembleSubgradient(const std::vector<DualSides>& sides, const IciPairs& pairs);

struct StepSchedule {
  enum class Kind { kFixed, kDiminishing };
  Kind kind = Kind::kFixed;
  double step = 0.3;  ///< fixed step, or the initial step of the diminishing rule
  /// When > 1, a step may change each component by at most this factor
  /// (theta/f <= theta' <= f theta). 0 gives the plain projected step.
  double trust_factor = 2.0;

  double At(int r) const;
};

/// max(theta - step(r) * s, kMinTheta) componentwise, after the optional
/// trust-region clamp.
Eigen::VectorXd MasterUpdate(const Eigen::VectorXd& theta, const Eigen::VectorXd& s, int r,
                             const StepSchedule& schedule);

/// One row per iteration of a distributed run.
struct TraceRow {
  int iteration = 0;
  double sum_power = 0.0;       ///< sum of the local optima of this iteration
  double feasible_power = 0.0;  ///< network-feasible power at this iteration, NaN if none
  double best_power = 0.0;      ///< best feasible power so far, NaN if none
  double residual = 0.0;        ///< PD: |theta' - theta|_inf, ADMM: consensus residual
  double dual_residual = 0.0;   ///< |theta' - theta|_inf for both algorithms
  long long scalars = 0;        ///< dual or copy scalars exchanged in this iteration
  int backtracks = 0;
};

using ConvergenceTrace = std::vector<TraceRow>;

struct DistributedOptions {
  int max_iters = 100;
  double tolerance = 1e-6;
  double theta0 = 0.0;  ///< <= 0 means sigma^2 of the first user
  int gr_count = 100;
  double rank_tolerance = 1e-6;
  std::uint64_t gr_seed = 0;
  Execution execution = Execution::kParallel;
  conic::SolverOptions solver;
};

struct PrimalDecompositionOptions : DistributedOptions {
  StepSchedule schedule;
  int max_backtracks = 30;
};

struct DistributedResult {
  ConvergenceTrace trace;
  bool feasible = false;  ///< a network-feasible iterate was found
  BeamformingSolution solution;
  Eigen::VectorXd theta;   ///< ICI levels of the returned iterate
  double relaxed_power = 0.0;  ///< sum of local optima at that iterate
  bool randomized = false;
  IciState state;          ///< final state
  MessageLog log;
  int replica_mismatches = 0;
};

/// Algorithm with the projected-subgradient master. Throws
/// InitializationError if a subproblem is infeasible at theta0.
DistributedResult RunPrimalDecomposition(const ChannelSet& channels, const Topology& topology,
                                         const PrimalDecompositionOptions& options);

/// Combines per-BS solutions into a network solution (variables per
/// group), extracting rank-one beamformers or running the distributed
/// randomization at `theta` when some local solution has higher rank.
/// Returns false when randomization fails at some BS.
bool FinishDistributed(const std::vector<CellSolve>& cells, const ChannelSet& channels,
                       const Topology& topology, const IciPairs& pairs,
                       const Eigen::VectorXd& theta, const DistributedOptions& options,
                       Backhaul& bus, BeamformingSolution& out, bool& randomized);

}  // namespace mcbf
