#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mcbf/conic/problem.hpp"
#include "mcbf/conic/solver.hpp"
#include "mcbf/ici.hpp"
#include "mcbf/network.hpp"
#include "mcbf/parallel.hpp"

namespace mcbf {

// ---- bisection ------------------------------------------------------------

struct BisectionCall {
  double t = 0.0;
  bool feasible = false;
};

struct BisectionResult {
  double lower = 0.0;  ///< largest t known feasible (the initial lower bound counts as feasible)
  double upper = 0.0;  ///< smallest t known infeasible (or the initial bound)
  std::vector<BisectionCall> calls;

  double midpoint() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
};

/// Halves [lo, hi] until hi - lo <= eps, calling `feasible` on each midpoint.
BisectionResult Bisect(const std::function<bool(double)>& feasible, double lo, double hi, double eps);

/// ceil(log2((hi - lo) / eps)), the number of oracle calls Bisect makes.
int ExpectedBisectionCalls(double lo, double hi, double eps);

/// No feasible call above an infeasible one.
bool IsMonotone(const std::vector<BisectionCall>& calls);

/// Doubles `hi` until it is infeasible. Throws ConfigError when it is still
/// feasible after `max_doublings`.
double ExpandUpperBound(const std::function<bool(double)>& feasible, double hi, int max_doublings = 60);

// ---- centralized ----------------------------------------------------------

/// Zero-objective SDR feasibility problem at level t: SINR rows scaled by t
/// and per-BS power limits.
conic::ConicProblem AssembleFeasibility(const ChannelSet& channels, const Topology& topology, double t);

/// max_u P_b(u) |h_{b(u),u}|^2 / sigma_u^2: no user can do better even
/// without interference.
double BalanceUpperBound(const ChannelSet& channels, const Topology& topology);

struct BalancingOptions {
  double epsilon = 1e-3;
  int gr_count = 100;
  double rank_tolerance = 1e-6;
  Execution execution = Execution::kParallel;
  conic::SolverOptions solver;
};

struct BalanceResult {
  double t_star = 0.0;  ///< midpoint of the final bracket (relaxation value)
  BisectionResult bisection;
  BeamformingSolution solution;  ///< W at the lower end; w extracted or randomized
  bool randomized = false;
  double achieved = 0.0;  ///< min SINR of the returned beamformers, full interference
  int indeterminate = 0;  ///< feasibility checks without verdict, counted as infeasible
  bool warning = false;   ///< randomization found nothing above epsilon
};

BalanceResult BisectBalance(const ChannelSet& channels, const Topology& topology,
                            const BalancingOptions& options, Rng& rng);

/// Randomized balancing: for every candidate set bisect over the power LP
/// with fixed directions and keep the set with the largest t.
struct GrBalanceResult {
  int selected = -1;
  double t = 0.0;
  std::vector<double> powers;          ///< per group of the problem
  std::vector<double> t_per_candidate;
  int indeterminate = 0;
  bool warning = false;  ///< best t below epsilon
};

GrBalanceResult BalanceGaussianRandomization(const ChannelSet& channels, const Topology& topology,
                                             const std::vector<std::vector<CVector>>& sets,
                                             double epsilon, Execution execution,
                                             const conic::SolverOptions& solver = {});

// ---- per cell -------------------------------------------------------------

/// Cell problem of BS b at level t. With `caps` (indexed by pair) the
/// incoming ICI is assumed at its cap and the outgoing ICI is limited by
/// it; without, inter-cell interference is ignored. Matrix variables follow
/// groups_of_bs(b).
conic::ConicProblem AssembleCellFeasibility(int b, const ChannelSet& channels, const Topology& topology,
                                            const IciPairs& pairs, const Eigen::VectorXd* caps, double t);

struct CellBalanceResult {
  int b = 0;
  double t = 0.0;  ///< midpoint of the final bracket
  BisectionResult bisection;
  std::vector<CMatrix> W;  ///< per local group
  std::vector<int> rank;
  std::vector<CVector> w;  ///< per local group
  bool randomized = false;
  int indeterminate = 0;
  bool warning = false;
};

/// Per-cell balancing with fixed ICI caps; no backhaul messages.
CellBalanceResult LocalBalance(int b, const ChannelSet& channels, const Topology& topology,
                               const IciPairs& pairs, const Eigen::VectorXd& caps,
                               const BalancingOptions& options, Rng& rng);

/// Randomized per-cell balancing with the same caps; directions are per
/// local group.
GrBalanceResult LocalBalanceGr(int b, const ChannelSet& channels, const Topology& topology,
                               const IciPairs& pairs, const Eigen::VectorXd& caps,
                               const std::vector<std::vector<CVector>>& sets, double epsilon,
                               Execution execution, const conic::SolverOptions& solver = {});

/// Interference-blind per-cell balancing.
CellBalanceResult UncoordinatedBalance(int b, const ChannelSet& channels, const Topology& topology,
                                       const BalancingOptions& options, Rng& rng);

struct NetworkBalanceResult {
  std::vector<CellBalanceResult> cells;
  BeamformingSolution solution;
  double achieved = 0.0;
};

/// Every BS runs LocalBalance with the same uniform cap (cells in
/// parallel, each with its own random stream derived from `seed`).
NetworkBalanceResult DistributedBalance(const ChannelSet& channels, const Topology& topology,
                                        double theta_cap, const BalancingOptions& options,
                                        std::uint64_t seed);

NetworkBalanceResult UncoordinatedNetwork(const ChannelSet& channels, const Topology& topology,
                                          const BalancingOptions& options, std::uint64_t seed);

/// Min over users of the SINR with full interference. Throws StateError if
/// beamformers are missing.
double AchievedMinSinr(const ChannelSet& channels, const Topology& topology,
                       const BeamformingSolution& solution);

}  // namespace mcbf
