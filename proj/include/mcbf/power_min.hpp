#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "mcbf/conic/problem.hpp"
#include "mcbf/conic/solver.hpp"
#include "mcbf/network.hpp"
#include "mcbf/parallel.hpp"

namespace mcbf {

/// Relaxed QoS problem: one A x A PSD variable per group (variable index
/// equals group index), one SINR row per user (row index equals user
/// index), objective sum_g Tr(W_g).
conic::ConicProblem AssembleQosSdp(const ChannelSet& channels, const Topology& topology);

struct CentralizedOptions {
  int gr_count = 100;
  double rank_tolerance = 1e-6;
  Execution execution = Execution::kParallel;
  conic::SolverOptions solver;
};

struct CentralizedResult {
  /// W and rank hold the relaxed optimum; w and p the returned beamformers.
  BeamformingSolution solution;
  double sdr_objective = 0.0;
  bool randomized = false;
  int feasible_candidates = 0;
  int selected_candidate = -1;
};

/// Raised when no randomization draw satisfies the targets. Carries the
/// relaxed solution.
class RandomizationError : public std::runtime_error {
 public:
  RandomizationError(const std::string& what, BeamformingSolution sdr)
      : std::runtime_error(what), sdr_(std::move(sdr)) {}
  const BeamformingSolution& sdr() const { return sdr_; }

 private:
  BeamformingSolution sdr_;
};

/// Solve, extract rank-one beamformers or fall back to Gaussian
/// randomization. Throws InfeasibleTargetError when the relaxation is
/// infeasible and RandomizationError when every draw fails.
CentralizedResult SolveCentralized(const ChannelSet& channels, const Topology& topology,
                                   const CentralizedOptions& options, Rng& rng);

/// `count` draws L z / |L z| with L L^H = W and z ~ CN(0, I).
std::vector<CVector> GaussianCandidates(const CMatrix& W, int count, Rng& rng);

/// Candidate sets [draw][group], drawn draw-major so the sequence does not
/// depend on how the LPs are later scheduled.
std::vector<std::vector<CVector>> DrawCandidateSets(const std::vector<CMatrix>& W, int count,
                                                   Rng& rng);

/// |h_{b(g),u}^H v_g|^2 for every user u and group g.
Eigen::MatrixXd DirectionGains(const ChannelSet& channels, const Topology& topology,
                               const std::vector<CVector>& directions);

/// Minimum sum power along fixed directions. nullopt when the LP is
/// infeasible (or the solver cannot certify an optimum).
std::optional<std::vector<double>> CandidatePowerLp(const ChannelSet& channels,
                                                    const Topology& topology,
                                                    const std::vector<CVector>& directions,
                                                    const conic::SolverOptions& solver = {});

/// Randomization over `sets`: runs the LP for each set and returns the
/// cheapest feasible one (lowest index on ties).
struct RandomizationOutcome {
  int selected = -1;
  int feasible = 0;
  std::vector<double> powers;
  std::vector<double> totals;  ///< per draw, +inf if infeasible
};

RandomizationOutcome RandomizePowerMin(const ChannelSet& channels, const Topology& topology,
                                       const std::vector<std::vector<CVector>>& sets,
                                       Execution execution, const conic::SolverOptions& solver = {});

/// Average rank over groups, the statistic used for higher-rank solutions.
double AverageRank(const std::vector<int>& ranks);

}  // namespace mcbf
