#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mcbf/backhaul.hpp"
#include "mcbf/conic/problem.hpp"
#include "mcbf/ici.hpp"
#include "mcbf/network.hpp"
#include "mcbf/power_min.hpp"

namespace mcbf {

// Reference schemes for power minimization: fixed or jointly chosen ICI
// levels, interference nulling and orthogonal access.

struct BaselineResult {
  bool feasible = false;
  BeamformingSolution solution;  ///< per network group
  double relaxed_power = 0.0;    ///< relaxed optimum of the scheme
  bool randomized = false;
  Eigen::VectorXd theta;         ///< ICI levels used (fixed and common schemes)
  MessageLog log;
};

/// Every BS solves its subproblem with all ICI levels equal to `theta`.
/// Infeasible when some subproblem is.
BaselineResult SolveFixedTheta(const ChannelSet& channels, const Topology& topology, double theta,
                               const CentralizedOptions& options, std::uint64_t gr_seed);

/// Relaxed problem with one shared ICI level: a matrix variable per group
/// and scalar variable 0 for the level.
conic::ConicProblem AssembleCommonThetaSdp(const ChannelSet& channels, const Topology& topology);

/// Solves for the best shared level, then finishes as SolveFixedTheta.
BaselineResult SolveCommonTheta(const ChannelSet& channels, const Topology& topology,
                                const CentralizedOptions& options, std::uint64_t gr_seed);

/// Orthonormal basis of the vectors orthogonal to every channel from BS b
/// to a user of another cell (A x n, n may be 0).
Eigen::MatrixXcd NullSpaceBasis(int b, const ChannelSet& channels, const Topology& topology);

/// Zero ICI: each cell solves its own problem inside the null space of its
/// out-of-cell channels.
BaselineResult SolveNulling(const ChannelSet& channels, const Topology& topology,
                            const CentralizedOptions& options, std::uint64_t gr_seed);

/// Each BS serves its users in its own slot at target
/// OrthogonalEquivalentTarget(gamma, B); power is the sum over BSs.
BaselineResult SolveOrthogonal(const ChannelSet& channels, const Topology& topology,
                               const CentralizedOptions& options, std::uint64_t gr_seed);

}  // namespace mcbf
