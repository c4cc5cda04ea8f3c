#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "mcbf/backhaul.hpp"
#include "mcbf/conic/solver.hpp"
#include "mcbf/ici.hpp"
#include "mcbf/network.hpp"
#include "mcbf/parallel.hpp"

namespace mcbf {

/// Power LP of BS b along fixed directions (one per group of b, in
/// groups_of_bs order) with incoming ICI fixed at theta and outgoing ICI
/// capped by theta. nullopt when infeasible.
std::optional<std::vector<double>> LocalCandidatePowerLp(int b, const ChannelSet& channels,
                                                         const Topology& topology,
                                                         const IciPairs& pairs,
                                                         const Eigen::VectorXd& theta,
                                                         const std::vector<CVector>& directions,
                                                         const conic::SolverOptions& solver = {});

struct LocalCandidates {
  std::vector<std::vector<CVector>> sets;  ///< [draw][local group]
  std::vector<double> totals;              ///< BS power per draw, +inf if infeasible
  std::vector<std::vector<double>> powers;  ///< [draw][local group], empty if infeasible
};

/// BS-local half: draws `count` candidate sets from the local covariances
/// and solves the LP for each.
LocalCandidates DistributedGaussianRandomization(int b, const std::vector<CMatrix>& W_b,
                                                 const Eigen::VectorXd& theta_star,
                                                 const ChannelSet& channels,
                                                 const Topology& topology, const IciPairs& pairs,
                                                 int count, Rng& rng, Execution execution,
                                                 const conic::SolverOptions& solver = {});

struct DistributedSelection {
  int selected = -1;  ///< common draw index, -1 if no draw is feasible at every BS
  double total = 0.0;
  std::vector<CVector> w;  ///< network beamformers per group
  std::vector<double> p;   ///< per group
};

/// Runs the local halves, publishes every BS's per-draw powers on the bus
/// (count scalars per BS, tag gr-power) and selects the draw with the lowest
/// network power, ties to the lowest index. Every BS evaluates the same
/// selection rule on the same published data.
DistributedSelection SelectDistributedCandidate(const std::vector<std::vector<CMatrix>>& W_by_bs,
                                                const Eigen::VectorXd& theta_star,
                                                const ChannelSet& channels,
                                                const Topology& topology, const IciPairs& pairs,
                                                int count, std::uint64_t seed, Backhaul& bus,
                                                Execution execution,
                                                const conic::SolverOptions& solver = {});

}  // namespace mcbf
