#pragma once

#include <Eigen/Dense>

#include "mcbf/primal_decomposition.hpp"

namespace mcbf {

/// Which copy of pair k BS b holds.
PairSide SideOf(const IciPairs& pairs, int b, int k);

/// Local augmented problem of BS b: its covariances plus a nonnegative
/// scalar copy of every pair touching b (outgoing and incoming), objective
/// BS power + nu'(copy - theta) + rho/2 |copy - theta|^2. `nu_b` is indexed
/// by pair and holds BS b's multipliers.
CellProblem AssembleAdmmLocal(int b, const ChannelSet& channels, const Topology& topology,
                              const IciPairs& pairs, const Eigen::VectorXd& theta_global,
                              const Eigen::VectorXd& nu_b, double rho);

/// Mean of the two copies.
double AdmmGlobalUpdate(double copy_a, double copy_b);

/// nu + rho (copy - theta).
double AdmmDualUpdate(double nu, double copy, double theta, double rho);

/// Global and dual steps on every pair: theta = mean of copies, then one
/// increment delta = rho (copy_interferer - theta) added to the interferer's
/// multiplier and subtracted from the server's, which is the same update
/// written so that the pair sum stays exactly zero.
void AdmmConsensusStep(IciState& state, double rho);

/// The fixed-ICI subproblem of BS b at theta_global; its solution satisfies
/// the coupled SINR constraints when every BS restores at the same theta.
CellSolve AdmmFeasibilityRestore(int b, const ChannelSet& channels, const Topology& topology,
                                 const IciPairs& pairs, const Eigen::VectorXd& theta_global,
                                 const conic::SolverOptions& solver = {});

struct AdmmOptions : DistributedOptions {
  double rho = 2.0;
};

struct AdmmDiagnostics {
  double max_pair_sum = 0.0;     ///< max |nu_a + nu_b| after any dual update
  double max_mean_error = 0.0;   ///< max |theta - (copy_a + copy_b)/2|
};

struct AdmmResult : DistributedResult {
  AdmmDiagnostics diagnostics;
};

/// Throws StateError if a local problem fails to solve.
AdmmResult RunAdmm(const ChannelSet& channels, const Topology& topology, const AdmmOptions& options);

}  // namespace mcbf
