#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace mcbf {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

struct TopologyConfig {
  int B = 1;  ///< base stations
  int G = 1;  ///< multicast groups in the network
  int U = 1;  ///< users in the network
  int A = 1;  ///< antennas per BS
  double gamma = 1.0;   ///< SINR target, linear, applied to every user
  double sigma2 = 1.0;  ///< noise power, watts
  double p_max = 1.0;   ///< per-BS power limit, watts (balancing only)
  double d = 1.0;       ///< cell separation, linear
};

/// Index structure of the network. User u belongs to group u mod G and
/// group g is served by BS g mod B.
struct Topology {
  int B = 0;
  int A = 0;
  int G = 0;
  int U = 0;
  std::vector<int> group_of_user;
  std::vector<int> bs_of_group;
  std::vector<double> gamma;
  std::vector<double> p_max;
  std::vector<double> sigma2;
  double d = 1.0;

  int bs_of_user(int u) const { return bs_of_group[group_of_user[u]]; }
  std::vector<int> groups_of_bs(int b) const;
  std::vector<int> users_of_group(int g) const;
  std::vector<int> users_of_bs(int b) const;
  /// Users not served by b, in increasing index order.
  std::vector<int> out_of_cell_users(int b) const;

  /// Throws ConfigError when an invariant is broken.
  void Validate() const;
};

/// Throws ConfigError on nonpositive counts or uneven splits.
Topology BuildTopology(const TopologyConfig& config);

/// Effective channels h[b][u] (cross-cell entries already attenuated) and
/// their outer products.
class ChannelSet {
 public:
  ChannelSet() = default;
  /// vectors[b][u]; all of equal length.
  explicit ChannelSet(std::vector<std::vector<CVector>> vectors);

  int num_bs() const { return static_cast<int>(h_.size()); }
  int num_users() const { return h_.empty() ? 0 : static_cast<int>(h_[0].size()); }
  const CVector& h(int b, int u) const { return h_[b][u]; }
  const CMatrix& H(int b, int u) const { return H_[b][u]; }

 private:
  std::vector<std::vector<CVector>> h_;
  std::vector<std::vector<CMatrix>> H_;
};

/// Rayleigh channels, CN(0,1) per entry, cross-cell vectors scaled by
/// sqrt(1/d). Deterministic in `seed`.
ChannelSet SampleChannels(const Topology& topology, std::uint64_t seed);

/// Seed for trial `trial` of a run started from `master`.
std::uint64_t TrialSeed(std::uint64_t master, std::uint64_t trial);

/// Standard circularly-symmetric complex normal vector.
CVector ComplexNormal(int n, Rng& rng);

struct BeamformingSolution {
  std::vector<CMatrix> W;
  std::optional<std::vector<CVector>> w;
  std::vector<double> p;
  std::vector<int> rank;  ///< numerical rank of W[g]
  double objective = 0.0;

  /// Fills w[g] = sqrt(lambda_1) u_1 from each W[g] and p[g] = |w|^2.
  void ExtractPrincipal();
  /// Sets w and p from unit directions and powers. W is left as is (it
  /// keeps the relaxed optimum when the beamformers came from randomization).
  void SetBeamformers(const std::vector<CVector>& directions, const std::vector<double>& powers);
  bool all_rank_one() const;
};

/// One BS with its own groups and users, re-indexed from zero, as a
/// single-cell network. Channels are those of the serving BS only.
struct CellView {
  Topology topology;
  ChannelSet channels;
  std::vector<int> groups;  ///< network group index of local group i
  std::vector<int> users;   ///< network user index of local user i
};

CellView RestrictToCell(const Topology& topology, const ChannelSet& channels, int b);

/// SINR of user u with full intra- and inter-cell interference.
/// Throws StateError if beamformers are missing.
double EvaluateSinr(const ChannelSet& channels, const Topology& topology,
                    const BeamformingSolution& solution, int u);

/// Minimum of EvaluateSinr over all users.
double MinSinr(const ChannelSet& channels, const Topology& topology,
               const BeamformingSolution& solution);

/// (1 + gamma)^B - 1.
double OrthogonalEquivalentTarget(double gamma, int B);

/// Sum of |w_g|^2 when beamformers are present, otherwise sum of Tr(W_g).
double SumPower(const BeamformingSolution& solution);

double DbToLinear(double db);
double LinearToDb(double linear);

}  // namespace mcbf
