#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "mcbf/network.hpp"

namespace mcbf {

/// Directed interference pairs (b, u) with u served by some other BS.
/// Canonical order: by interfering BS, then by user index.
class IciPairs {
 public:
  IciPairs() = default;
  explicit IciPairs(const Topology& topology);

  int size() const { return static_cast<int>(bs_.size()); }
  /// -1 when u is served by b.
  int index(int b, int u) const { return index_[b][u]; }
  int interferer(int k) const { return bs_[k]; }
  int user(int k) const { return user_[k]; }
  int server(int k) const { return server_[k]; }

  /// Pairs (b, u): interference caused by b.
  const std::vector<int>& outgoing(int b) const { return outgoing_[b]; }
  /// Pairs (j, u) with u served by b: interference received in cell b.
  const std::vector<int>& incoming(int b) const { return incoming_[b]; }
  /// Pairs (j, u) whose two ends are BS a and BS c, in canonical order.
  std::vector<int> between(int a, int c) const;

 private:
  std::vector<int> bs_;
  std::vector<int> user_;
  std::vector<int> server_;
  std::vector<std::vector<int>> index_;
  std::vector<std::vector<int>> outgoing_;
  std::vector<std::vector<int>> incoming_;
};

/// Which of the two BSs coupled by a pair holds a local copy.
enum PairSide { kInterfererSide = 0, kServerSide = 1 };

/// ICI variables of the distributed algorithms, one entry per pair.
struct IciState {
  Eigen::VectorXd theta;                      ///< global ICI levels
  std::array<Eigen::VectorXd, 2> theta_local;  ///< ADMM copies by side
  Eigen::VectorXd lambda;                     ///< SINR-row side, >= 0
  Eigen::VectorXd mu;                         ///< cap-row side, >= 0
  std::array<Eigen::VectorXd, 2> nu;          ///< ADMM duals by side

  static IciState Uniform(int num_pairs, double theta0);
};

constexpr double kMinTheta = 1e-10;

}  // namespace mcbf
