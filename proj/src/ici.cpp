#include "mcbf/ici.hpp"

namespace mcbf {

IciPairs::IciPairs(const Topology& topology) {
  index_.assign(topology.B, std::vector<int>(topology.U, -1));
  outgoing_.resize(topology.B);
  incoming_.resize(topology.B);
  for (int b = 0; b < topology.B; ++b) {
    for (int u : topology.out_of_cell_users(b)) {
      const int k = static_cast<int>(bs_.size());
      bs_.push_back(b);
      user_.push_back(u);
      server_.push_back(topology.bs_of_user(u));
      index_[b][u] = k;
      outgoing_[b].push_back(k);
      incoming_[server_.back()].push_back(k);
    }
  }
}

std::vector<int> IciPairs::between(int a, int c) const {
  std::vector<int> out;
  for (int k = 0; k < size(); ++k) {
    if ((bs_[k] == a && server_[k] == c) || (bs_[k] == c && server_[k] == a)) out.push_back(k);
  }
  return out;
}

IciState IciState::Uniform(int num_pairs, double theta0) {
  IciState s;
  s.theta = Eigen::VectorXd::Constant(num_pairs, theta0);
  s.theta_local = {s.theta, s.theta};
  s.lambda = Eigen::VectorXd::Zero(num_pairs);
  s.mu = Eigen::VectorXd::Zero(num_pairs);
  s.nu = {Eigen::VectorXd::Zero(num_pairs), Eigen::VectorXd::Zero(num_pairs)};
  return s;
}

}  // namespace mcbf
