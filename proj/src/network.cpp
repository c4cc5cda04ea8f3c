#include "mcbf/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mcbf/conic/eigen_tools.hpp"
#include "mcbf/errors.hpp"

namespace mcbf {

std::vector<int> Topology::groups_of_bs(int b) const {
  std::vector<int> out;
  for (int g = 0; g < G; ++g) {
    if (bs_of_group[g] == b) out.push_back(g);
  }
  return out;
}

std::vector<int> Topology::users_of_group(int g) const {
  std::vector<int> out;
  for (int u = 0; u < U; ++u) {
    if (group_of_user[u] == g) out.push_back(u);
  }
  return out;
}

std::vector<int> Topology::users_of_bs(int b) const {
  std::vector<int> out;
  for (int u = 0; u < U; ++u) {
    if (bs_of_user(u) == b) out.push_back(u);
  }
  return out;
}

std::vector<int> Topology::out_of_cell_users(int b) const {
  std::vector<int> out;
  for (int u = 0; u < U; ++u) {
    if (bs_of_user(u) != b) out.push_back(u);
  }
  return out;
}

void Topology::Validate() const {
  if (B < 1 || A < 1 || G < 1 || U < 1) throw ConfigError("B, A, G and U must be positive");
  if (static_cast<int>(group_of_user.size()) != U || static_cast<int>(gamma.size()) != U ||
      static_cast<int>(sigma2.size()) != U) {
    throw ConfigError("per-user tables must have U entries");
  }
  if (static_cast<int>(bs_of_group.size()) != G) throw ConfigError("bs_of_group must have G entries");
  if (static_cast<int>(p_max.size()) != B) throw ConfigError("p_max must have B entries");
  for (int u = 0; u < U; ++u) {
    if (group_of_user[u] < 0 || group_of_user[u] >= G) throw ConfigError("user mapped to unknown group");
    if (!(gamma[u] > 0.0)) throw ConfigError("gamma must be positive");
    if (!(sigma2[u] > 0.0)) throw ConfigError("sigma2 must be positive");
  }
  for (int g = 0; g < G; ++g) {
    if (bs_of_group[g] < 0 || bs_of_group[g] >= B) throw ConfigError("group mapped to unknown BS");
    if (users_of_group(g).empty()) throw ConfigError("group without users");
  }
  for (double p : p_max) {
    if (!(p > 0.0)) throw ConfigError("p_max must be positive");
  }
  if (!(d >= 1.0)) throw ConfigError("cell separation d must be >= 1 (linear)");
}

Topology BuildTopology(const TopologyConfig& c) {
  if (c.B < 1 || c.G < 1 || c.U < 1 || c.A < 1) {
    throw ConfigError("B, G, U and A must all be positive");
  }
  if (c.G % c.B != 0) {
    std::ostringstream os;
    os << "G=" << c.G << " is not divisible by B=" << c.B;
    throw ConfigError(os.str());
  }
  if (c.U % c.G != 0) {
    std::ostringstream os;
    os << "U=" << c.U << " is not divisible by G=" << c.G;
    throw ConfigError(os.str());
  }
  Topology t;
  t.B = c.B;
  t.A = c.A;
  t.G = c.G;
  t.U = c.U;
  t.d = c.d;
  t.group_of_user.resize(c.U);
  for (int u = 0; u < c.U; ++u) t.group_of_user[u] = u % c.G;
  t.bs_of_group.resize(c.G);
  for (int g = 0; g < c.G; ++g) t.bs_of_group[g] = g % c.B;
  t.gamma.assign(c.U, c.gamma);
  t.sigma2.assign(c.U, c.sigma2);
  t.p_max.assign(c.B, c.p_max);
  t.Validate();
  return t;
}

ChannelSet::ChannelSet(std::vector<std::vector<CVector>> vectors) : h_(std::move(vectors)) {
  H_.resize(h_.size());
  for (std::size_t b = 0; b < h_.size(); ++b) {
    H_[b].reserve(h_[b].size());
    for (const auto& v : h_[b]) H_[b].push_back(v * v.adjoint());
  }
}

CVector ComplexNormal(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CVector z(n);
  for (int i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    z(i) = {re, im};
  }
  return z;
}

std::uint64_t TrialSeed(std::uint64_t master, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

ChannelSet SampleChannels(const Topology& topology, std::uint64_t seed) {
  Rng rng(seed);
  const double cross = std::sqrt(1.0 / topology.d);
  std::vector<std::vector<CVector>> h(topology.B);
  for (int b = 0; b < topology.B; ++b) {
    h[b].reserve(topology.U);
    for (int u = 0; u < topology.U; ++u) {
      CVector v = ComplexNormal(topology.A, rng);
      if (topology.bs_of_user(u) != b) v *= cross;
      h[b].push_back(std::move(v));
    }
  }
  return ChannelSet(std::move(h));
}

void BeamformingSolution::ExtractPrincipal() {
  std::vector<CVector> out;
  p.assign(W.size(), 0.0);
  for (std::size_t g = 0; g < W.size(); ++g) {
    const auto pair = conic::PrincipalEigenpair(W[g]);
    out.push_back(std::sqrt(std::max(pair.value, 0.0)) * pair.vector);
    p[g] = out.back().squaredNorm();
  }
  w = std::move(out);
}

void BeamformingSolution::SetBeamformers(const std::vector<CVector>& directions,
                                         const std::vector<double>& powers) {
  std::vector<CVector> out;
  for (std::size_t g = 0; g < directions.size(); ++g) {
    out.push_back(std::sqrt(powers[g]) * directions[g]);
  }
  p = powers;
  w = std::move(out);
}

bool BeamformingSolution::all_rank_one() const {
  for (int r : rank) {
    if (r != 1) return false;
  }
  return !rank.empty();
}

CellView RestrictToCell(const Topology& topology, const ChannelSet& channels, int b) {
  CellView view;
  view.groups = topology.groups_of_bs(b);
  view.users = topology.users_of_bs(b);
  Topology& t = view.topology;
  t.B = 1;
  t.A = topology.A;
  t.G = static_cast<int>(view.groups.size());
  t.U = static_cast<int>(view.users.size());
  t.d = topology.d;
  t.bs_of_group.assign(t.G, 0);
  t.p_max = {topology.p_max[b]};
  std::vector<std::vector<CVector>> h(1);
  for (int u : view.users) {
    const int g = topology.group_of_user[u];
    const auto it = std::find(view.groups.begin(), view.groups.end(), g);
    t.group_of_user.push_back(static_cast<int>(it - view.groups.begin()));
    t.gamma.push_back(topology.gamma[u]);
    t.sigma2.push_back(topology.sigma2[u]);
    h[0].push_back(channels.h(b, u));
  }
  view.channels = ChannelSet(std::move(h));
  return view;
}

double EvaluateSinr(const ChannelSet& channels, const Topology& topology,
                    const BeamformingSolution& solution, int u) {
  if (!solution.w || static_cast<int>(solution.w->size()) != topology.G) {
    throw StateError("SINR evaluation needs a beamformer for every group");
  }
  const auto& w = *solution.w;
  const int g = topology.group_of_user[u];
  double signal = 0.0;
  double interference = 0.0;
  for (int k = 0; k < topology.G; ++k) {
    const int j = topology.bs_of_group[k];
    const double gain = std::norm(channels.h(j, u).dot(w[k]));
    if (k == g) {
      signal = gain;
    } else {
      interference += gain;
    }
  }
  return signal / (topology.sigma2[u] + interference);
}

double MinSinr(const ChannelSet& channels, const Topology& topology,
               const BeamformingSolution& solution) {
  double best = std::numeric_limits<double>::infinity();
  for (int u = 0; u < topology.U; ++u) {
    best = std::min(best, EvaluateSinr(channels, topology, solution, u));
  }
  return best;
}

double OrthogonalEquivalentTarget(double gamma, int B) {
  return std::pow(1.0 + gamma, B) - 1.0;
}

double SumPower(const BeamformingSolution& solution) {
  double total = 0.0;
  if (solution.w) {
    for (const auto& v : *solution.w) total += v.squaredNorm();
    return total;
  }
  for (const auto& m : solution.W) total += m.trace().real();
  return total;
}

double DbToLinear(double db) { return std::pow(10.0, db / 10.0); }

double LinearToDb(double linear) { return 10.0 * std::log10(linear); }

}  // namespace mcbf
