#pragma once

// Shared setup for the network-level tests.

#include <cstdint>
#include <vector>

#include "mcbf/network.hpp"

namespace fixtures {

struct Instance {
  mcbf::Topology topology;
  mcbf::ChannelSet channels;
};

inline Instance Make(int B, int G, int U, int A, double gamma_db, double d_db, std::uint64_t seed,
                     double p_max = 1.0) {
  mcbf::TopologyConfig c;
  c.B = B;
  c.G = G;
  c.U = U;
  c.A = A;
  c.gamma = mcbf::DbToLinear(gamma_db);
  c.d = mcbf::DbToLinear(d_db);
  c.p_max = p_max;
  Instance in;
  in.topology = mcbf::BuildTopology(c);
  in.channels = mcbf::SampleChannels(in.topology, seed);
  return in;
}

// h[b][u] copied out of the channel set for the scalar oracles.
inline std::vector<std::vector<Eigen::VectorXcd>> RawChannels(const Instance& in) {
  std::vector<std::vector<Eigen::VectorXcd>> h(static_cast<std::size_t>(in.topology.B));
  for (int b = 0; b < in.topology.B; ++b) {
    for (int u = 0; u < in.topology.U; ++u) h[b].push_back(in.channels.h(b, u));
  }
  return h;
}

}  // namespace fixtures
