#include "mcbf/sweep.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "mcbf/admm.hpp"
#include "mcbf/backhaul.hpp"
#include "mcbf/balancing.hpp"
#include "mcbf/baselines.hpp"
#include "mcbf/errors.hpp"
#include "mcbf/network.hpp"
#include "mcbf/power_min.hpp"

namespace mcbf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Point {
  double gamma_db;
  double d_db;
  double p_max;
};

struct TaskOutput {
  std::vector<ResultRecord> records;              ///< scheme order, then theta order
  std::vector<std::vector<TraceRecord>> traces;   ///< per scheme position
};

void SetRanks(ResultRecord& r, const std::vector<int>& ranks) {
  if (ranks.empty()) return;
  r.rank_one = true;
  for (int k : ranks) r.rank_one = r.rank_one && k == 1;
  r.avg_rank = AverageRank(ranks);
}

void FromBaseline(ResultRecord& r, const BaselineResult& b) {
  r.feasible = b.feasible;
  r.relaxed = b.relaxed_power;
  r.randomized = b.randomized;
  r.signaling = b.log.Total();
  r.iterations = 1;
  if (b.feasible) {
    r.objective = SumPower(b.solution);
    SetRanks(r, b.solution.rank);
  } else {
    r.objective = kNaN;
    r.note = "infeasible";
  }
}

void FromDistributed(ResultRecord& r, const DistributedResult& d, std::vector<TraceRecord>& traces,
                     const Point& pt, bool keep_trace) {
  r.feasible = d.feasible;
  r.relaxed = d.relaxed_power;
  r.randomized = d.randomized;
  r.iterations = static_cast<int>(d.trace.size());
  r.signaling = d.log.Total();
  if (d.feasible) {
    r.objective = SumPower(d.solution);
    SetRanks(r, d.solution.rank);
  } else {
    r.objective = kNaN;
    r.note = d.solution.W.empty() ? "no feasible iterate" : "randomization failed";
  }
  if (keep_trace) {
    for (const auto& row : d.trace) traces.push_back({r.scheme, r.trial, pt.gamma_db, pt.d_db, row});
  }
}

void FromBalance(ResultRecord& r, const NetworkBalanceResult& n) {
  r.feasible = true;
  r.objective = n.achieved;
  double t = std::numeric_limits<double>::infinity();
  int calls = 0;
  for (const auto& c : n.cells) {
    t = std::min(t, c.t);
    calls = std::max(calls, static_cast<int>(c.bisection.calls.size()));
    r.randomized = r.randomized || c.randomized;
  }
  r.relaxed = n.cells.empty() ? kNaN : t;
  r.iterations = calls;
  SetRanks(r, n.solution.rank);
}

TaskOutput RunTask(const ScenarioConfig& config, const Point& pt, int trial, bool timing) {
  TopologyConfig tc;
  tc.B = config.B;
  tc.G = config.G;
  tc.U = config.U;
  tc.A = config.A;
  tc.gamma = DbToLinear(pt.gamma_db);
  tc.sigma2 = config.sigma2;
  tc.p_max = pt.p_max;
  tc.d = DbToLinear(pt.d_db);
  const Topology topology = BuildTopology(tc);
  const std::uint64_t channel_seed = TrialSeed(config.seed, static_cast<std::uint64_t>(trial));
  const ChannelSet channels = SampleChannels(topology, channel_seed);

  // Inner loops run serially: the sweep already parallelizes over tasks.
  CentralizedOptions central;
  central.gr_count = config.gr_count;
  central.execution = Execution::kSerial;
  BalancingOptions balance;
  balance.epsilon = config.epsilon;
  balance.gr_count = config.gr_count;
  balance.execution = Execution::kSerial;

  TaskOutput out;
  out.traces.resize(config.schemes.size());
  for (std::size_t si = 0; si < config.schemes.size(); ++si) {
    const Scheme scheme = config.schemes[si];
    const std::size_t thetas = UsesThetaGrid(scheme) ? config.theta_grid.size() : 1;
    for (std::size_t ti = 0; ti < thetas; ++ti) {
      ResultRecord r;
      r.scheme = ToString(scheme);
      r.trial = trial;
      r.seed = channel_seed;
      r.gamma_db = pt.gamma_db;
      r.d_db = pt.d_db;
      r.p_max = pt.p_max;
      r.theta = UsesThetaGrid(scheme) ? config.theta_grid[ti] : kNaN;
      const std::uint64_t gr_seed = TrialSeed(channel_seed, 1000 * (static_cast<std::uint64_t>(scheme) + 1) + ti);
      const auto start = std::chrono::steady_clock::now();
      try {
        switch (scheme) {
          case Scheme::kCentralized: {
            Rng rng(gr_seed);
            r.signaling = CentralizedSignalingLoad(topology.B, topology.U, topology.A);
            r.iterations = 1;
            try {
              const auto c = SolveCentralized(channels, topology, central, rng);
              r.feasible = true;
              r.objective = SumPower(c.solution);
              r.relaxed = c.sdr_objective;
              r.randomized = c.randomized;
              SetRanks(r, c.solution.rank);
            } catch (const RandomizationError& e) {
              r.objective = kNaN;
              r.relaxed = 0.0;
              for (const auto& W : e.sdr().W) r.relaxed += W.trace().real();
              r.randomized = true;
              SetRanks(r, e.sdr().rank);
              r.note = "randomization failed";
            }
            break;
          }
          case Scheme::kPrimalDecomp: {
            PrimalDecompositionOptions o;
            o.max_iters = config.iters;
            o.gr_count = config.gr_count;
            o.gr_seed = gr_seed;
            o.execution = Execution::kSerial;
            o.schedule.step = config.step_size;
            o.schedule.trust_factor = config.trust_factor;
            o.schedule.kind = config.step_schedule == "diminishing" ? StepSchedule::Kind::kDiminishing
                                                                    : StepSchedule::Kind::kFixed;
            FromDistributed(r, RunPrimalDecomposition(channels, topology, o), out.traces[si], pt,
                            config.record_traces);
            break;
          }
          case Scheme::kAdmm: {
            AdmmOptions o;
            o.max_iters = config.iters;
            o.gr_count = config.gr_count;
            o.gr_seed = gr_seed;
            o.execution = Execution::kSerial;
            o.rho = config.rho;
            FromDistributed(r, RunAdmm(channels, topology, o), out.traces[si], pt, config.record_traces);
            break;
          }
          case Scheme::kNulling:
            FromBaseline(r, SolveNulling(channels, topology, central, gr_seed));
            break;
          case Scheme::kFixedTheta:
            FromBaseline(r, SolveFixedTheta(channels, topology, r.theta, central, gr_seed));
            break;
          case Scheme::kCommonTheta:
            FromBaseline(r, SolveCommonTheta(channels, topology, central, gr_seed));
            break;
          case Scheme::kOrthogonal:
            FromBaseline(r, SolveOrthogonal(channels, topology, central, gr_seed));
            break;
          case Scheme::kBalanceCentralized: {
            Rng rng(gr_seed);
            const auto b = BisectBalance(channels, topology, balance, rng);
            r.feasible = true;
            r.objective = b.achieved;
            r.relaxed = b.t_star;
            r.randomized = b.randomized;
            r.iterations = static_cast<int>(b.bisection.calls.size());
            r.signaling = CentralizedSignalingLoad(topology.B, topology.U, topology.A);
            SetRanks(r, b.solution.rank);
            break;
          }
          case Scheme::kBalanceDistributed:
            FromBalance(r, DistributedBalance(channels, topology, r.theta, balance, gr_seed));
            break;
          case Scheme::kBalanceUncoordinated:
            FromBalance(r, UncoordinatedNetwork(channels, topology, balance, gr_seed));
            break;
        }
      } catch (const InfeasibleTargetError&) {
        r.feasible = false;
        r.objective = kNaN;
        r.note = "targets infeasible";
      } catch (const InitializationError&) {
        r.feasible = false;
        r.objective = kNaN;
        r.note = "infeasible at initial ICI levels";
      } catch (const IndeterminateError& e) {
        r.feasible = false;
        r.objective = kNaN;
        r.note = std::string("solver: ") + e.what();
      } catch (const StateError& e) {
        r.feasible = false;
        r.objective = kNaN;
        r.note = std::string("solver: ") + e.what();
      }
      if (timing) {
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

bool SameDouble(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

bool SameRecord(const ResultRecord& a, const ResultRecord& b, bool ignore_timing) {
  return a.scheme == b.scheme && a.trial == b.trial && a.seed == b.seed && SameDouble(a.gamma_db, b.gamma_db) &&
         SameDouble(a.d_db, b.d_db) && SameDouble(a.p_max, b.p_max) && SameDouble(a.theta, b.theta) &&
         a.feasible == b.feasible && SameDouble(a.objective, b.objective) && SameDouble(a.relaxed, b.relaxed) &&
         a.rank_one == b.rank_one && SameDouble(a.avg_rank, b.avg_rank) && a.randomized == b.randomized &&
         a.iterations == b.iterations && a.signaling == b.signaling &&
         (ignore_timing || SameDouble(a.wall_ms, b.wall_ms)) && a.note == b.note;
}

SweepOutput RunSweep(const ScenarioConfig& config, const SweepOptions& options) {
  std::vector<Point> points;
  for (double g : config.gamma_db) {
    for (double d : config.d_db) {
      for (double p : config.p_max) points.push_back({g, d, p});
    }
  }
  const int P = static_cast<int>(points.size());
  const int T = config.trials;
  std::vector<TaskOutput> tasks(static_cast<std::size_t>(P) * static_cast<std::size_t>(T));
  ForEachIndex(options.execution, P * T, [&](int i) {
    tasks[i] = RunTask(config, points[i / T], i % T, options.timing);
  });

  SweepOutput out;
  for (int p = 0; p < P; ++p) {
    const auto& first = tasks[static_cast<std::size_t>(p) * T];
    for (std::size_t k = 0; k < first.records.size(); ++k) {
      for (int t = 0; t < T; ++t) out.records.push_back(tasks[static_cast<std::size_t>(p) * T + t].records[k]);
    }
    for (std::size_t s = 0; s < config.schemes.size(); ++s) {
      for (int t = 0; t < T; ++t) {
        const auto& tr = tasks[static_cast<std::size_t>(p) * T + t].traces[s];
        out.traces.insert(out.traces.end(), tr.begin(), tr.end());
      }
    }
  }
  return out;
}

std::vector<SummaryRow> Summarize(const std::vector<ResultRecord>& records) {
  // Keyed by first appearance so the summary follows the record order.
  std::vector<SummaryRow> rows;
  std::vector<double> sum_higher;
  auto find = [&](const ResultRecord& r) -> std::size_t {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& s = rows[i];
      if (s.scheme == r.scheme && SameDouble(s.gamma_db, r.gamma_db) && SameDouble(s.d_db, r.d_db) &&
          SameDouble(s.p_max, r.p_max) && SameDouble(s.theta, r.theta)) {
        return i;
      }
    }
    SummaryRow s;
    s.scheme = r.scheme;
    s.gamma_db = r.gamma_db;
    s.d_db = r.d_db;
    s.p_max = r.p_max;
    s.theta = r.theta;
    rows.push_back(s);
    sum_higher.push_back(0.0);
    return rows.size() - 1;
  };
  for (const auto& r : records) {
    const std::size_t i = find(r);
    SummaryRow& s = rows[i];
    ++s.trials;
    s.mean_wall_ms += r.wall_ms;
    if (!r.feasible) {
      ++s.infeasible;
      continue;
    }
    ++s.feasible;
    s.mean_objective += r.objective;
    s.mean_relaxed += r.relaxed;
    s.mean_iterations += r.iterations;
    s.mean_signaling += static_cast<double>(r.signaling);
    if (r.rank_one) {
      ++s.rank_one;
    } else if (r.avg_rank > 0.0) {
      ++s.higher_rank;
      sum_higher[i] += r.avg_rank;
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SummaryRow& s = rows[i];
    s.mean_wall_ms /= s.trials;
    if (s.feasible > 0) {
      s.mean_objective /= s.feasible;
      s.mean_relaxed /= s.feasible;
      s.mean_iterations /= s.feasible;
      s.mean_signaling /= s.feasible;
    } else {
      s.mean_objective = s.mean_relaxed = s.mean_iterations = s.mean_signaling = kNaN;
    }
    s.mean_higher_rank = s.higher_rank > 0 ? sum_higher[i] / s.higher_rank : kNaN;
  }
  return rows;
}

}  // namespace mcbf
