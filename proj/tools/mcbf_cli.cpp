// Command-line front end: scenario sweeps, signaling loads and problem dumps.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "mcbf/backhaul.hpp"
#include "mcbf/balancing.hpp"
#include "mcbf/conic/text_dump.hpp"
#include "mcbf/errors.hpp"
#include "mcbf/network.hpp"
#include "mcbf/power_min.hpp"
#include "mcbf/results_io.hpp"
#include "mcbf/scenario.hpp"
#include "mcbf/sweep.hpp"

namespace {

using namespace mcbf;

void PrintSummary(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "scheme                 gamma_dB  d_dB   P_b   theta      feasible  mean_obj     rank1  higher_rank\n";
  for (const auto& s : rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%-22s %8.3g %5.3g %5.3g %9.3g %5d/%-4d %11.5g %5d %8s\n", s.scheme.c_str(),
                  s.gamma_db, s.d_db, s.p_max, s.theta, s.feasible, s.trials, s.mean_objective, s.rank_one,
                  FormatNumber(s.mean_higher_rank).c_str());
    out << line;
  }
}

int Run(const std::string& scenario, const std::string& out_path, const std::string& format_name, int trials,
        long long seed, bool serial, bool quiet) {
  ScenarioConfig config = ParseScenarioFile(scenario);
  if (trials > 0) config.trials = trials;
  if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
  const ResultFormat format = ParseFormat(format_name);
  SweepOptions options;
  options.execution = serial ? Execution::kSerial : Execution::kParallel;
  const SweepOutput output = RunSweep(config, options);
  if (out_path.empty()) {
    if (format == ResultFormat::kCsv) {
      WriteRecordsCsv(output.records, std::cout);
    } else {
      WriteRecordsJson(output.records, std::cout);
    }
  } else {
    EmitSweep(output, out_path, format);
  }
  if (!quiet) PrintSummary(Summarize(output.records), std::cerr);
  return 0;
}

int Signaling(int B, int U, int A) {
  const long long central = CentralizedSignalingLoad(B, U, A);
  const long long per_iter = PerIterationSignalingLoad(B, U);
  std::cout << "B,U,A,centralized,per_iteration,ratio\n"
            << B << ',' << U << ',' << A << ',' << central << ',' << per_iter << ','
            << FormatNumber(central > 0 ? static_cast<double>(per_iter) / static_cast<double>(central) : 0.0)
            << '\n';
  return 0;
}

int Dump(const std::string& scenario, const std::string& problem, int trial, double t, const std::string& out_path) {
  const ScenarioConfig config = ParseScenarioFile(scenario);
  TopologyConfig tc;
  tc.B = config.B;
  tc.G = config.G;
  tc.U = config.U;
  tc.A = config.A;
  tc.gamma = DbToLinear(config.gamma_db.front());
  tc.sigma2 = config.sigma2;
  tc.p_max = config.p_max.front();
  tc.d = DbToLinear(config.d_db.front());
  const Topology topology = BuildTopology(tc);
  const ChannelSet channels = SampleChannels(topology, TrialSeed(config.seed, static_cast<std::uint64_t>(trial)));
  conic::ConicProblem p;
  if (problem == "qos") {
    p = AssembleQosSdp(channels, topology);
  } else if (problem == "balance") {
    p = AssembleFeasibility(channels, topology, t);
  } else {
    throw ConfigError("unknown problem '" + problem + "' (expected qos or balance)");
  }
  if (out_path.empty()) {
    conic::WriteProblemText(p, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write '" + out_path + "'");
    conic::WriteProblemText(p, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated multicell multicast beamforming experiments"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_path;
  std::string format = "csv";
  int trials = 0;
  long long seed = -1;
  bool serial = false;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a scenario sweep");
  run->add_option("scenario", scenario, "Scenario YAML file")->required();
  run->add_option("--out", out_path, "Records file; traces and summary are written next to it");
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the master seed")->check(CLI::NonNegativeNumber);
  run->add_flag("--serial", serial, "Run trials serially (reference path)");
  run->add_flag("--quiet", quiet, "Do not print the summary table");

  int B = 2;
  int U = 8;
  int A = 8;
  auto* sig = app.add_subcommand("signaling", "Closed-form backhaul loads");
  sig->add_option("-B", B, "Base stations")->check(CLI::PositiveNumber);
  sig->add_option("-U", U, "Users")->check(CLI::PositiveNumber);
  sig->add_option("-A", A, "Antennas per BS")->check(CLI::PositiveNumber);

  std::string problem = "qos";
  int dump_trial = 0;
  double level = 1.0;
  std::string dump_out;
  auto* dump = app.add_subcommand("dump", "Write the relaxed problem of one trial in text form");
  dump->add_option("scenario", scenario, "Scenario YAML file")->required();
  dump->add_option("--problem", problem, "qos or balance");
  dump->add_option("--trial", dump_trial, "Trial index")->check(CLI::NonNegativeNumber);
  dump->add_option("--t", level, "SINR level of the balancing feasibility problem");
  dump->add_option("--out", dump_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return Run(scenario, out_path, format, trials, seed, serial, quiet);
    if (*sig) return Signaling(B, U, A);
    if (*dump) return Dump(scenario, problem, dump_trial, level, dump_out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
