#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcbf/errors.hpp"

namespace mcbf {

enum class Scheme {
  kCentralized,
  kPrimalDecomp,
  kAdmm,
  kNulling,
  kFixedTheta,
  kCommonTheta,
  kOrthogonal,
  kBalanceCentralized,
  kBalanceDistributed,
  kBalanceUncoordinated,
};

const char* ToString(Scheme s);
/// Accepts the canonical names; "fixed-θ" and "common-θ" are aliases.
/// Throws ConfigError for anything else.
Scheme ParseScheme(const std::string& name);
bool IsBalancing(Scheme s);
/// Schemes run once per point of the ICI grid.
bool UsesThetaGrid(Scheme s);

/// Scenario parse failure; `line` is 1-based, 0 when unknown.
class ScenarioError : public ConfigError {
 public:
  ScenarioError(const std::string& message, int line)
      : ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Parsed and validated scenario. Decibel values are kept as given;
/// conversion happens when a sweep point is built.
struct ScenarioConfig {
  std::string name;
  int B = 0;
  int G = 0;
  int U = 0;
  int A = 0;
  std::vector<double> gamma_db{0.0};
  std::vector<double> d_db{0.0};
  std::vector<double> p_max{1.0};  ///< watts per BS
  double sigma2 = 1.0;
  std::vector<Scheme> schemes;
  int iters = 100;
  int trials = 20;
  std::uint64_t seed = 1;
  double step_size = 0.3;
  std::string step_schedule = "fixed";  ///< fixed or diminishing
  double trust_factor = 2.0;
  double rho = 2.0;
  double epsilon = 1e-3;
  int gr_count = 100;
  std::vector<double> theta_grid{0.1};  ///< ICI levels, linear
  bool record_traces = true;
};

/// "a:step:b" (inclusive, optional trailing "dB"), a scalar, or a list.
std::vector<double> ExpandRange(const std::string& text);

ScenarioConfig ParseScenarioText(const std::string& yaml);
/// Throws ScenarioError on bad content and ConfigError when the file
/// cannot be read.
ScenarioConfig ParseScenarioFile(const std::string& path);

}  // namespace mcbf
