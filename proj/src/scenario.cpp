#include "mcbf/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mcbf {

namespace {

struct SchemeName {
  Scheme scheme;
  const char* name;
};

constexpr SchemeName kSchemeNames[] = {
    {Scheme::kCentralized, "centralized"},
    {Scheme::kPrimalDecomp, "primal-decomp"},
    {Scheme::kAdmm, "admm"},
    {Scheme::kNulling, "nulling"},
    {Scheme::kFixedTheta, "fixed-theta"},
    {Scheme::kCommonTheta, "common-theta"},
    {Scheme::kOrthogonal, "orthogonal"},
    {Scheme::kBalanceCentralized, "balance-centralized"},
    {Scheme::kBalanceDistributed, "balance-distributed"},
    {Scheme::kBalanceUncoordinated, "balance-uncoordinated"},
};

std::string Trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

int LineOf(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

double ParseNumber(const std::string& text) {
  const std::string t = Trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + text + "'");
  }
  if (used != t.size() || !std::isfinite(v)) throw ConfigError("not a number: '" + text + "'");
  return v;
}

template <class T>
T Scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ScenarioError("field '" + key + "' has the wrong type", LineOf(node));
  }
}

std::vector<double> NumberList(const YAML::Node& node, const std::string& key) {
  std::vector<double> out;
  try {
    if (node.IsSequence()) {
      for (const auto& item : node) out.push_back(ParseNumber(item.as<std::string>()));
    } else if (node.IsScalar()) {
      out = ExpandRange(node.as<std::string>());
    } else {
      throw ConfigError("expected a number, a list or a range");
    }
  } catch (const ConfigError& e) {
    if (dynamic_cast<const ScenarioError*>(&e)) throw;
    throw ScenarioError("field '" + key + "': " + e.what(), LineOf(node));
  }
  if (out.empty()) throw ScenarioError("field '" + key + "' is empty", LineOf(node));
  return out;
}

}  // namespace

const char* ToString(Scheme s) {
  for (const auto& n : kSchemeNames) {
    if (n.scheme == s) return n.name;
  }
  return "unknown";
}

Scheme ParseScheme(const std::string& name) {
  const std::string t = Trim(name);
  for (const auto& n : kSchemeNames) {
    if (t == n.name) return n.scheme;
  }
  if (t == "fixed-θ") return Scheme::kFixedTheta;
  if (t == "common-θ") return Scheme::kCommonTheta;
  throw ConfigError("unknown scheme '" + name + "'");
}

bool IsBalancing(Scheme s) {
  return s == Scheme::kBalanceCentralized || s == Scheme::kBalanceDistributed ||
         s == Scheme::kBalanceUncoordinated;
}

bool UsesThetaGrid(Scheme s) { return s == Scheme::kFixedTheta || s == Scheme::kBalanceDistributed; }

std::vector<double> ExpandRange(const std::string& text) {
  std::string t = Trim(text);
  if (t.size() >= 2) {
    std::string tail = t.substr(t.size() - 2);
    std::transform(tail.begin(), tail.end(), tail.begin(), [](unsigned char c) { return std::tolower(c); });
    if (tail == "db") t = Trim(t.substr(0, t.size() - 2));
  }
  if (t.find(':') == std::string::npos) return {ParseNumber(t)};
  std::vector<std::string> parts;
  std::stringstream ss(t);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 3) throw ConfigError("range must be start:step:stop, got '" + text + "'");
  const double a = ParseNumber(parts[0]);
  const double step = ParseNumber(parts[1]);
  const double b = ParseNumber(parts[2]);
  if (step == 0.0 || (b - a) * step < 0.0) throw ConfigError("range step does not reach the end in '" + text + "'");
  const int n = static_cast<int>(std::floor((b - a) / step + 1e-9)) + 1;
  if (n > 100000) throw ConfigError("range '" + text + "' has too many points");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a + i * step);
  return out;
}

ScenarioConfig ParseScenarioText(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  if (!root.IsMap()) throw ScenarioError("scenario must be a mapping", LineOf(root));

  static const std::set<std::string> kKeys = {
      "name", "network", "gamma_db", "d_db", "sigma2", "p_max", "schemes", "iters", "trials",
      "seed", "step_size", "step_schedule", "trust_factor", "rho", "epsilon", "gr_count",
      "theta_grid", "traces"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kKeys.count(key)) throw ScenarioError("unknown field '" + key + "'", LineOf(kv.first));
  }

  ScenarioConfig c;
  if (root["name"]) c.name = Scalar<std::string>(root["name"], "name");

  const YAML::Node net = root["network"];
  if (!net) throw ScenarioError("missing field 'network'", LineOf(root));
  if (!net.IsMap()) throw ScenarioError("field 'network' must be a mapping", LineOf(net));
  for (const auto& kv : net) {
    const auto key = kv.first.as<std::string>();
    if (key != "B" && key != "G" && key != "U" && key != "A") {
      throw ScenarioError("unknown field 'network." + key + "'", LineOf(kv.first));
    }
  }
  auto count = [&](const char* key, int& out) {
    const YAML::Node n = net[key];
    if (!n) throw ScenarioError(std::string("missing field 'network.") + key + "'", LineOf(net));
    out = Scalar<int>(n, std::string("network.") + key);
    if (out <= 0) throw ScenarioError(std::string("field 'network.") + key + "' must be positive", LineOf(n));
  };
  count("B", c.B);
  count("G", c.G);
  count("U", c.U);
  count("A", c.A);
  if (c.G % c.B != 0) throw ScenarioError("network.G must be a multiple of network.B", LineOf(net));
  if (c.U % c.G != 0) throw ScenarioError("network.U must be a multiple of network.G", LineOf(net));

  if (root["gamma_db"]) c.gamma_db = NumberList(root["gamma_db"], "gamma_db");
  if (root["d_db"]) c.d_db = NumberList(root["d_db"], "d_db");
  if (root["p_max"]) c.p_max = NumberList(root["p_max"], "p_max");
  if (root["theta_grid"]) c.theta_grid = NumberList(root["theta_grid"], "theta_grid");
  for (double d : c.d_db) {
    if (d < 0.0) throw ScenarioError("d_db must be >= 0 (cross-cell gain cannot exceed the serving one)", LineOf(root["d_db"]));
  }
  for (double p : c.p_max) {
    if (!(p > 0.0)) throw ScenarioError("p_max must be positive", LineOf(root["p_max"]));
  }
  for (double t : c.theta_grid) {
    if (!(t >= 0.0)) throw ScenarioError("theta_grid values must be nonnegative", LineOf(root["theta_grid"]));
  }

  auto positive = [&](const char* key, double& out) {
    if (!root[key]) return;
    out = Scalar<double>(root[key], key);
    if (!(out > 0.0) || !std::isfinite(out)) throw ScenarioError(std::string("field '") + key + "' must be positive", LineOf(root[key]));
  };
  positive("sigma2", c.sigma2);
  positive("step_size", c.step_size);
  positive("rho", c.rho);
  positive("epsilon", c.epsilon);
  if (root["trust_factor"]) {
    c.trust_factor = Scalar<double>(root["trust_factor"], "trust_factor");
    if (c.trust_factor != 0.0 && !(c.trust_factor > 1.0)) {
      throw ScenarioError("trust_factor must be 0 (off) or greater than 1", LineOf(root["trust_factor"]));
    }
  }
  auto positive_int = [&](const char* key, int& out) {
    if (!root[key]) return;
    out = Scalar<int>(root[key], key);
    if (out <= 0) throw ScenarioError(std::string("field '") + key + "' must be positive", LineOf(root[key]));
  };
  positive_int("iters", c.iters);
  positive_int("trials", c.trials);
  positive_int("gr_count", c.gr_count);
  if (root["seed"]) c.seed = Scalar<std::uint64_t>(root["seed"], "seed");
  if (root["traces"]) c.record_traces = Scalar<bool>(root["traces"], "traces");
  if (root["step_schedule"]) {
    c.step_schedule = Scalar<std::string>(root["step_schedule"], "step_schedule");
    if (c.step_schedule != "fixed" && c.step_schedule != "diminishing") {
      throw ScenarioError("step_schedule must be 'fixed' or 'diminishing'", LineOf(root["step_schedule"]));
    }
  }

  const YAML::Node schemes = root["schemes"];
  if (!schemes) throw ScenarioError("missing field 'schemes'", LineOf(root));
  if (!schemes.IsSequence() || schemes.size() == 0) {
    throw ScenarioError("field 'schemes' must be a non-empty list", LineOf(schemes));
  }
  for (const auto& s : schemes) {
    try {
      const Scheme parsed = ParseScheme(Scalar<std::string>(s, "schemes"));
      if (std::find(c.schemes.begin(), c.schemes.end(), parsed) != c.schemes.end()) {
        throw ConfigError(std::string("scheme '") + ToString(parsed) + "' listed twice");
      }
      c.schemes.push_back(parsed);
    } catch (const ScenarioError&) {
      throw;
    } catch (const ConfigError& e) {
      throw ScenarioError(e.what(), LineOf(s));
    }
  }
  return c;
}

ScenarioConfig ParseScenarioFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseScenarioText(ss.str());
}

}  // namespace mcbf
