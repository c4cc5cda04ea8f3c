#include "mcbf/results_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <ostream>

#include "mcbf/errors.hpp"

namespace mcbf {

namespace {

using nlohmann::json;

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

double Rounded(double v) { return std::isfinite(v) ? std::stod(FormatNumber(v)) : v; }

json Number(double v) {
  if (std::isnan(v)) return nullptr;
  return Rounded(v);
}

double ToDouble(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

void WriteHeader(const std::vector<std::string>& cols, std::ostream& out) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

std::ofstream OpenOut(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

void CheckStream(std::ostream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

ResultFormat ParseFormat(const std::string& name) {
  if (name == "csv") return ResultFormat::kCsv;
  if (name == "json") return ResultFormat::kJson;
  throw ConfigError("unknown format '" + name + "' (expected csv or json)");
}

const std::vector<std::string>& RecordColumns() {
  static const std::vector<std::string> cols = {
      "scheme",   "trial",     "seed",     "gamma_db",   "d_db",       "p_max",     "theta",
      "feasible", "objective", "relaxed",  "rank_one",   "avg_rank",   "randomized", "iterations",
      "signaling", "wall_ms",  "note"};
  return cols;
}

const std::vector<std::string>& TraceColumns() {
  static const std::vector<std::string> cols = {
      "scheme",     "trial",    "gamma_db",      "d_db",    "iteration",  "sum_power",
      "feasible_power", "best_power", "residual", "dual_residual", "scalars", "backtracks"};
  return cols;
}

const std::vector<std::string>& SummaryColumns() {
  static const std::vector<std::string> cols = {
      "scheme",         "gamma_db",        "d_db",          "p_max",        "theta",
      "trials",         "feasible",        "infeasible",    "mean_objective", "mean_relaxed",
      "rank_one",       "higher_rank",     "mean_higher_rank", "mean_iterations", "mean_signaling",
      "mean_wall_ms"};
  return cols;
}

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void WriteRecordsCsv(const std::vector<ResultRecord>& records, std::ostream& out) {
  WriteHeader(RecordColumns(), out);
  for (const auto& r : records) {
    out << CsvField(r.scheme) << ',' << r.trial << ',' << r.seed << ',' << FormatNumber(r.gamma_db) << ','
        << FormatNumber(r.d_db) << ',' << FormatNumber(r.p_max) << ',' << FormatNumber(r.theta) << ','
        << (r.feasible ? 1 : 0) << ',' << FormatNumber(r.objective) << ',' << FormatNumber(r.relaxed) << ','
        << (r.rank_one ? 1 : 0) << ',' << FormatNumber(r.avg_rank) << ',' << (r.randomized ? 1 : 0) << ','
        << r.iterations << ',' << r.signaling << ',' << FormatNumber(r.wall_ms) << ',' << CsvField(r.note)
        << '\n';
  }
}

void WriteRecordsJson(const std::vector<ResultRecord>& records, std::ostream& out) {
  json arr = json::array();
  for (const auto& r : records) {
    json j = json::object();
    j["scheme"] = r.scheme;
    j["trial"] = r.trial;
    j["seed"] = r.seed;
    j["gamma_db"] = Number(r.gamma_db);
    j["d_db"] = Number(r.d_db);
    j["p_max"] = Number(r.p_max);
    j["theta"] = Number(r.theta);
    j["feasible"] = r.feasible;
    j["objective"] = Number(r.objective);
    j["relaxed"] = Number(r.relaxed);
    j["rank_one"] = r.rank_one;
    j["avg_rank"] = Number(r.avg_rank);
    j["randomized"] = r.randomized;
    j["iterations"] = r.iterations;
    j["signaling"] = r.signaling;
    j["wall_ms"] = Number(r.wall_ms);
    j["note"] = r.note;
    arr.push_back(std::move(j));
  }
  json doc = json::object();
  doc["columns"] = RecordColumns();
  doc["records"] = std::move(arr);
  out << doc.dump(1) << '\n';
}

std::vector<ResultRecord> ReadRecordsJson(std::istream& in) {
  std::vector<ResultRecord> records;
  try {
    const json doc = json::parse(in);
    for (const auto& j : doc.at("records")) {
      ResultRecord r;
      r.scheme = j.at("scheme").get<std::string>();
      r.trial = j.at("trial").get<int>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.gamma_db = ToDouble(j.at("gamma_db"));
      r.d_db = ToDouble(j.at("d_db"));
      r.p_max = ToDouble(j.at("p_max"));
      r.theta = ToDouble(j.at("theta"));
      r.feasible = j.at("feasible").get<bool>();
      r.objective = ToDouble(j.at("objective"));
      r.relaxed = ToDouble(j.at("relaxed"));
      r.rank_one = j.at("rank_one").get<bool>();
      r.avg_rank = ToDouble(j.at("avg_rank"));
      r.randomized = j.at("randomized").get<bool>();
      r.iterations = j.at("iterations").get<int>();
      r.signaling = j.at("signaling").get<long long>();
      r.wall_ms = ToDouble(j.at("wall_ms"));
      r.note = j.at("note").get<std::string>();
      records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed results JSON: ") + e.what());
  }
  return records;
}

void WriteTracesCsv(const std::vector<TraceRecord>& traces, std::ostream& out) {
  WriteHeader(TraceColumns(), out);
  for (const auto& t : traces) {
    const auto& r = t.row;
    out << CsvField(t.scheme) << ',' << t.trial << ',' << FormatNumber(t.gamma_db) << ','
        << FormatNumber(t.d_db) << ',' << r.iteration << ',' << FormatNumber(r.sum_power) << ','
        << FormatNumber(r.feasible_power) << ',' << FormatNumber(r.best_power) << ','
        << FormatNumber(r.residual) << ',' << FormatNumber(r.dual_residual) << ',' << r.scalars << ','
        << r.backtracks << '\n';
  }
}

void WriteSummaryCsv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  WriteHeader(SummaryColumns(), out);
  for (const auto& s : rows) {
    out << CsvField(s.scheme) << ',' << FormatNumber(s.gamma_db) << ',' << FormatNumber(s.d_db) << ','
        << FormatNumber(s.p_max) << ',' << FormatNumber(s.theta) << ',' << s.trials << ',' << s.feasible << ','
        << s.infeasible << ',' << FormatNumber(s.mean_objective) << ',' << FormatNumber(s.mean_relaxed) << ','
        << s.rank_one << ',' << s.higher_rank << ',' << FormatNumber(s.mean_higher_rank) << ','
        << FormatNumber(s.mean_iterations) << ',' << FormatNumber(s.mean_signaling) << ','
        << FormatNumber(s.mean_wall_ms) << '\n';
  }
}

void EmitResults(const std::vector<ResultRecord>& records, const std::string& path, ResultFormat format) {
  auto out = OpenOut(path);
  if (format == ResultFormat::kCsv) {
    WriteRecordsCsv(records, out);
  } else {
    WriteRecordsJson(records, out);
  }
  CheckStream(out, path);
}

void EmitSweep(const SweepOutput& output, const std::string& path_in, ResultFormat format) {
  EmitResults(output.records, path_in, format);
  const std::filesystem::path p(path_in);
  const std::string stem = (p.parent_path() / p.stem()).string();
  {
    const std::string path = stem + "_trace.csv";
    auto out = OpenOut(path);
    WriteTracesCsv(output.traces, out);
    CheckStream(out, path);
  }
  const std::string path = stem + "_summary.csv";
  auto out = OpenOut(path);
  WriteSummaryCsv(Summarize(output.records), out);
  CheckStream(out, path);
}

}  // namespace mcbf
