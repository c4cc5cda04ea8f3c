#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcbf/sweep.hpp"

namespace mcbf {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ResultFormat { kCsv, kJson };

/// Throws ConfigError for anything but "csv" or "json".
ResultFormat ParseFormat(const std::string& name);

/// Column order of the record, trace and summary tables.
const std::vector<std::string>& RecordColumns();
const std::vector<std::string>& TraceColumns();
const std::vector<std::string>& SummaryColumns();

/// Decimal text with 9 significant digits; NaN is written as "nan" in CSV
/// and as null in JSON.
std::string FormatNumber(double v);

void WriteRecordsCsv(const std::vector<ResultRecord>& records, std::ostream& out);
void WriteRecordsJson(const std::vector<ResultRecord>& records, std::ostream& out);
std::vector<ResultRecord> ReadRecordsJson(std::istream& in);

void WriteTracesCsv(const std::vector<TraceRecord>& traces, std::ostream& out);
void WriteSummaryCsv(const std::vector<SummaryRow>& rows, std::ostream& out);

/// Writes records to `path` in the given format. Throws IoError when the
/// file cannot be written.
void EmitResults(const std::vector<ResultRecord>& records, const std::string& path, ResultFormat format);

/// Writes the records to `path`, and `<stem>_trace.csv` and
/// `<stem>_summary.csv` next to it (`stem` is `path` without extension).
void EmitSweep(const SweepOutput& output, const std::string& path, ResultFormat format);

}  // namespace mcbf
