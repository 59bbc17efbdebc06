#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace regpos {

const char* version();

/// A measured number together with its uncertainty.
/// kind: "estimate" (se and 95% interval), "exact" (se = 0), "lower_bound", "upper_bound", "count".
struct Quantity {
  std::string name;
  double value = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::string kind = "estimate";

  static Quantity exact(std::string name, double v);
  static Quantity estimate(std::string name, double v, double se);
  static Quantity interval(std::string name, double v, double lo, double hi);
  static Quantity bound(std::string name, double v, bool lower);
};

struct ExperimentRecord {
  std::string experiment;
  std::uint64_t seed = 0;
  nlohmann::json body;                    ///< body spec
  nlohmann::json params = nlohmann::json::object();
  std::vector<Quantity> quantities;
  std::optional<std::string> timestamp;  ///< null unless requested
  std::string version = regpos::version();

  [[nodiscard]] const Quantity* find(const std::string& name) const;
  [[nodiscard]] nlohmann::json to_json() const;
  static ExperimentRecord from_json(const nlohmann::json& j);
  /// One line of JSONL without the trailing newline.
  [[nodiscard]] std::string to_line() const;
  static ExperimentRecord from_line(const std::string& line);
};

bool operator==(const Quantity& a, const Quantity& b);
bool operator==(const ExperimentRecord& a, const ExperimentRecord& b);

/// Shortest text that parses back to the same double; "inf", "-inf", "nan" otherwise.
std::string format_double(double v);
/// JSON value for a double; non-finite values become the strings above.
nlohmann::json json_number(double v);
double number_from_json(const nlohmann::json& j);

void write_jsonl(std::ostream& os, const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_jsonl(std::istream& is);
/// Long format: one row per (record, quantity).
void write_csv(std::ostream& os, const std::vector<ExperimentRecord>& records);

/// Writes <dir>/<stem>.jsonl and <dir>/<stem>.csv, creating the directory.
void write_outputs(const std::string& dir, const std::string& stem, const std::vector<ExperimentRecord>& records);

}  // namespace regpos
