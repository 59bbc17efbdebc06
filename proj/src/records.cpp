#include "regpos/records.hpp"

#include "regpos/types.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

#ifndef REGPOS_VERSION
#define REGPOS_VERSION "0.0.0"
#endif

namespace regpos {

using nlohmann::json;

const char* version() { return REGPOS_VERSION; }

Quantity Quantity::exact(std::string name, double v) { return {std::move(name), v, 0.0, v, v, "exact"}; }

Quantity Quantity::estimate(std::string name, double v, double se) {
  return {std::move(name), v, se, v - 1.96 * se, v + 1.96 * se, "estimate"};
}

Quantity Quantity::interval(std::string name, double v, double lo, double hi) {
  return {std::move(name), v, (hi - lo) / (2.0 * 1.96), lo, hi, "estimate"};
}

Quantity Quantity::bound(std::string name, double v, bool lower) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {std::move(name), v, 0.0, lower ? v : -inf, lower ? inf : v, lower ? "lower_bound" : "upper_bound"};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json(v).dump();
}

json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError("record: expected a number");
}

const Quantity* ExperimentRecord::find(const std::string& name) const {
  for (const auto& q : quantities) {
    if (q.name == name) return &q;
  }
  return nullptr;
}

json ExperimentRecord::to_json() const {
  json qs = json::array();
  for (const auto& q : quantities) {
    qs.push_back({{"name", q.name},
                  {"kind", q.kind},
                  {"value", json_number(q.value)},
                  {"se", json_number(q.se)},
                  {"ci", {json_number(q.ci_lo), json_number(q.ci_hi)}}});
  }
  json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["body"] = body;
  j["params"] = params;
  j["quantities"] = std::move(qs);
  j["timestamp"] = timestamp ? json(*timestamp) : json(nullptr);
  j["version"] = version;
  return j;
}

ExperimentRecord ExperimentRecord::from_json(const json& j) {
  try {
    ExperimentRecord r;
    r.experiment = j.at("experiment").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.body = j.at("body");
    r.params = j.at("params");
    for (const auto& q : j.at("quantities")) {
      Quantity x;
      x.name = q.at("name").get<std::string>();
      x.kind = q.at("kind").get<std::string>();
      x.value = number_from_json(q.at("value"));
      x.se = number_from_json(q.at("se"));
      x.ci_lo = number_from_json(q.at("ci").at(0));
      x.ci_hi = number_from_json(q.at("ci").at(1));
      r.quantities.push_back(std::move(x));
    }
    if (!j.at("timestamp").is_null()) r.timestamp = j.at("timestamp").get<std::string>();
    r.version = j.at("version").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("record: ") + e.what());
  }
}

std::string ExperimentRecord::to_line() const { return to_json().dump(); }

ExperimentRecord ExperimentRecord::from_line(const std::string& line) {
  try {
    return from_json(json::parse(line));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("record: ") + e.what());
  }
}

namespace {

bool same(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0 || (std::isnan(a) && std::isnan(b)); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

bool operator==(const Quantity& a, const Quantity& b) {
  return a.name == b.name && a.kind == b.kind && same(a.value, b.value) && same(a.se, b.se) && same(a.ci_lo, b.ci_lo) &&
         same(a.ci_hi, b.ci_hi);
}

bool operator==(const ExperimentRecord& a, const ExperimentRecord& b) {
  return a.experiment == b.experiment && a.seed == b.seed && a.body == b.body && a.params == b.params &&
         a.quantities == b.quantities && a.timestamp == b.timestamp && a.version == b.version;
}

void write_jsonl(std::ostream& os, const std::vector<ExperimentRecord>& records) {
  for (const auto& r : records) os << r.to_line() << '\n';
}

std::vector<ExperimentRecord> read_jsonl(std::istream& is) {
  std::vector<ExperimentRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) out.push_back(ExperimentRecord::from_line(line));
  }
  return out;
}

void write_csv(std::ostream& os, const std::vector<ExperimentRecord>& records) {
  os << "experiment,seed,params,quantity,kind,value,se,ci_lo,ci_hi\n";
  for (const auto& r : records) {
    const std::string head = csv_field(r.experiment) + ',' + std::to_string(r.seed) + ',' + csv_field(r.params.dump());
    for (const auto& q : r.quantities) {
      os << head << ',' << csv_field(q.name) << ',' << q.kind << ',' << format_double(q.value) << ','
         << format_double(q.se) << ',' << format_double(q.ci_lo) << ',' << format_double(q.ci_hi) << '\n';
    }
  }
}

void write_outputs(const std::string& dir, const std::string& stem, const std::vector<ExperimentRecord>& records) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base = std::filesystem::path(dir) / stem;
  std::ofstream jl(base.string() + ".jsonl", std::ios::binary | std::ios::trunc);
  std::ofstream cs(base.string() + ".csv", std::ios::binary | std::ios::trunc);
  if (!jl || !cs) throw ConfigError("cannot write outputs under " + dir);
  write_jsonl(jl, records);
  write_csv(cs, records);
}

}  // namespace regpos
