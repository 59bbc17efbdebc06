#include "regpos/body_spec.hpp"
#include "regpos/experiments.hpp"
#include "regpos/records.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace regpos;
using nlohmann::json;

namespace {
ExperimentRecord sample_record() {
  ExperimentRecord r;
  r.experiment = "demo";
  r.seed = 18446744073709551615ULL;
  r.body = json::parse(R"({"family":"weighted_lp","p":1,"dim":3})");
  r.params = {{"n", 3}, {"alpha", 0.75}};
  r.quantities.push_back(Quantity::estimate("x", 0.1 + 0.2, 1e-3));
  r.quantities.push_back(Quantity::exact("inf_value", std::numeric_limits<double>::infinity()));
  r.quantities.push_back(Quantity::bound("lb", -0.0, true));
  r.quantities.push_back(Quantity::interval("iv", 1.0 / 3.0, 0.25, 0.5));
  return r;
}
}  // namespace

TEST_CASE("double formatting round trips") {
  for (double v : {0.1 + 0.2, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(std::isnan(number_from_json(json_number(std::nan("")))));
}

TEST_CASE("record round trip") {
  const ExperimentRecord r = sample_record();
  const ExperimentRecord back = ExperimentRecord::from_line(r.to_line());
  CHECK(back == r);
  CHECK(back.to_line() == r.to_line());
  CHECK(r.to_json()["timestamp"].is_null());
  CHECK(r.find("x")->ci_hi == doctest::Approx(0.3 + 1.96e-3));
  CHECK(r.find("missing") == nullptr);
  CHECK(std::string(version()) == r.version);

  std::stringstream ss;
  write_jsonl(ss, {r, r});
  const auto all = read_jsonl(ss);
  REQUIRE(all.size() == 2);
  CHECK(all[1] == r);
}

TEST_CASE("csv is long format") {
  std::stringstream ss;
  write_csv(ss, {sample_record()});
  std::string line;
  int rows = 0;
  std::getline(ss, line);
  CHECK(line == "experiment,seed,params,quantity,kind,value,se,ci_lo,ci_hi");
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("body specs") {
  const ConvexBody a = body_from_string(R"({"family":"weighted_lp","p":"inf","dim":3})");
  CHECK(a.gauge((Vec(3) << 0.5, -2.0, 1.0).finished()) == 2.0);
  const ConvexBody e = body_from_string(R"({"family":"ellipsoid","diagonal":[4,1]})");
  CHECK(e.gauge((Vec(2) << 1.0, 0.0).finished()) == doctest::Approx(2.0));
  const json tbl = json::parse(R"({
    "k": {"family":"weighted_lp","p":1,"scales":[1,2]},
    "kp": {"family":"polar","base":"k"},
    "mid": {"family":"interpolate","a":"k","b":{"family":"weighted_lp","p":"inf","dim":2},"theta":0.5},
    "big": {"family":"scaled","factor":2,"base":"k"}
  })");
  const BodyTable t = bodies_from_json(tbl);
  const Vec x = (Vec(2) << 1.0, 1.0).finished();
  CHECK(t.at("k").gauge(x) == doctest::Approx(3.0));
  CHECK(t.at("kp").gauge(x) == doctest::Approx(1.0));
  CHECK(t.at("big").gauge(x) == doctest::Approx(1.5));
  // [l1(w), l_inf]_{1/2} = l2 with scales sqrt(w)
  CHECK(t.at("mid").gauge(x) == doctest::Approx(std::sqrt(3.0)));

  CHECK_THROWS_AS(body_from_string("{"), ConfigError);
  CHECK_THROWS_AS(body_from_string(R"({"family":"torus"})"), ConfigError);
  CHECK_THROWS_AS(body_from_string(R"({"family":"weighted_lp","p":0.5,"dim":2})"), ConfigError);
  CHECK_THROWS_AS(body_from_string(R"("nobody")"), ConfigError);
  CHECK_THROWS_AS(body_from_string(R"({"family":"ellipsoid","matrix":[[1,2],[2,1]]})"), ConfigError);
}

TEST_CASE("zoo") {
  const BodyTable z = body_zoo(8, 1, true);
  CHECK(z.size() == 9);
  for (const auto& [name, K] : z) CHECK(K.dim() == 8);
  CHECK(body_zoo(16, 1, true).count("hpoly") == 0);
  const Vec e0 = Vec::Unit(8, 0);
  CHECK(z.at("wl1").gauge(e0) == doctest::Approx(0.5));
  CHECK(z.at("ell100").gauge(e0) == doctest::Approx(std::sqrt(0.1)));
}

TEST_CASE("wilson interval") {
  auto [lo, hi] = wilson_interval(0, 100);
  const double z2 = 1.96 * 1.96;
  CHECK(lo == 0.0);
  CHECK(hi == doctest::Approx((z2 / 100) / (1 + z2 / 100)).epsilon(1e-12));
  auto [l2, h2] = wilson_interval(50, 100);
  CHECK(l2 + h2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h2 - l2 == doctest::Approx(2 * 1.96 * std::sqrt(0.25 / 100 + z2 / 40000) / (1 + z2 / 100)).epsilon(1e-12));
}
