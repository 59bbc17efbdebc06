#include "regpos/body_spec.hpp"

#include "regpos/interpolation.hpp"
#include "regpos/rng.hpp"

#include <cmath>
#include <limits>

namespace regpos {

namespace {

using nlohmann::json;

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("body spec: missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* what) {
  if (j.is_string() && (j == "inf" || j == "infinity")) return std::numeric_limits<double>::infinity();
  if (!j.is_number()) throw ConfigError(std::string("body spec: '") + what + "' must be a number");
  return j.get<double>();
}

Vec vector(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string("body spec: '") + what + "' must be a non-empty array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

Mat matrix(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError(std::string("body spec: '") + what + "' must be an array of rows");
  }
  const std::size_t cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ConfigError(std::string("body spec: ragged '") + what + "'");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = number(j[i][c], what);
    }
  }
  return m;
}

ConvexBody build(const json& j, const BodyTable& named) {
  if (j.is_string()) {
    const auto it = named.find(j.get<std::string>());
    if (it == named.end()) throw ConfigError("body spec: unknown body '" + j.get<std::string>() + "'");
    return it->second;
  }
  if (!j.is_object()) throw ConfigError("body spec: expected an object or a name");
  const std::string fam = field(j, "family").get<std::string>();
  if (fam == "weighted_lp") {
    const double p = number(field(j, "p"), "p");
    if (j.contains("weights")) return ConvexBody::weighted_lp(p, vector(j["weights"], "weights"));
    if (j.contains("scales")) return ConvexBody::lp_from_scales(p, vector(j["scales"], "scales"));
    const json& d = field(j, "dim");
    if (!d.is_number_integer() || d.get<int>() < 1) throw ConfigError("body spec: 'dim' must be a positive integer");
    return ConvexBody::unit_ball(p, d.get<int>());
  }
  if (fam == "ellipsoid") {
    if (j.contains("diagonal")) {
      const Vec v = vector(j["diagonal"], "diagonal");
      return ConvexBody::ellipsoid(v.asDiagonal().toDenseMatrix());
    }
    return ConvexBody::ellipsoid(matrix(field(j, "matrix"), "matrix"));
  }
  if (fam == "polytope_h") return ConvexBody::polytope_h(matrix(field(j, "rows"), "rows"));
  if (fam == "polytope_v") return ConvexBody::polytope_v(matrix(field(j, "vertices"), "vertices"));
  if (fam == "polar") return polar(build(field(j, "base"), named));
  if (fam == "complexify") return complexify(build(field(j, "base"), named));
  if (fam == "linear_image") {
    const ConvexBody base = build(field(j, "base"), named);
    return linear_image(PositionMap::from_matrix(matrix(field(j, "matrix"), "matrix")), base);
  }
  if (fam == "scaled") return scaled(number(field(j, "factor"), "factor"), build(field(j, "base"), named));
  if (fam == "interpolate" || fam == "surrogate") {
    double theta = 0.0;
    if (j.contains("theta")) {
      theta = number(j["theta"], "theta");
    } else if (j.contains("alpha") && fam == "interpolate") {
      theta = theta_of_alpha(number(j["alpha"], "alpha"));
    } else {
      throw ConfigError("body spec: interpolation needs 'theta' or 'alpha'");
    }
    const InterpolationPair pair{build(field(j, "a"), named), build(field(j, "b"), named), theta};
    return fam == "interpolate" ? interpolate(pair) : surrogate(pair);
  }
  throw ConfigError("body spec: unknown family '" + fam + "'");
}

}  // namespace

ConvexBody body_from_json(const json& j, const BodyTable& named) {
  try {
    return build(j, named);
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("body spec: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("body spec: ") + e.what());
  }
}

ConvexBody body_from_string(const std::string& text, const BodyTable& named) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("body spec: ") + e.what());
  }
  return body_from_json(j, named);
}

BodyTable bodies_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("bodies: expected an object of named specs");
  BodyTable out;
  // resolve in passes so entries may refer to each other in any order
  json pending = j;
  while (!pending.empty()) {
    json next = json::object();
    for (auto it = pending.begin(); it != pending.end(); ++it) {
      try {
        out.insert_or_assign(it.key(), body_from_json(it.value(), out));
      } catch (const ConfigError&) {
        next[it.key()] = it.value();
      }
    }
    if (next.size() == pending.size()) {
      // no progress: report the first failure
      body_from_json(next.begin().value(), out);
    }
    pending = std::move(next);
  }
  return out;
}

BodyTable body_zoo(int n, std::uint64_t seed, bool polytopes) {
  if (n < 1) throw ConfigError("body zoo: dimension must be positive");
  BodyTable z;
  constexpr double inf = std::numeric_limits<double>::infinity();
  z.insert_or_assign("B1", ConvexBody::unit_ball(1.0, n));
  z.insert_or_assign("B2", ConvexBody::unit_ball(2.0, n));
  z.insert_or_assign("Binf", ConvexBody::unit_ball(inf, n));
  Vec w(n);
  for (int i = 0; i < n; ++i) w(i) = std::exp(std::log(4.0) * (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0) - std::log(2.0));
  z.insert_or_assign("wl1", ConvexBody::lp_from_scales(1.0, w));
  z.insert_or_assign("wl1.5", ConvexBody::lp_from_scales(1.5, w));
  z.insert_or_assign("wl3", ConvexBody::lp_from_scales(3.0, w));
  for (double cond : {4.0, 100.0}) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = std::pow(cond, n > 1 ? static_cast<double>(i) / (n - 1) - 0.5 : 0.0);
    z.insert_or_assign(cond == 4.0 ? "ell4" : "ell100", ConvexBody::ellipsoid(v.asDiagonal().toDenseMatrix()));
  }
  if (polytopes && n <= 8) {
    Rng rng = make_stream(seed, 0x9017);
    Mat rows = gaussian_matrix(rng, n, n);  // n slabs, 2n facets
    for (int i = 0; i < rows.rows(); ++i) rows.row(i).normalize();
    z.insert_or_assign("hpoly", ConvexBody::polytope_h(rows));
  }
  return z;
}

}  // namespace regpos
