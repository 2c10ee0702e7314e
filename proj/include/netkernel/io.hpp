#ifndef NETKERNEL_IO_HPP
#define NETKERNEL_IO_HPP
#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "netkernel/error.hpp"
#include "netkernel/kernels.hpp"
#include "netkernel/metrics.hpp"
#include "netkernel/network.hpp"

namespace netkernel::io {

using json = nlohmann::json;

/// Shortest decimal form that round-trips: 17 significant digits.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << content;
}

inline json parse_json_text(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, context + ": " + e.what());
  }
}

inline json load_json(const std::string& path) { return parse_json_text(read_file(path), path); }

// ---------------------------------------------------------------------------
// Strict field access

inline void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& context) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, context + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::ParseError, context + ": unknown field '" + key + "'");
  }
}

inline const json& require(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key)) throw Error(ErrorCode::ParseError, context + ": missing field '" + key + "'");
  return obj.at(key);
}

inline double get_number(const json& obj, const std::string& key, const std::string& context) {
  const json& v = require(obj, key, context);
  if (!v.is_number()) throw Error(ErrorCode::ParseError, context + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline double get_number_or(const json& obj, const std::string& key, double fallback, const std::string& context) {
  return obj.contains(key) ? get_number(obj, key, context) : fallback;
}

inline long long get_integer(const json& obj, const std::string& key, const std::string& context) {
  const json& v = require(obj, key, context);
  if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, context + ": field '" + key + "' must be an integer");
  return v.get<long long>();
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& context) {
  const json& v = require(obj, key, context);
  if (!v.is_string()) throw Error(ErrorCode::ParseError, context + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

// ---------------------------------------------------------------------------
// Network JSON: {"vertices":[{"id","x"?,"y"?}], "edges":[{"id","u","v","length","geometry"?}]}

inline Network network_from_json(const json& doc, const std::string& context = "network") {
  check_keys(doc, {"vertices", "edges"}, context);
  const json& vs = require(doc, "vertices", context);
  const json& es = require(doc, "edges", context);
  if (!vs.is_array() || !es.is_array()) throw Error(ErrorCode::ParseError, context + ": vertices/edges must be arrays");
  std::vector<Vertex> vertices;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const std::string where = context + ": vertices[" + std::to_string(i) + "]";
    check_keys(vs[i], {"id", "x", "y"}, where);
    Vertex v;
    v.id = static_cast<int>(get_integer(vs[i], "id", where));
    const bool has_x = vs[i].contains("x");
    const bool has_y = vs[i].contains("y");
    if (has_x != has_y) throw Error(ErrorCode::ParseError, where + ": x and y must be given together");
    if (has_x) v.coords = Coords{get_number(vs[i], "x", where), get_number(vs[i], "y", where)};
    vertices.push_back(v);
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < es.size(); ++i) {
    const std::string where = context + ": edges[" + std::to_string(i) + "]";
    check_keys(es[i], {"id", "u", "v", "length", "geometry"}, where);
    Edge e;
    e.id = static_cast<int>(get_integer(es[i], "id", where));
    e.u = static_cast<int>(get_integer(es[i], "u", where));
    e.v = static_cast<int>(get_integer(es[i], "v", where));
    e.length = get_number(es[i], "length", where);
    if (es[i].contains("geometry")) {
      for (const json& xy : es[i].at("geometry")) {
        if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number()) {
          throw Error(ErrorCode::ParseError, where + ": geometry must be a list of [x, y] pairs");
        }
        e.geometry.push_back({xy[0].get<double>(), xy[1].get<double>()});
      }
    }
    edges.push_back(std::move(e));
  }
  return Network::build(std::move(vertices), std::move(edges));
}

inline json network_to_json(const Network& net) {
  json doc;
  doc["vertices"] = json::array();
  for (const Vertex& v : net.vertices()) {
    json jv{{"id", v.id}};
    if (v.coords) {
      jv["x"] = (*v.coords)[0];
      jv["y"] = (*v.coords)[1];
    }
    doc["vertices"].push_back(jv);
  }
  doc["edges"] = json::array();
  for (const Edge& e : net.edges()) {
    json je{{"id", e.id}, {"u", e.u}, {"v", e.v}, {"length", e.length}};
    if (!e.geometry.empty()) {
      je["geometry"] = json::array();
      for (const Coords& c : e.geometry) je["geometry"].push_back({c[0], c[1]});
    }
    doc["edges"].push_back(je);
  }
  return doc;
}

inline Network load_network(const std::string& path) { return network_from_json(load_json(path), path); }

// ---------------------------------------------------------------------------
// Points CSV: point_id,kind,ref_id,offset  (kind in {vertex, edge}; offset empty for vertices)

struct PointRecord {
  int point_id = 0;
  PointOnNetwork point = PointOnNetwork::at_vertex(0);
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(field);
  return fields;
}

inline std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Parses a points CSV; every violation is reported with its 1-based line number.
/// When `net` is given, points are checked against it.
inline std::vector<PointRecord> parse_points_csv(std::istream& in, const std::string& context,
                                                 const Network* net = nullptr) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::ParseError, context + ":" + std::to_string(line_no) + ": " + msg);
  };
  if (!std::getline(in, line)) {
    line_no = 1;
    fail("missing header");
  }
  line_no = 1;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "point_id,kind,ref_id,offset") fail("header must be 'point_id,kind,ref_id,offset'");
  std::vector<PointRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 4) fail("expected 4 fields, got " + std::to_string(f.size()));
    const auto id = detail::parse_int(f[0]);
    if (!id) fail("point_id '" + f[0] + "' is not an integer");
    const auto ref = detail::parse_int(f[2]);
    if (!ref) fail("ref_id '" + f[2] + "' is not an integer");
    PointRecord rec{static_cast<int>(*id), PointOnNetwork::at_vertex(static_cast<int>(*ref))};
    if (f[1] == "vertex") {
      if (!f[3].empty()) fail("vertex rows must leave offset empty");
    } else if (f[1] == "edge") {
      const auto offset = detail::parse_double(f[3]);
      if (!offset) fail("offset '" + f[3] + "' is not a number");
      try {
        rec.point = PointOnNetwork::on_edge(static_cast<int>(*ref), *offset);
      } catch (const Error& e) {
        fail(e.what());
      }
    } else {
      fail("kind must be 'vertex' or 'edge', got '" + f[1] + "'");
    }
    if (net != nullptr) {
      try {
        rec.point.validate(*net);
      } catch (const Error& e) {
        fail(e.what());
      }
    }
    records.push_back(rec);
  }
  return records;
}

inline std::vector<PointRecord> load_points(const std::string& path, const Network* net = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return parse_points_csv(in, path, net);
}

inline void write_points_csv(std::ostream& out, const std::vector<PointOnNetwork>& points) {
  out << "point_id,kind,ref_id,offset\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PointOnNetwork& p = points[i];
    if (p.is_vertex()) {
      out << i << ",vertex," << p.vertex() << ",\n";
    } else {
      out << i << ",edge," << p.edge() << ',' << format_double(p.offset()) << '\n';
    }
  }
}

/// Header of point ids, then the full matrix row by row.
inline void write_distance_csv(std::ostream& out, const DistanceMatrix& d, const std::vector<int>& ids) {
  for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : "") << ids[i];
  out << '\n';
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t j = 0; j < d.n(); ++j) out << (j ? "," : "") << format_double(d(i, j));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Observations CSV: rep,site,time,value  (site refers to a point_id)

struct Observation {
  int rep = 0;
  int site = 0;
  double time = 0.0;
  double value = 0.0;
};

inline std::vector<Observation> parse_observations_csv(std::istream& in, const std::string& context) {
  std::string line;
  std::size_t line_no = 1;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::ParseError, context + ":" + std::to_string(line_no) + ": " + msg);
  };
  if (!std::getline(in, line)) fail("missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "rep,site,time,value") fail("header must be 'rep,site,time,value'");
  std::vector<Observation> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 4) fail("expected 4 fields, got " + std::to_string(f.size()));
    const auto rep = detail::parse_int(f[0]);
    const auto site = detail::parse_int(f[1]);
    const auto time = detail::parse_double(f[2]);
    const auto value = detail::parse_double(f[3]);
    if (!rep || !site) fail("rep and site must be integers");
    if (!time || !value || !std::isfinite(*time) || !std::isfinite(*value)) fail("time and value must be finite numbers");
    rows.push_back({static_cast<int>(*rep), static_cast<int>(*site), *time, *value});
  }
  return rows;
}

inline std::vector<Observation> load_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return parse_observations_csv(in, path);
}

// ---------------------------------------------------------------------------
// Kernel JSON

inline SpatialFamily spatial_from_json(const json& j, const std::string& context) {
  const std::string family = get_string(j, "family", context);
  if (family == "dagum") {
    check_keys(j, {"family", "b", "tau"}, context);
    return Dagum{get_number(j, "b", context), get_number(j, "tau", context)};
  }
  if (family == "gen_cauchy") {
    check_keys(j, {"family", "b_S", "delta_S"}, context);
    return GenCauchy{get_number(j, "b_S", context), get_number(j, "delta_S", context)};
  }
  if (family == "schilling") {
    check_keys(j, {"family", "a"}, context);
    return Schilling{get_number(j, "a", context)};
  }
  if (family == "matern") {
    check_keys(j, {"family", "nu"}, context);
    return Matern{get_number(j, "nu", context)};
  }
  if (family == "pow_exp") {
    check_keys(j, {"family", "a"}, context);
    return PowExp{get_number(j, "a", context)};
  }
  if (family == "askey") {
    check_keys(j, {"family", "nu"}, context);
    return Askey{get_number(j, "nu", context)};
  }
  throw Error(ErrorCode::ParseError, context + ": unknown spatial family '" + family + "'");
}

inline json spatial_to_json(const SpatialFamily& f) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Dagum>) return {{"family", "dagum"}, {"b", s.b}, {"tau", s.tau}};
        if constexpr (std::is_same_v<T, GenCauchy>) {
          return {{"family", "gen_cauchy"}, {"b_S", s.b_S}, {"delta_S", s.delta_S}};
        }
        if constexpr (std::is_same_v<T, Schilling>) return {{"family", "schilling"}, {"a", s.a}};
        if constexpr (std::is_same_v<T, Matern>) return {{"family", "matern"}, {"nu", s.nu}};
        if constexpr (std::is_same_v<T, PowExp>) return {{"family", "pow_exp"}, {"a", s.a}};
        if constexpr (std::is_same_v<T, Askey>) return {{"family", "askey"}, {"nu", s.nu}};
      },
      f);
}

inline TemporalFamily temporal_from_json(const json& j, const std::string& context) {
  const std::string family = get_string(j, "family", context);
  if (family == "dagum") {
    check_keys(j, {"family", "b", "tau"}, context);
    return DagumPsi{get_number(j, "b", context), get_number(j, "tau", context)};
  }
  if (family == "gen_cauchy") {
    check_keys(j, {"family", "a", "b"}, context);
    return GenCauchyPsi{get_number(j, "a", context), get_number(j, "b", context)};
  }
  if (family == "power") {
    check_keys(j, {"family", "a", "c"}, context);
    return PowerPsi{get_number(j, "a", context), get_number(j, "c", context)};
  }
  if (family == "gneiting") {
    check_keys(j, {"family", "a_T"}, context);
    return GneitingPsi{get_number(j, "a_T", context)};
  }
  throw Error(ErrorCode::ParseError, context + ": unknown temporal family '" + family + "'");
}

inline json temporal_to_json(const TemporalFamily& f) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DagumPsi>) return {{"family", "dagum"}, {"b", s.b}, {"tau", s.tau}};
        if constexpr (std::is_same_v<T, GenCauchyPsi>) return {{"family", "gen_cauchy"}, {"a", s.a}, {"b", s.b}};
        if constexpr (std::is_same_v<T, PowerPsi>) return {{"family", "power"}, {"a", s.a}, {"c", s.c}};
        if constexpr (std::is_same_v<T, GneitingPsi>) return {{"family", "gneiting"}, {"a_T", s.a_T}};
      },
      f);
}

inline CircularFamily circular_family_from_json(const json& j, const std::string& context) {
  const std::string family = get_string(j, "family", context);
  auto eps_tau = [&](auto tag) {
    using T = decltype(tag);
    check_keys(j, {"family", "eps", "tau"}, context);
    return CircularFamily{T{get_number(j, "eps", context), get_number(j, "tau", context)}};
  };
  if (family == "neg_binomial") return eps_tau(NegBinomial{});
  if (family == "multiquadric") return eps_tau(Multiquadric{});
  if (family == "adapted_multiquadric") return eps_tau(AdaptedMultiquadric{});
  if (family == "sine_series") {
    check_keys(j, {"family"}, context);
    return SineSeries{};
  }
  if (family == "sine_power") {
    check_keys(j, {"family", "a"}, context);
    return SinePower{get_number(j, "a", context)};
  }
  if (family == "poisson") {
    check_keys(j, {"family", "lambda"}, context);
    return Poisson{get_number(j, "lambda", context)};
  }
  throw Error(ErrorCode::ParseError, context + ": unknown circular family '" + family + "'");
}

inline json circular_family_to_json(const CircularFamily& f) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NegBinomial>) return {{"family", "neg_binomial"}, {"eps", s.eps}, {"tau", s.tau}};
        if constexpr (std::is_same_v<T, Multiquadric>) return {{"family", "multiquadric"}, {"eps", s.eps}, {"tau", s.tau}};
        if constexpr (std::is_same_v<T, AdaptedMultiquadric>) {
          return {{"family", "adapted_multiquadric"}, {"eps", s.eps}, {"tau", s.tau}};
        }
        if constexpr (std::is_same_v<T, SineSeries>) return {{"family", "sine_series"}};
        if constexpr (std::is_same_v<T, SinePower>) return {{"family", "sine_power"}, {"a", s.a}};
        if constexpr (std::is_same_v<T, Poisson>) return {{"family", "poisson"}, {"lambda", s.lambda}};
      },
      f);
}

/// Accepts "model": "gneiting" | "circular" | the shortcuts "T", "C1", "C2".
inline CovarianceModel kernel_from_json(const json& j, const std::string& context = "kernel") {
  const std::string model = get_string(j, "model", context);
  if (model == "T" || model == "C1" || model == "C2") {
    check_keys(j, {"model", "sigma2", "c_S", "c_T"}, context);
    const double s2 = get_number(j, "sigma2", context);
    const double cs = get_number(j, "c_S", context);
    const double ct = get_number(j, "c_T", context);
    if (model == "T") return model_T(s2, cs, ct);
    if (model == "C1") return model_C1(s2, cs, ct);
    return model_C2(s2, cs, ct);
  }
  if (model == "gneiting") {
    check_keys(j, {"model", "sigma2", "c_S", "c_T", "alpha", "beta", "phi", "psi", "metric", "time"}, context);
    KernelSpec spec;
    spec.sigma2 = get_number(j, "sigma2", context);
    spec.c_S = get_number(j, "c_S", context);
    spec.c_T = get_number(j, "c_T", context);
    spec.alpha = get_number(j, "alpha", context);
    spec.beta = get_number(j, "beta", context);
    spec.phi = spatial_from_json(require(j, "phi", context), context + ".phi");
    spec.psi = temporal_from_json(require(j, "psi", context), context + ".psi");
    spec.metric = j.contains("metric") ? parse_metric(get_string(j, "metric", context)) : MetricKind::Geodesic;
    spec.time_kind = j.contains("time") ? parse_time_kind(get_string(j, "time", context)) : TimeKind::Linear;
    spec.validate();
    return spec;
  }
  if (model == "circular") {
    check_keys(j, {"model", "sigma2", "c_S", "family", "inner", "metric", "time"}, context);
    CircularSpec spec;
    spec.sigma2 = get_number(j, "sigma2", context);
    spec.c_S = get_number(j, "c_S", context);
    spec.family = circular_family_from_json(require(j, "family", context), context + ".family");
    spec.inner = spatial_from_json(require(j, "inner", context), context + ".inner");
    spec.metric = j.contains("metric") ? parse_metric(get_string(j, "metric", context)) : MetricKind::Resistance;
    if (j.contains("time") && get_string(j, "time", context) != "circular") {
      throw Error(ErrorCode::ParseError, context + ": circular models require time = circular");
    }
    spec.validate();
    return spec;
  }
  throw Error(ErrorCode::ParseError, context + ": unknown model '" + model + "'");
}

inline json kernel_to_json(const CovarianceModel& model) {
  if (const auto* k = std::get_if<KernelSpec>(&model)) {
    return {{"model", "gneiting"},
            {"sigma2", k->sigma2},
            {"c_S", k->c_S},
            {"c_T", k->c_T},
            {"alpha", k->alpha},
            {"beta", k->beta},
            {"phi", spatial_to_json(k->phi)},
            {"psi", temporal_to_json(k->psi)},
            {"metric", std::string(to_string(k->metric))},
            {"time", std::string(to_string(k->time_kind))}};
  }
  const auto& c = std::get<CircularSpec>(model);
  return {{"model", "circular"},
          {"sigma2", c.sigma2},
          {"c_S", c.c_S},
          {"family", circular_family_to_json(c.family)},
          {"inner", spatial_to_json(c.inner)},
          {"metric", std::string(to_string(c.metric))},
          {"time", "circular"}};
}

inline CovarianceModel load_kernel(const std::string& path) { return kernel_from_json(load_json(path), path); }

}  // namespace netkernel::io

#endif  // NETKERNEL_IO_HPP
