#ifndef NETKERNEL_STUDY_HPP
#define NETKERNEL_STUDY_HPP
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "netkernel/generate.hpp"
#include "netkernel/gp.hpp"
#include "netkernel/io.hpp"

namespace netkernel {

struct GeneratedNetwork {
  GraphKind kind = GraphKind::RiverTree;
  GenerateParams params;
  std::uint64_t seed = 0;
};

struct NetworkFile {
  std::string path;
};

using NetworkSource = std::variant<GeneratedNetwork, NetworkFile>;

inline Network resolve_network(const NetworkSource& source) {
  if (const auto* g = std::get_if<GeneratedNetwork>(&source)) return generate(g->kind, g->params, g->seed);
  return io::load_network(std::get<NetworkFile>(source).path);
}

struct TrueParams {
  double sigma2 = 0.9;
  double c_S = 100.0;
  double c_T = 0.2;
  double nugget = 0.1;
};

struct StudyConfig {
  NetworkSource network = GeneratedNetwork{};
  std::size_t n_sites = 30;
  std::size_t times_per_site = 10;
  TrueParams truth;
  std::size_t n_replicates = 200;
  std::vector<ModelFamily> models{ModelFamily::T, ModelFamily::C1, ModelFamily::C2};
  std::uint64_t seed = 0;
  // Reuse one set of observation times for every replicate instead of redrawing them.
  bool fix_times = false;

  void validate() const {
    if (n_sites == 0 || times_per_site == 0 || n_replicates == 0) {
      throw Error(ErrorCode::InvalidParams, "n_sites, times_per_site and n_replicates must be >= 1");
    }
    if (models.empty()) throw Error(ErrorCode::InvalidParams, "study needs at least one model");
    if (!(truth.sigma2 > 0.0 && truth.c_S > 0.0 && truth.c_T > 0.0 && truth.nugget >= 0.0)) {
      throw Error(ErrorCode::InvalidParams, "true parameters must be positive (nugget nonnegative)");
    }
  }
};

// ---------------------------------------------------------------------------
// Config JSON

namespace io {

inline GenerateParams generate_params_from_json(const json& j, const std::string& context) {
  check_keys(j, {"kind", "seed", "n", "min_length", "max_length", "detour_min", "detour_max", "root_length", "decay",
                 "branch_angle", "angle_jitter", "pendant_size"},
             context);
  GenerateParams p;
  if (j.contains("n")) p.n = static_cast<std::size_t>(get_integer(j, "n", context));
  p.min_length = get_number_or(j, "min_length", p.min_length, context);
  p.max_length = get_number_or(j, "max_length", p.max_length, context);
  p.detour_min = get_number_or(j, "detour_min", p.detour_min, context);
  p.detour_max = get_number_or(j, "detour_max", p.detour_max, context);
  p.root_length = get_number_or(j, "root_length", p.root_length, context);
  p.decay = get_number_or(j, "decay", p.decay, context);
  p.branch_angle = get_number_or(j, "branch_angle", p.branch_angle, context);
  p.angle_jitter = get_number_or(j, "angle_jitter", p.angle_jitter, context);
  if (j.contains("pendant_size")) p.pendant_size = static_cast<std::size_t>(get_integer(j, "pendant_size", context));
  return p;
}

inline json generate_params_to_json(const GenerateParams& p) {
  return {{"n", p.n},
          {"min_length", p.min_length},
          {"max_length", p.max_length},
          {"detour_min", p.detour_min},
          {"detour_max", p.detour_max},
          {"root_length", p.root_length},
          {"decay", p.decay},
          {"branch_angle", p.branch_angle},
          {"angle_jitter", p.angle_jitter},
          {"pendant_size", p.pendant_size}};
}

/// {"generate": {"kind", "seed"?, ...params} } or {"file": path}. Relative file paths
/// resolve against `base_dir`.
inline NetworkSource network_source_from_json(const json& j, const std::string& context,
                                              const std::filesystem::path& base_dir = {}) {
  check_keys(j, {"generate", "file"}, context);
  if (j.contains("generate") == j.contains("file")) {
    throw Error(ErrorCode::ParseError, context + ": exactly one of 'generate' or 'file' is required");
  }
  if (j.contains("file")) {
    std::filesystem::path path = get_string(j, "file", context);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    return NetworkFile{path.string()};
  }
  const json& g = j.at("generate");
  const std::string where = context + ".generate";
  GeneratedNetwork out;
  try {
    out.kind = parse_graph_kind(get_string(g, "kind", where));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, where + ": " + e.what());
  }
  if (g.contains("seed")) out.seed = static_cast<std::uint64_t>(get_integer(g, "seed", where));
  out.params = generate_params_from_json(g, where);
  return out;
}

inline json network_source_to_json(const NetworkSource& s) {
  if (const auto* f = std::get_if<NetworkFile>(&s)) return {{"file", f->path}};
  const auto& g = std::get<GeneratedNetwork>(s);
  json gen = generate_params_to_json(g.params);
  gen["kind"] = std::string(to_string(g.kind));
  gen["seed"] = g.seed;
  return {{"generate", gen}};
}

/// Parses a study config. A missing seed leaves `has_seed` false so the caller can draw one.
inline StudyConfig study_config_from_json(const json& j, const std::string& context, bool* has_seed = nullptr,
                                          const std::filesystem::path& base_dir = {}) {
  check_keys(j, {"network", "n_sites", "times_per_site", "true", "n_replicates", "models", "seed", "fix_times"},
             context);
  StudyConfig c;
  c.network = network_source_from_json(require(j, "network", context), context + ".network", base_dir);
  auto positive_int = [&](const char* key) {
    const long long v = get_integer(j, key, context);
    if (v < 1) throw Error(ErrorCode::ParseError, context + ": field '" + key + "' must be >= 1");
    return static_cast<std::size_t>(v);
  };
  c.n_sites = positive_int("n_sites");
  c.times_per_site = positive_int("times_per_site");
  c.n_replicates = positive_int("n_replicates");
  const json& t = require(j, "true", context);
  check_keys(t, {"sigma2", "c_S", "c_T", "nugget"}, context + ".true");
  c.truth.sigma2 = get_number(t, "sigma2", context + ".true");
  c.truth.c_S = get_number(t, "c_S", context + ".true");
  c.truth.c_T = get_number(t, "c_T", context + ".true");
  c.truth.nugget = get_number(t, "nugget", context + ".true");
  if (j.contains("models")) {
    const json& m = j.at("models");
    if (!m.is_array() || m.empty()) throw Error(ErrorCode::ParseError, context + ": 'models' must be a non-empty array");
    c.models.clear();
    for (const json& name : m) {
      if (!name.is_string()) throw Error(ErrorCode::ParseError, context + ": model names must be strings");
      try {
        c.models.push_back(parse_model_family(name.get<std::string>()));
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, context + ": " + e.what());
      }
    }
  }
  if (has_seed != nullptr) *has_seed = j.contains("seed");
  if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(get_integer(j, "seed", context));
  if (j.contains("fix_times")) {
    if (!j.at("fix_times").is_boolean()) throw Error(ErrorCode::ParseError, context + ": 'fix_times' must be boolean");
    c.fix_times = j.at("fix_times").get<bool>();
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, context + ": " + e.what());
  }
  return c;
}

inline json study_config_to_json(const StudyConfig& c) {
  json models = json::array();
  for (ModelFamily m : c.models) models.push_back(std::string(to_string(m)));
  return {{"network", network_source_to_json(c.network)},
          {"n_sites", c.n_sites},
          {"times_per_site", c.times_per_site},
          {"true",
           {{"sigma2", c.truth.sigma2}, {"c_S", c.truth.c_S}, {"c_T", c.truth.c_T}, {"nugget", c.truth.nugget}}},
          {"n_replicates", c.n_replicates},
          {"models", models},
          {"seed", c.seed},
          {"fix_times", c.fix_times}};
}

}  // namespace io

// ---------------------------------------------------------------------------
// Report

struct ModelFit {
  ModelFamily model = ModelFamily::T;
  FitResult result;
};

struct ReplicateRow {
  std::size_t replicate = 0;
  std::size_t winner = 0;  // index into the configured model list
  bool tie = false;
  std::vector<ModelFit> fits;
};

struct ErrorSummary {
  double mae = 0.0;
  double rmse = 0.0;
};

struct ModelSummary {
  ModelFamily model = ModelFamily::T;
  std::size_t wins = 0;
  std::size_t ties = 0;  // wins decided by the tie-break
  double win_proportion = 0.0;
  ErrorSummary sigma2, c_S, c_T;
};

struct ExperimentReport {
  std::vector<ReplicateRow> replicates;
  std::vector<ModelSummary> summary;
  TrueParams truth;

  [[nodiscard]] const ModelSummary& of(ModelFamily m) const {
    for (const ModelSummary& s : summary) {
      if (s.model == m) return s;
    }
    throw Error(ErrorCode::InvalidParams, "model not in study");
  }
};

inline constexpr double kTieTolerance = 1e-9;

/// Index of the highest log-likelihood; near-ties go to the earliest entry.
inline std::size_t pick_winner(const std::vector<double>& loglik, bool* tie = nullptr) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < loglik.size(); ++k) {
    if (loglik[k] > loglik[best]) best = k;
  }
  std::size_t winner = best;
  for (std::size_t k = 0; k < loglik.size(); ++k) {
    if (loglik[best] - loglik[k] <= kTieTolerance) {
      winner = k;
      break;
    }
  }
  if (tie != nullptr) {
    std::size_t close = 0;
    for (double l : loglik) close += (loglik[best] - l <= kTieTolerance) ? 1 : 0;
    *tie = close > 1;
  }
  return winner;
}

inline ExperimentReport summarize(std::vector<ReplicateRow> rows, const std::vector<ModelFamily>& models,
                                  const TrueParams& truth) {
  ExperimentReport report;
  report.truth = truth;
  const double n = static_cast<double>(rows.size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    ModelSummary s;
    s.model = models[k];
    double abs_s2 = 0, sq_s2 = 0, abs_cs = 0, sq_cs = 0, abs_ct = 0, sq_ct = 0;
    for (const ReplicateRow& r : rows) {
      if (r.winner == k) {
        ++s.wins;
        if (r.tie) ++s.ties;
      }
      const ScaleParams& e = r.fits[k].result.estimates;
      abs_s2 += std::abs(e.sigma2 - truth.sigma2);
      sq_s2 += (e.sigma2 - truth.sigma2) * (e.sigma2 - truth.sigma2);
      abs_cs += std::abs(e.c_S - truth.c_S);
      sq_cs += (e.c_S - truth.c_S) * (e.c_S - truth.c_S);
      abs_ct += std::abs(e.c_T - truth.c_T);
      sq_ct += (e.c_T - truth.c_T) * (e.c_T - truth.c_T);
    }
    s.win_proportion = static_cast<double>(s.wins) / n;
    s.sigma2 = {abs_s2 / n, std::sqrt(sq_s2 / n)};
    s.c_S = {abs_cs / n, std::sqrt(sq_cs / n)};
    s.c_T = {abs_ct / n, std::sqrt(sq_ct / n)};
    report.summary.push_back(s);
  }
  report.replicates = std::move(rows);
  return report;
}

namespace detail {

inline std::vector<double> draw_times(Rng& rng, std::size_t count) {
  std::vector<double> t(count);
  for (double& v : t) v = uniform01(rng);
  return t;
}

inline constexpr std::uint64_t kSiteStream = 0x5173;
inline constexpr std::uint64_t kFixedTimeStream = 0x71e5;

}  // namespace detail

/// One replicate: draw times, simulate from the true T model, fit every model.
inline ReplicateRow run_replicate(const StudyConfig& cfg, const std::shared_ptr<const Network>& net,
                                  const std::vector<PointOnNetwork>& sites, const std::vector<double>* fixed_times,
                                  std::size_t r) {
  Rng rng = make_rng(cfg.seed, r);
  SpaceTimeDesign design;
  design.network = net;
  design.time_kind = TimeKind::Linear;
  const std::vector<double> times =
      fixed_times ? *fixed_times : detail::draw_times(rng, sites.size() * cfg.times_per_site);
  for (std::size_t s = 0; s < sites.size(); ++s) {
    for (std::size_t k = 0; k < cfg.times_per_site; ++k) {
      design.points.push_back(sites[s]);
      design.times.push_back(times[s * cfg.times_per_site + k]);
    }
  }
  SimSpec sim{model_T(cfg.truth.sigma2, cfg.truth.c_S, cfg.truth.c_T), cfg.truth.nugget, rng()};
  const Eigen::VectorXd y = simulate(design, sim, 1).row(0).transpose();

  FitOptions options;
  options.nugget = cfg.truth.nugget;
  options.seed = rng();
  ReplicateRow row;
  row.replicate = r;
  std::vector<double> ll;
  for (ModelFamily m : cfg.models) {
    row.fits.push_back({m, fit(design, m, y, std::nullopt, options)});
    ll.push_back(row.fits.back().result.loglik);
  }
  row.winner = pick_winner(ll, &row.tie);
  return row;
}

/// Full simulation study. Sites are sampled once; replicate r uses the stream (seed, r),
/// so the report does not depend on `threads`.
inline ExperimentReport run_sim_study(const StudyConfig& cfg, std::size_t threads = 1) {
  cfg.validate();
  const auto net = std::make_shared<const Network>(resolve_network(cfg.network));
  if (!net->has_coordinates() &&
      std::find(cfg.models.begin(), cfg.models.end(), ModelFamily::C1) != cfg.models.end()) {
    throw Error(ErrorCode::MissingCoordinates, "model C1 needs vertex coordinates");
  }
  const std::vector<PointOnNetwork> sites =
      sample_points(*net, cfg.n_sites, splitmix64(cfg.seed ^ detail::kSiteStream));
  std::vector<double> fixed;
  if (cfg.fix_times) {
    Rng rng = make_rng(cfg.seed, detail::kFixedTimeStream);
    fixed = detail::draw_times(rng, cfg.n_sites * cfg.times_per_site);
  }

  std::vector<ReplicateRow> rows(cfg.n_replicates);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.n_replicates; r = next++) {
      try {
        rows[r] = run_replicate(cfg, net, sites, cfg.fix_times ? &fixed : nullptr, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.n_replicates;
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, cfg.n_replicates);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return summarize(std::move(rows), cfg.models, cfg.truth);
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_replicates_csv(std::ostream& out, const ExperimentReport& report) {
  using io::format_double;
  out << "replicate,model,loglik,sigma2,c_S,c_T,iterations,converged,winner,tie\n";
  for (const ReplicateRow& r : report.replicates) {
    for (std::size_t k = 0; k < r.fits.size(); ++k) {
      const FitResult& f = r.fits[k].result;
      out << r.replicate << ',' << to_string(r.fits[k].model) << ',' << format_double(f.loglik) << ','
          << format_double(f.estimates.sigma2) << ',' << format_double(f.estimates.c_S) << ','
          << format_double(f.estimates.c_T) << ',' << f.iterations << ',' << (f.converged ? 1 : 0) << ','
          << (r.winner == k ? 1 : 0) << ',' << (r.tie ? 1 : 0) << '\n';
    }
  }
}

inline void write_summary_csv(std::ostream& out, const ExperimentReport& report) {
  using io::format_double;
  out << "model,win_proportion,wins,ties,mae_sigma2,rmse_sigma2,mae_c_S,rmse_c_S,mae_c_T,rmse_c_T\n";
  for (const ModelSummary& s : report.summary) {
    out << to_string(s.model) << ',' << format_double(s.win_proportion) << ',' << s.wins << ',' << s.ties << ','
        << format_double(s.sigma2.mae) << ',' << format_double(s.sigma2.rmse) << ',' << format_double(s.c_S.mae)
        << ',' << format_double(s.c_S.rmse) << ',' << format_double(s.c_T.mae) << ','
        << format_double(s.c_T.rmse) << '\n';
  }
}

}  // namespace netkernel

#endif  // NETKERNEL_STUDY_HPP
