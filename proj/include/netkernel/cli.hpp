#ifndef NETKERNEL_CLI_HPP
#define NETKERNEL_CLI_HPP
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "netkernel/generate.hpp"
#include "netkernel/gp.hpp"
#include "netkernel/io.hpp"
#include "netkernel/kernels.hpp"
#include "netkernel/metrics.hpp"
#include "netkernel/network.hpp"
#include "netkernel/pdcheck.hpp"
#include "netkernel/study.hpp"
#include "netkernel/validity.hpp"

namespace netkernel {

/// Plot-ready CSV d,u,value over the product grid, d-major.
inline void emit_eval_grid(std::ostream& out, const CovarianceModel& model, const std::vector<double>& d_grid,
                           const std::vector<double>& u_grid) {
  auto monotone = [](const std::vector<double>& g) { return std::is_sorted(g.begin(), g.end()); };
  if (d_grid.empty() || u_grid.empty()) throw Error(ErrorCode::InvalidParams, "evaluation grids must be non-empty");
  if (!monotone(d_grid) || !monotone(u_grid)) throw Error(ErrorCode::InvalidParams, "evaluation grids must be sorted");
  out << "d,u,value\n";
  for (double d : d_grid) {
    for (double u : u_grid) {
      out << io::format_double(d) << ',' << io::format_double(u) << ',' << io::format_double(evaluate(model, d, u))
          << '\n';
    }
  }
}

namespace cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kMalformedInput = 2 };

inline int exit_code_for(ErrorCode code) {
  return (code == ErrorCode::ParseError || code == ErrorCode::IoError) ? kMalformedInput : kValidationFailure;
}

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool strict = false;
};

inline std::size_t resolve_threads(const GlobalOptions& g) {
  if (g.threads) return std::max<std::size_t>(1, *g.threads);
  if (const char* env = std::getenv("NETKERNEL_THREADS")) {
    const auto v = io::detail::parse_int(env);
    if (!v || *v < 1) throw Error(ErrorCode::ParseError, "NETKERNEL_THREADS must be a positive integer");
    return static_cast<std::size_t>(*v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct ResolvedSeed {
  std::uint64_t value = 0;
  std::string source;
};

/// Command line beats config; otherwise a fresh seed from entropy, recorded in run.json.
inline ResolvedSeed resolve_seed(const GlobalOptions& g, std::optional<std::uint64_t> from_config) {
  if (g.seed) return {*g.seed, "command_line"};
  if (from_config) return {*from_config, "config"};
  std::random_device rd;
  return {(static_cast<std::uint64_t>(rd()) << 32) ^ rd(), "entropy"};
}

inline fs::path require_out_dir(const GlobalOptions& g, const char* command) {
  if (g.out.empty()) throw Error(ErrorCode::ParseError, std::string(command) + " requires --out DIR");
  fs::create_directories(g.out);
  return g.out;
}

inline void write_run_json(const fs::path& dir, const std::string& command, const ResolvedSeed& seed,
                           const json& config, std::size_t threads) {
  json run{{"command", command},
           {"seed", seed.value},
           {"seed_source", seed.source},
           {"threads", threads},
           {"config", config}};
  io::write_file((dir / "run.json").string(), run.dump(2) + "\n");
}

inline json load_config(const GlobalOptions& g, const char* command) {
  if (g.config.empty()) throw Error(ErrorCode::ParseError, std::string(command) + " requires --config PATH");
  return io::load_json(g.config);
}

inline fs::path config_dir(const GlobalOptions& g) { return fs::path(g.config).parent_path(); }

inline std::optional<std::uint64_t> config_seed(const json& j, const std::string& context) {
  if (!j.contains("seed")) return std::nullopt;
  return static_cast<std::uint64_t>(io::get_integer(j, "seed", context));
}

inline std::string resolve_path(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_relative() && !base.empty()) ? (base / path).string() : path.string();
}

/// Warn on an Invalid verdict, or refuse under --strict.
inline bool admit_model(const CovarianceModel& model, const TopologyClass& topo, const std::string& label,
                        bool strict, std::ostream& err) {
  const ValidityVerdict v = check_validity(model, topo);
  if (!v.invalid()) return true;
  err << (strict ? "error: " : "warning: ") << label << " is Invalid on this network: " << v.reason << '\n';
  return !strict;
}

// ---------------------------------------------------------------------------
// Commands

inline int graph_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const Network net = io::load_network(path);
  const std::vector<int> bad = check_distance_consistency(net);
  if (!bad.empty()) {
    const auto adj = net.adjacency();
    err << path << ": " << bad.size() << " edge(s) longer than the shortest path between their endpoints\n";
    for (int id : bad) {
      const Edge& e = net.edges()[net.edge_index(id)];
      const double shortest = detail::dijkstra(adj, static_cast<int>(net.vertex_index(e.u)))[net.vertex_index(e.v)];
      err << "  edge " << id << " (" << e.u << "-" << e.v << "): length " << io::format_double(e.length)
          << " > shortest path " << io::format_double(shortest) << '\n';
    }
    return kValidationFailure;
  }
  out << "ok: " << net.vertex_count() << " vertices, " << net.edge_count() << " edges, topology "
      << to_string(classify_topology(net)) << '\n';
  return kOk;
}

inline int graph_info(const std::string& path, std::ostream& out) {
  const Network net = io::load_network(path);
  const TopologyClass topo = classify_topology(net);
  const std::vector<int> bad = check_distance_consistency(net);
  json info{{"vertices", net.vertex_count()},
            {"edges", net.edge_count()},
            {"total_length", net.total_length()},
            {"vertex_diameter", net.vertex_diameter()},
            {"topology", to_string(topo)},
            {"leaf_count", topo.leaf_count},
            {"blocks", biconnected_blocks(net).size()},
            {"distance_consistent", bad.empty()},
            {"inconsistent_edges", bad},
            {"has_coordinates", net.has_coordinates()}};
  out << info.dump(2) << '\n';
  return kOk;
}

inline int dist(const GlobalOptions& g, const std::string& network_path, const std::string& points_path,
                const std::string& metric_name, std::ostream& out) {
  MetricKind metric;
  try {
    metric = parse_metric(metric_name);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, std::string("--metric: ") + e.what());
  }
  const Network net = io::load_network(network_path);
  const auto records = io::load_points(points_path, &net);
  std::vector<PointOnNetwork> points;
  std::vector<int> ids;
  for (const auto& r : records) {
    points.push_back(r.point);
    ids.push_back(r.point_id);
  }
  const DistanceMatrix d = distance_matrix(net, points, metric);
  if (g.out.empty()) {
    io::write_distance_csv(out, d, ids);
    return kOk;
  }
  const fs::path dir = require_out_dir(g, "dist");
  std::ofstream file(dir / "distances.csv");
  io::write_distance_csv(file, d, ids);
  write_run_json(dir, "dist", {0, "unused"},
                 {{"network", network_path}, {"points", points_path}, {"metric", to_string(metric)}}, 1);
  return kOk;
}

inline int kernel_eval(const GlobalOptions& g, const std::string& spec_path, const std::vector<double>& d_grid,
                       const std::vector<double>& u_grid, std::ostream& out) {
  const CovarianceModel model = io::load_kernel(spec_path);
  if (d_grid.size() == 1 && u_grid.size() == 1 && g.out.empty()) {
    out << io::format_double(evaluate(model, d_grid[0], u_grid[0])) << '\n';
    return kOk;
  }
  if (g.out.empty()) {
    emit_eval_grid(out, model, d_grid, u_grid);
    return kOk;
  }
  const fs::path dir = require_out_dir(g, "kernel eval");
  std::ofstream file(dir / "grid.csv");
  emit_eval_grid(file, model, d_grid, u_grid);
  write_run_json(dir, "kernel eval", {0, "unused"},
                 {{"spec", io::kernel_to_json(model)}, {"d", d_grid}, {"u", u_grid}}, 1);
  return kOk;
}

inline int pd_check(const GlobalOptions& g, const std::string& spec_path, const std::string& network_path,
                    AuditConfig cfg, std::ostream& out) {
  const CovarianceModel model = io::load_kernel(spec_path);
  const Network net = io::load_network(network_path);
  const ResolvedSeed seed = resolve_seed(g, std::nullopt);
  cfg.seed = seed.value;
  const ValidityVerdict verdict = check_validity(model, classify_topology(net));
  const AuditReport report = audit(model, net, cfg);
  json j{{"verdict", report.passed() ? "pass" : "fail"},
         {"min_eig_ratio", report.min_eig_ratio},
         {"trials", report.trials},
         {"seed", seed.value},
         {"rel_tol", cfg.rel_tol},
         {"validity",
          {{"status", to_string(verdict.status)}, {"rule", verdict.rule}, {"reason", verdict.reason}}},
         {"worst_config", nullptr}};
  if (!g.out.empty()) {
    const fs::path dir = require_out_dir(g, "pd check");
    std::ofstream points(dir / "worst_points.csv");
    io::write_points_csv(points, report.worst_config.points);
    std::ofstream times(dir / "worst_times.csv");
    times << "time\n";
    for (double t : report.worst_config.times) times << io::format_double(t) << '\n';
    j["worst_config"] = {{"points", (dir / "worst_points.csv").string()},
                         {"times", (dir / "worst_times.csv").string()}};
    io::write_file((dir / "report.json").string(), j.dump(2) + "\n");
    write_run_json(dir, "pd check", seed,
                   {{"spec", io::kernel_to_json(model)},
                    {"network", network_path},
                    {"n_points", cfg.n_points},
                    {"n_times", cfg.n_times},
                    {"n_trials", cfg.n_trials},
                    {"rel_tol", cfg.rel_tol}},
                   1);
  }
  out << j.dump(2) << '\n';
  return report.passed() ? kOk : kValidationFailure;
}

inline CovarianceModel kernel_field(const json& j, const std::string& context, const fs::path& base) {
  const json& k = io::require(j, "kernel", context);
  if (k.is_string()) return io::load_kernel(resolve_path(base, k.get<std::string>()));
  return io::kernel_from_json(k, context + ".kernel");
}

inline int simulate_cmd(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(g, "simulate");
  const std::string ctx = g.config;
  const fs::path base = config_dir(g);
  io::check_keys(cfg, {"network", "kernel", "points", "n_sites", "times_per_site", "nugget", "n_reps", "seed"}, ctx);
  const ResolvedSeed seed = resolve_seed(g, config_seed(cfg, ctx));
  const auto net = std::make_shared<const Network>(
      resolve_network(io::network_source_from_json(io::require(cfg, "network", ctx), ctx + ".network", base)));
  const CovarianceModel model = kernel_field(cfg, ctx, base);
  const double nugget = io::get_number_or(cfg, "nugget", 0.0, ctx);
  const long long n_reps = cfg.contains("n_reps") ? io::get_integer(cfg, "n_reps", ctx) : 1;
  const long long per_site = cfg.contains("times_per_site") ? io::get_integer(cfg, "times_per_site", ctx) : 1;
  if (n_reps < 1 || per_site < 1) throw Error(ErrorCode::ParseError, ctx + ": n_reps and times_per_site must be >= 1");
  if (cfg.contains("points") == cfg.contains("n_sites")) {
    throw Error(ErrorCode::ParseError, ctx + ": exactly one of 'points' or 'n_sites' is required");
  }
  if (!admit_model(model, classify_topology(*net), "kernel", g.strict, err)) return kValidationFailure;

  std::vector<PointOnNetwork> sites;
  if (cfg.contains("points")) {
    for (const auto& r : io::load_points(resolve_path(base, io::get_string(cfg, "points", ctx)), net.get())) {
      sites.push_back(r.point);
    }
  } else {
    const long long n_sites = io::get_integer(cfg, "n_sites", ctx);
    if (n_sites < 1) throw Error(ErrorCode::ParseError, ctx + ": n_sites must be >= 1");
    sites = sample_points(*net, static_cast<std::size_t>(n_sites), splitmix64(seed.value ^ detail::kSiteStream));
  }
  SpaceTimeDesign design;
  design.network = net;
  design.time_kind = time_kind_of(model);
  Rng rng = make_rng(seed.value, detail::kFixedTimeStream);
  const double period = design.time_kind == TimeKind::Circular ? 2.0 * std::numbers::pi : 1.0;
  for (const PointOnNetwork& s : sites) {
    for (long long k = 0; k < per_site; ++k) {
      design.points.push_back(s);
      design.times.push_back(period * uniform01(rng));
    }
  }
  const Eigen::MatrixXd draws = simulate(design, SimSpec{model, nugget, seed.value}, static_cast<std::size_t>(n_reps));

  const fs::path dir = require_out_dir(g, "simulate");
  {
    std::ofstream points(dir / "points.csv");
    io::write_points_csv(points, sites);
    std::ofstream obs(dir / "observations.csv");
    obs << "rep,site,time,value\n";
    for (Eigen::Index r = 0; r < draws.rows(); ++r) {
      for (std::size_t i = 0; i < design.size(); ++i) {
        obs << r << ',' << i / static_cast<std::size_t>(per_site) << ',' << io::format_double(design.times[i]) << ','
            << io::format_double(draws(r, static_cast<Eigen::Index>(i))) << '\n';
      }
    }
  }
  json resolved = cfg;
  resolved["kernel"] = io::kernel_to_json(model);
  resolved["seed"] = seed.value;
  write_run_json(dir, "simulate", seed, resolved, 1);
  out << "wrote " << draws.rows() << " replicate(s) of " << design.size() << " observations to " << dir.string()
      << '\n';
  return kOk;
}

inline int fit_cmd(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(g, "fit");
  const std::string ctx = g.config;
  const fs::path base = config_dir(g);
  io::check_keys(cfg, {"network", "points", "observations", "models", "nugget", "rep", "seed"}, ctx);
  const ResolvedSeed seed = resolve_seed(g, config_seed(cfg, ctx));
  const auto net = std::make_shared<const Network>(
      resolve_network(io::network_source_from_json(io::require(cfg, "network", ctx), ctx + ".network", base)));
  const auto records = io::load_points(resolve_path(base, io::get_string(cfg, "points", ctx)), net.get());
  const auto observations = io::load_observations(resolve_path(base, io::get_string(cfg, "observations", ctx)));
  const long long rep = cfg.contains("rep") ? io::get_integer(cfg, "rep", ctx) : 0;
  std::vector<ModelFamily> models{ModelFamily::T, ModelFamily::C1, ModelFamily::C2};
  if (cfg.contains("models")) {
    models.clear();
    for (const json& m : cfg.at("models")) {
      if (!m.is_string()) throw Error(ErrorCode::ParseError, ctx + ": model names must be strings");
      try {
        models.push_back(parse_model_family(m.get<std::string>()));
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, ctx + ": " + e.what());
      }
    }
  }
  FitOptions options;
  options.nugget = io::get_number_or(cfg, "nugget", 0.1, ctx);
  options.seed = seed.value;

  std::map<int, PointOnNetwork> by_id;
  for (const auto& r : records) {
    if (!by_id.emplace(r.point_id, r.point).second) {
      throw Error(ErrorCode::ParseError, ctx + ": duplicate point_id " + std::to_string(r.point_id));
    }
  }
  SpaceTimeDesign design;
  design.network = net;
  std::vector<double> values;
  for (const auto& o : observations) {
    if (o.rep != rep) continue;
    const auto it = by_id.find(o.site);
    if (it == by_id.end()) throw Error(ErrorCode::ParseError, ctx + ": observation refers to unknown site " +
                                                                  std::to_string(o.site));
    design.points.push_back(it->second);
    design.times.push_back(o.time);
    values.push_back(o.value);
  }
  if (values.empty()) throw Error(ErrorCode::ParseError, ctx + ": no observations for rep " + std::to_string(rep));
  const TopologyClass topo = classify_topology(*net);
  for (ModelFamily m : models) {
    if (!admit_model(make_model(m, 1.0, 1.0, 1.0), topo, "model " + std::string(to_string(m)), g.strict, err)) {
      return kValidationFailure;
    }
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));

  std::ostringstream csv;
  csv << "model,loglik,sigma2,c_S,c_T,iterations,converged\n";
  for (ModelFamily m : models) {
    const FitResult f = fit(design, m, y, std::nullopt, options);
    csv << to_string(m) << ',' << io::format_double(f.loglik) << ',' << io::format_double(f.estimates.sigma2) << ','
        << io::format_double(f.estimates.c_S) << ',' << io::format_double(f.estimates.c_T) << ',' << f.iterations
        << ',' << (f.converged ? 1 : 0) << '\n';
  }
  out << csv.str();
  if (!g.out.empty()) {
    const fs::path dir = require_out_dir(g, "fit");
    io::write_file((dir / "fit.csv").string(), csv.str());
    json resolved = cfg;
    resolved["seed"] = seed.value;
    write_run_json(dir, "fit", seed, resolved, 1);
  }
  return kOk;
}

inline int sim_study_cmd(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const json j = load_config(g, "sim-study");
  bool has_seed = false;
  StudyConfig cfg = io::study_config_from_json(j, g.config, &has_seed, config_dir(g));
  const ResolvedSeed seed = resolve_seed(g, has_seed ? std::optional<std::uint64_t>(cfg.seed) : std::nullopt);
  cfg.seed = seed.value;
  const std::size_t threads = resolve_threads(g);
  const fs::path dir = require_out_dir(g, "sim-study");
  const TopologyClass topo = classify_topology(resolve_network(cfg.network));
  const TrueParams& t = cfg.truth;
  if (!admit_model(model_T(t.sigma2, t.c_S, t.c_T), topo, "true model T", g.strict, err)) return kValidationFailure;
  for (ModelFamily m : cfg.models) {
    if (!admit_model(make_model(m, 1.0, 1.0, 1.0), topo, "model " + std::string(to_string(m)), g.strict, err)) {
      return kValidationFailure;
    }
  }
  write_run_json(dir, "sim-study", seed, io::study_config_to_json(cfg), threads);
  const ExperimentReport report = run_sim_study(cfg, threads);
  {
    std::ofstream rep(dir / "replicates.csv");
    write_replicates_csv(rep, report);
    std::ofstream sum(dir / "summary.csv");
    write_summary_csv(sum, report);
  }
  write_summary_csv(out, report);
  return kOk;
}

// ---------------------------------------------------------------------------
// Entry point

/// Runs the command line `args` (program name excluded). Returns the process exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Space-time covariance kernels on graphs with Euclidean edges"};
  app.name("netkernel");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Configuration file");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--seed", g.seed, "Random seed (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads (fallback: NETKERNEL_THREADS)")->check(CLI::PositiveNumber);
  app.add_flag("--strict", g.strict, "Refuse kernels whose validity verdict is Invalid");

  auto* graph = app.add_subcommand("graph", "Network checks");
  graph->require_subcommand(1);
  graph->fallthrough();
  std::string graph_path;
  auto* graph_validate_cmd = graph->add_subcommand("validate", "Check distance consistency");
  graph_validate_cmd->add_option("path", graph_path, "Network JSON")->required();
  auto* graph_info_cmd = graph->add_subcommand("info", "Summarize a network");
  graph_info_cmd->add_option("path", graph_path, "Network JSON")->required();

  std::string network_path, points_path, metric_name = "geodesic";
  auto* dist_cmd = app.add_subcommand("dist", "Pairwise distance matrix");
  dist_cmd->add_option("--network", network_path, "Network JSON")->required();
  dist_cmd->add_option("--points", points_path, "Points CSV")->required();
  dist_cmd->add_option("--metric", metric_name, "geodesic | resistance | euclidean");

  auto* kernel = app.add_subcommand("kernel", "Kernel evaluation");
  kernel->require_subcommand(1);
  kernel->fallthrough();
  std::string spec_path;
  std::vector<double> d_grid, u_grid;
  auto* eval_cmd = kernel->add_subcommand("eval", "Evaluate at a point or over a grid");
  eval_cmd->add_option("--spec", spec_path, "Kernel JSON")->required();
  eval_cmd->add_option("--d", d_grid, "Distances (comma separated)")->delimiter(',')->required();
  eval_cmd->add_option("--u", u_grid, "Temporal separations (comma separated)")->delimiter(',')->required();

  auto* pd = app.add_subcommand("pd", "Positive-definiteness audit");
  pd->require_subcommand(1);
  pd->fallthrough();
  AuditConfig audit_cfg;
  auto* check_cmd = pd->add_subcommand("check", "Randomized Gram eigenvalue audit");
  check_cmd->add_option("--spec", spec_path, "Kernel JSON")->required();
  check_cmd->add_option("--network", network_path, "Network JSON")->required();
  check_cmd->add_option("--n-points", audit_cfg.n_points, "Points per trial");
  check_cmd->add_option("--n-times", audit_cfg.n_times, "Times per trial");
  check_cmd->add_option("--trials", audit_cfg.n_trials, "Number of trials");
  check_cmd->add_option("--rel-tol", audit_cfg.rel_tol, "Tolerance on min eigenvalue / max |eigenvalue|");

  auto* simulate_sub = app.add_subcommand("simulate", "Draw Gaussian fields on a design");
  auto* fit_sub = app.add_subcommand("fit", "Maximum-likelihood fits of T, C1, C2");
  auto* study_sub = app.add_subcommand("sim-study", "Model-selection simulation study");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kMalformedInput;
  }

  try {
    if (graph_validate_cmd->parsed()) return graph_validate(graph_path, out, err);
    if (graph_info_cmd->parsed()) return graph_info(graph_path, out);
    if (dist_cmd->parsed()) return dist(g, network_path, points_path, metric_name, out);
    if (eval_cmd->parsed()) return kernel_eval(g, spec_path, d_grid, u_grid, out);
    if (check_cmd->parsed()) return pd_check(g, spec_path, network_path, audit_cfg, out);
    if (simulate_sub->parsed()) return simulate_cmd(g, out, err);
    if (fit_sub->parsed()) return fit_cmd(g, out, err);
    if (study_sub->parsed()) return sim_study_cmd(g, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON value: " << e.what() << '\n';
    return kMalformedInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kMalformedInput;
  }
  err << "error: no command given\n";
  return kMalformedInput;
}

}  // namespace cli
}  // namespace netkernel

#endif  // NETKERNEL_CLI_HPP
