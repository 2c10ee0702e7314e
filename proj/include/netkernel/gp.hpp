#ifndef NETKERNEL_GP_HPP
#define NETKERNEL_GP_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "netkernel/error.hpp"
#include "netkernel/kernels.hpp"
#include "netkernel/metrics.hpp"
#include "netkernel/nelder_mead.hpp"
#include "netkernel/network.hpp"
#include "netkernel/random.hpp"

namespace netkernel {

/// Observation locations: points[i] observed at times[i].
struct SpaceTimeDesign {
  std::shared_ptr<const Network> network;
  std::vector<PointOnNetwork> points;
  std::vector<double> times;
  TimeKind time_kind = TimeKind::Linear;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }

  void validate() const {
    if (!network) throw Error(ErrorCode::InvalidParams, "design has no network");
    if (points.size() != times.size()) throw Error(ErrorCode::InvalidParams, "points and times differ in length");
    for (const PointOnNetwork& p : points) p.validate(*network);
    for (double t : times) {
      if (!std::isfinite(t)) throw Error(ErrorCode::InvalidParams, "non-finite time");
      if (time_kind == TimeKind::Circular && !(t >= 0.0 && t < 2.0 * std::numbers::pi)) {
        throw Error(ErrorCode::InvalidParams, "circular times must lie in [0, 2pi)");
      }
    }
  }
};

struct SimSpec {
  CovarianceModel kernel;
  double nugget = 0.0;
  std::uint64_t seed = 0;
};

inline DistanceCache& shared_distance_cache() {
  static DistanceCache cache;
  return cache;
}

/// Temporal separations for every pair of observations.
inline Eigen::MatrixXd lag_matrix(const SpaceTimeDesign& design) {
  const auto n = static_cast<Eigen::Index>(design.size());
  Eigen::MatrixXd lag(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      lag(i, j) = lag(j, i) = temporal_separation(design.times[static_cast<std::size_t>(i)],
                                                  design.times[static_cast<std::size_t>(j)], design.time_kind);
    }
  }
  return lag;
}

/// Gram matrix plus nugget on the diagonal.
inline Eigen::MatrixXd covariance_matrix(const SpaceTimeDesign& design, const CovarianceModel& kernel, double nugget,
                                         DistanceCache& cache = shared_distance_cache()) {
  design.validate();
  if (!(nugget >= 0.0)) throw Error(ErrorCode::InvalidParams, "nugget must be nonnegative");
  if (time_kind_of(kernel) != design.time_kind) throw Error(ErrorCode::InvalidParams, "time kind mismatch");
  const auto dist = cache.get(*design.network, design.points, metric_of(kernel));
  Eigen::MatrixXd k = gram(kernel, *dist, design.times);
  k.diagonal().array() += nugget;
  return k;
}

namespace detail {

/// Lower Cholesky factor; one retry with 1e-10 * trace / n added to the diagonal.
inline Eigen::MatrixXd cholesky_with_jitter(Eigen::MatrixXd cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double jitter = 1e-10 * cov.trace() / static_cast<double>(std::max<Eigen::Index>(1, cov.rows()));
  cov.diagonal().array() += jitter;
  llt.compute(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "covariance not positive definite after jitter");
  }
  return llt.matrixL();
}

inline double gaussian_loglik_from_factor(const Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>>& llt,
                                          const Eigen::VectorXd& y) {
  const auto n = static_cast<double>(y.size());
  const Eigen::VectorXd white = llt.matrixL().solve(y);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det + white.squaredNorm());
}

}  // namespace detail

/// n_reps x n draws; row r = L z_r with z_r from the stream (seed, r).
inline Eigen::MatrixXd simulate(const SpaceTimeDesign& design, const SimSpec& sim, std::size_t n_reps) {
  if (!(sim.nugget >= 0.0)) throw Error(ErrorCode::InvalidParams, "nugget must be nonnegative");
  const Eigen::MatrixXd lower = detail::cholesky_with_jitter(covariance_matrix(design, sim.kernel, sim.nugget));
  const auto n = lower.rows();
  Eigen::MatrixXd draws(static_cast<Eigen::Index>(n_reps), n);
  Eigen::VectorXd z(n);
  for (std::size_t r = 0; r < n_reps; ++r) {
    Rng rng = make_rng(sim.seed, r);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = standard_normal(rng);
    draws.row(static_cast<Eigen::Index>(r)) = (lower.triangularView<Eigen::Lower>() * z).transpose();
  }
  return draws;
}

/// Exact zero-mean Gaussian log-density of y under Gram + nugget.
inline double loglik(const SpaceTimeDesign& design, const CovarianceModel& kernel, double nugget,
                     const Eigen::VectorXd& y) {
  if (static_cast<std::size_t>(y.size()) != design.size()) throw Error(ErrorCode::InvalidParams, "y length mismatch");
  Eigen::MatrixXd cov = covariance_matrix(design, kernel, nugget);
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(cov);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "covariance not positive definite");
  return detail::gaussian_loglik_from_factor(llt, y);
}

// ---------------------------------------------------------------------------
// Maximum likelihood over (sigma2, c_S, c_T)

enum class ModelFamily { T, C1, C2 };

inline std::string_view to_string(ModelFamily m) {
  switch (m) {
    case ModelFamily::T: return "T";
    case ModelFamily::C1: return "C1";
    case ModelFamily::C2: return "C2";
  }
  return "T";
}

inline ModelFamily parse_model_family(std::string_view s) {
  if (s == "T") return ModelFamily::T;
  if (s == "C1") return ModelFamily::C1;
  if (s == "C2") return ModelFamily::C2;
  throw Error(ErrorCode::ParseError, "unknown model '" + std::string(s) + "' (expected T, C1 or C2)");
}

inline KernelSpec make_model(ModelFamily m, double sigma2, double c_S, double c_T) {
  switch (m) {
    case ModelFamily::T: return model_T(sigma2, c_S, c_T);
    case ModelFamily::C1: return model_C1(sigma2, c_S, c_T);
    case ModelFamily::C2: return model_C2(sigma2, c_S, c_T);
  }
  throw Error(ErrorCode::InvalidParams, "unknown model family");
}

struct ScaleParams {
  double sigma2 = 1.0;
  double c_S = 1.0;
  double c_T = 1.0;
};

struct FitOptions {
  double nugget = 0.1;
  std::size_t n_starts = 3;
  int max_iterations = 2000;
  double f_tolerance = 1e-8;
  std::uint64_t seed = 0;
  // Network diameter for the c_S box; computed from the network when not set.
  std::optional<double> diameter;
};

struct FitResult {
  ScaleParams estimates;
  double loglik = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Log-likelihood as a function of (sigma2, c_S, c_T) for fixed design, data and family.
/// Distances and lags are computed once; each call assembles and factors in place.
class LikelihoodSurface {
 public:
  LikelihoodSurface(const SpaceTimeDesign& design, ModelFamily family, Eigen::VectorXd y, double nugget)
      : family_(family), y_(std::move(y)), nugget_(nugget) {
    design.validate();
    if (static_cast<std::size_t>(y_.size()) != design.size()) {
      throw Error(ErrorCode::InvalidParams, "y length mismatch");
    }
    const KernelSpec probe = make_model(family, 1.0, 1.0, 1.0);
    dist_ = shared_distance_cache().get(*design.network, design.points, probe.metric);
    lag_ = lag_matrix(design);
    work_.resize(lag_.rows(), lag_.cols());
  }

  /// -inf when the covariance is not numerically positive definite.
  double operator()(const ScaleParams& p) {
    const KernelSpec spec = make_model(family_, p.sigma2, p.c_S, p.c_T);
    const Eigen::Index n = work_.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) {
        work_(i, j) = detail::gneiting_unchecked(spec, dist_->values(i, j), lag_(i, j));
      }
      work_(j, j) += nugget_;
    }
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(work_);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    return detail::gaussian_loglik_from_factor(llt, y_);
  }

 private:
  ModelFamily family_;
  Eigen::VectorXd y_;
  double nugget_;
  std::shared_ptr<const DistanceMatrix> dist_;
  Eigen::MatrixXd lag_;
  Eigen::MatrixXd work_;
};

/// Nelder-Mead on (ln sigma2, ln c_S, ln c_T) inside the box
/// [1e-6, 1e3] x [1e-3 D, 1e2 D] x [1e-4, 1e2], best of `n_starts` starts.
inline FitResult fit(const SpaceTimeDesign& design, ModelFamily family, const Eigen::VectorXd& y,
                     std::optional<ScaleParams> init = std::nullopt, const FitOptions& options = {}) {
  if (options.n_starts == 0) throw Error(ErrorCode::InvalidParams, "fit needs at least one start");
  LikelihoodSurface surface(design, family, y, options.nugget);
  const double diameter = options.diameter.value_or(design.network->vertex_diameter());
  if (!(diameter > 0.0)) throw Error(ErrorCode::InvalidParams, "network diameter must be positive");

  if (!init) {
    const double mean = y.mean();
    const double var = y.size() > 1 ? (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1) : 0.0;
    const auto [tmin, tmax] = std::minmax_element(design.times.begin(), design.times.end());
    init = ScaleParams{std::max(var - options.nugget, 1e-4), diameter / 4.0,
                       std::max(0.5 * (*tmax - *tmin), 1e-3)};
  }

  Eigen::Vector3d lower(std::log(1e-6), std::log(1e-3 * diameter), std::log(1e-4));
  Eigen::Vector3d upper(std::log(1e3), std::log(1e2 * diameter), std::log(1e2));
  const Eigen::Vector3d start(std::log(init->sigma2), std::log(init->c_S), std::log(init->c_T));

  auto objective = [&](const Eigen::VectorXd& x) {
    return -surface({std::exp(x(0)), std::exp(x(1)), std::exp(x(2))});
  };
  NelderMeadOptions nm;
  nm.f_tolerance = options.f_tolerance;
  nm.max_iterations = options.max_iterations;

  Rng rng = make_rng(options.seed, 0xf17);
  FitResult best;
  for (std::size_t s = 0; s < options.n_starts; ++s) {
    Eigen::VectorXd x0 = start;
    if (s > 0) {
      // +/-50% multiplicative perturbation of each parameter.
      for (Eigen::Index i = 0; i < 3; ++i) x0(i) += std::log(uniform(rng, 0.5, 1.5));
    }
    const NelderMeadResult r = nelder_mead(objective, x0, lower, upper, nm);
    if (s == 0 || -r.f > best.loglik) {
      best.loglik = -r.f;
      best.estimates = {std::exp(r.x(0)), std::exp(r.x(1)), std::exp(r.x(2))};
      best.iterations = r.iterations;
      best.converged = r.converged;
    }
  }
  return best;
}

}  // namespace netkernel

#endif  // NETKERNEL_GP_HPP
