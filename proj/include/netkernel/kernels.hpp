#ifndef NETKERNEL_KERNELS_HPP
#define NETKERNEL_KERNELS_HPP
#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>

#include "netkernel/error.hpp"
#include "netkernel/metrics.hpp"

namespace netkernel {

// ---------------------------------------------------------------------------
// Spatial families phi, normalized so phi(0) = 1.

struct Dagum {  // 1 - (r^b / (1 + r^b))^tau
  double b = 1.0;
  double tau = 1.0;
};
struct GenCauchy {  // (1 + r^b_S)^(-delta_S)
  double b_S = 1.0;
  double delta_S = 1.0;
};
struct Schilling {  // (1 - exp(-2 sqrt(r + a))) / sqrt(r + a), divided by its value at 0
  double a = 1.0;
};
struct Matern {  // 2^(1-nu) / Gamma(nu) r^nu K_nu(r)
  double nu = 0.5;
};
struct PowExp {  // exp(-r^a)
  double a = 1.0;
};
struct Askey {  // (1 - r)_+^nu
  double nu = 1.0;
};

using SpatialFamily = std::variant<Dagum, GenCauchy, Schilling, Matern, PowExp, Askey>;

// ---------------------------------------------------------------------------
// Temporal families psi: positive, nondecreasing on [0, inf).

struct DagumPsi {  // 1 + (t^b / (1 + t^b))^tau
  double b = 1.0;
  double tau = 1.0;
};
struct GenCauchyPsi {  // (1 + t^a)^(b / a)
  double a = 1.0;
  double b = 1.0;
};
struct PowerPsi {  // c + t^a
  double a = 1.0;
  double c = 1.0;
};
struct GneitingPsi {  // 1 + t^a_T
  double a_T = 1.0;
};

using TemporalFamily = std::variant<DagumPsi, GenCauchyPsi, PowerPsi, GneitingPsi>;

namespace detail {

template <class>
inline constexpr bool kAlwaysFalse = false;

inline void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidParams, std::string(name) + " must be positive and finite");
  }
}

/// x^p with the exponents that dominate likelihood loops short-circuited.
inline double fast_pow(double x, double p) {
  if (p == 1.0) return x;
  if (p == 2.0) return x * x;
  if (p == 0.5) return std::sqrt(x);
  if (p == -1.0) return 1.0 / x;
  if (p == -2.0) return 1.0 / (x * x);
  if (p == 0.0) return 1.0;
  return std::pow(x, p);
}

inline double matern(double nu, double r) {
  if (r == 0.0) return 1.0;
  if (r > 700.0) return 0.0;
  // K_nu(r) r^nu -> 2^(nu-1) Gamma(nu) as r -> 0; below 1e-12 the ratio is 1 to double precision.
  if (r < 1e-12) return 1.0;
  const double log_scale = (1.0 - nu) * std::numbers::ln2 - std::lgamma(nu) + nu * std::log(r);
  return std::exp(log_scale) * std::cyl_bessel_k(nu, r);
}

}  // namespace detail

inline void validate(const SpatialFamily& family) {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Dagum>) {
          detail::require_positive(f.b, "Dagum b");
          detail::require_positive(f.tau, "Dagum tau");
        } else if constexpr (std::is_same_v<T, GenCauchy>) {
          detail::require_positive(f.b_S, "GenCauchy b_S");
          if (f.b_S > 2.0) throw Error(ErrorCode::InvalidParams, "GenCauchy b_S must lie in (0, 2]");
          detail::require_positive(f.delta_S, "GenCauchy delta_S");
        } else if constexpr (std::is_same_v<T, Schilling>) {
          detail::require_positive(f.a, "Schilling a");
        } else if constexpr (std::is_same_v<T, Matern>) {
          detail::require_positive(f.nu, "Matern nu");
        } else if constexpr (std::is_same_v<T, PowExp>) {
          detail::require_positive(f.a, "PowExp a");
          if (f.a > 2.0) throw Error(ErrorCode::InvalidParams, "PowExp a must lie in (0, 2]");
        } else if constexpr (std::is_same_v<T, Askey>) {
          detail::require_positive(f.nu, "Askey nu");
        } else {
          static_assert(detail::kAlwaysFalse<T>);
        }
      },
      family);
}

inline void validate(const TemporalFamily& family) {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, DagumPsi>) {
          detail::require_positive(f.b, "DagumPsi b");
          detail::require_positive(f.tau, "DagumPsi tau");
        } else if constexpr (std::is_same_v<T, GenCauchyPsi>) {
          detail::require_positive(f.a, "GenCauchyPsi a");
          detail::require_positive(f.b, "GenCauchyPsi b");
        } else if constexpr (std::is_same_v<T, PowerPsi>) {
          detail::require_positive(f.a, "PowerPsi a");
          detail::require_positive(f.c, "PowerPsi c");
        } else if constexpr (std::is_same_v<T, GneitingPsi>) {
          detail::require_positive(f.a_T, "GneitingPsi a_T");
        } else {
          static_assert(detail::kAlwaysFalse<T>);
        }
      },
      family);
}

namespace detail {

inline double phi_unchecked(const SpatialFamily& family, double r) {
  return std::visit(
      [r](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Dagum>) {
          if (r == 0.0) return 1.0;
          const double rb = fast_pow(r, f.b);
          return 1.0 - fast_pow(rb / (1.0 + rb), f.tau);
        } else if constexpr (std::is_same_v<T, GenCauchy>) {
          return fast_pow(1.0 + fast_pow(r, f.b_S), -f.delta_S);
        } else if constexpr (std::is_same_v<T, Schilling>) {
          auto raw = [](double x) { return -std::expm1(-2.0 * std::sqrt(x)) / std::sqrt(x); };
          return raw(r + f.a) / raw(f.a);
        } else if constexpr (std::is_same_v<T, Matern>) {
          return matern(f.nu, r);
        } else if constexpr (std::is_same_v<T, PowExp>) {
          return std::exp(-fast_pow(r, f.a));
        } else {
          return r >= 1.0 ? 0.0 : fast_pow(1.0 - r, f.nu);
        }
      },
      family);
}

inline double psi_unchecked(const TemporalFamily& family, double t) {
  return std::visit(
      [t](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, DagumPsi>) {
          if (t == 0.0) return 1.0;
          const double tb = fast_pow(t, f.b);
          return 1.0 + fast_pow(tb / (1.0 + tb), f.tau);
        } else if constexpr (std::is_same_v<T, GenCauchyPsi>) {
          return fast_pow(1.0 + fast_pow(t, f.a), f.b / f.a);
        } else if constexpr (std::is_same_v<T, PowerPsi>) {
          return f.c + fast_pow(t, f.a);
        } else {
          return 1.0 + fast_pow(t, f.a_T);
        }
      },
      family);
}

}  // namespace detail

/// phi(r) for r >= 0. Askey vanishes for r >= 1; Matern takes its limit 1 at r = 0.
inline double eval_phi(const SpatialFamily& family, double r) {
  validate(family);
  if (!(r >= 0.0)) throw Error(ErrorCode::InvalidParams, "phi needs r >= 0");
  return detail::phi_unchecked(family, r);
}

inline double eval_psi(const TemporalFamily& family, double t) {
  validate(family);
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidParams, "psi needs t >= 0");
  return detail::psi_unchecked(family, t);
}

// ---------------------------------------------------------------------------
// Gneiting-type composition

/// sigma2 * psi(u/c_T)^-alpha * phi((d/c_S) * psi(u/c_T)^-beta).
/// beta > 0 rescales space by the temporal factor; beta < 0 multiplies it.
struct KernelSpec {
  double sigma2 = 1.0;
  double c_S = 1.0;
  double c_T = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  SpatialFamily phi = GenCauchy{};
  TemporalFamily psi = GneitingPsi{};
  MetricKind metric = MetricKind::Geodesic;
  TimeKind time_kind = TimeKind::Linear;

  void validate() const {
    detail::require_positive(sigma2, "sigma2");
    detail::require_positive(c_S, "c_S");
    detail::require_positive(c_T, "c_T");
    if (!std::isfinite(alpha) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidParams, "alpha/beta not finite");
    netkernel::validate(phi);
    netkernel::validate(psi);
  }
};

namespace detail {

inline double gneiting_unchecked(const KernelSpec& spec, double d, double u) {
  const double psi = psi_unchecked(spec.psi, u / spec.c_T);
  // Compare against the support radius directly so the boundary does not hinge on rounding of d / radius.
  if (std::holds_alternative<Askey>(spec.phi) && d >= spec.c_S * std::pow(psi, spec.beta)) return 0.0;
  return spec.sigma2 * fast_pow(psi, -spec.alpha) * phi_unchecked(spec.phi, (d / spec.c_S) * fast_pow(psi, -spec.beta));
}

}  // namespace detail

inline double eval_gneiting(const KernelSpec& spec, double d, double u) {
  spec.validate();
  if (!(d >= 0.0) || !(u >= 0.0)) throw Error(ErrorCode::InvalidParams, "distance and lag must be nonnegative");
  return detail::gneiting_unchecked(spec, d, u);
}

/// Variance at the space-time origin: sigma2 * psi(0)^-alpha.
inline double variance(const KernelSpec& spec) { return eval_gneiting(spec, 0.0, 0.0); }

// ---------------------------------------------------------------------------
// Named models

/// Generalized Cauchy in space (b_S = 1, delta_S = 2), psi = 1 + u/c_T, alpha = 2, beta = 1, geodesic.
inline KernelSpec model_T(double sigma2, double c_S, double c_T) {
  KernelSpec spec{sigma2, c_S, c_T, 2.0, 1.0, GenCauchy{1.0, 2.0}, GneitingPsi{1.0}, MetricKind::Geodesic,
                  TimeKind::Linear};
  spec.validate();
  return spec;
}

/// model_T with straight-line planar distance in place of the network metric.
inline KernelSpec model_C1(double sigma2, double c_S, double c_T) {
  KernelSpec spec = model_T(sigma2, c_S, c_T);
  spec.metric = MetricKind::AmbientEuclidean;
  return spec;
}

/// sigma2 * psi^-2 * {1 - rho^(b_S delta_S) (1 + rho^b_S)^-delta_S} with psi = eta + (u/c_T)^a_T and
/// rho = d / (c_S psi). The bracket is the Dagum family with (b, tau) = (b_S, delta_S).
/// Competitor fixings: delta_S = 1/2, eta = 1/2, a_T = 1/4, b_S = 1, beta = 1, geodesic.
inline KernelSpec model_C2(double sigma2, double c_S, double c_T) {
  KernelSpec spec{sigma2, c_S, c_T, 2.0, 1.0, Dagum{1.0, 0.5}, PowerPsi{0.25, 0.5}, MetricKind::Geodesic,
                  TimeKind::Linear};
  spec.validate();
  return spec;
}

/// Dynamically compactly supported model: Askey spatial part, support radius c_S * psi(u/c_T)^beta.
inline KernelSpec model_askey_st(double sigma2, double c_S, double c_T, double nu_S, double alpha, double beta,
                                 double a_T) {
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorCode::InvalidParams, "Askey model needs beta in [0, 1)");
  KernelSpec spec{sigma2, c_S, c_T, alpha, beta, Askey{nu_S}, GneitingPsi{a_T}, MetricKind::Geodesic,
                  TimeKind::Linear};
  spec.validate();
  return spec;
}

/// Multiplicative form (beta = -1): sigma2 psi^-alpha exp(-(d/c_S) psi).
inline KernelSpec model_multiplicative(double sigma2, double c_S, double c_T, double alpha, double a_T) {
  KernelSpec spec{sigma2, c_S, c_T, alpha, -1.0, PowExp{1.0}, GneitingPsi{a_T}, MetricKind::Resistance,
                  TimeKind::Linear};
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Circular time: cosine-series families in the circular lag with an inner spatial
// correlation g evaluated at d/c_S. All equal 1 at the origin.

struct NegBinomial {
  double eps = 0.5;
  double tau = 1.0;
};
struct Multiquadric {
  double eps = 0.5;
  double tau = 1.0;
};
struct SineSeries {};
struct SinePower {
  double a = 1.0;
};
struct AdaptedMultiquadric {
  double eps = 0.5;
  double tau = 1.0;
};
struct Poisson {
  double lambda = 1.0;
};

using CircularFamily = std::variant<NegBinomial, Multiquadric, SineSeries, SinePower, AdaptedMultiquadric, Poisson>;

inline void validate(const CircularFamily& family) {
  auto eps_tau = [](double eps, double tau) {
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidParams, "eps must lie in (0, 1)");
    detail::require_positive(tau, "tau");
  };
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, NegBinomial> || std::is_same_v<T, Multiquadric> ||
                      std::is_same_v<T, AdaptedMultiquadric>) {
          eps_tau(f.eps, f.tau);
        } else if constexpr (std::is_same_v<T, SinePower>) {
          if (!(f.a > 0.0 && f.a <= 2.0)) throw Error(ErrorCode::InvalidParams, "SinePower a must lie in (0, 2]");
        } else if constexpr (std::is_same_v<T, Poisson>) {
          detail::require_positive(f.lambda, "Poisson lambda");
        }
      },
      family);
}

/// Inner correlations admitted for the circular families: completely monotone with g(0) = 1.
inline bool is_completely_monotone(const SpatialFamily& family) {
  return std::visit(
      [](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GenCauchy>) return f.b_S <= 1.0;
        if constexpr (std::is_same_v<T, Dagum>) return f.b <= 1.0 && f.tau <= 1.0;
        if constexpr (std::is_same_v<T, PowExp>) return f.a <= 1.0;
        if constexpr (std::is_same_v<T, Matern>) return f.nu <= 0.5;
        if constexpr (std::is_same_v<T, Schilling>) return true;
        return false;
      },
      family);
}

namespace detail {

inline double circular_unchecked(const CircularFamily& family, double g, double theta) {
  const double gc = g * std::cos(theta);
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, NegBinomial>) {
          return std::pow((1.0 - f.eps) / (1.0 - f.eps * gc), f.tau);
        } else if constexpr (std::is_same_v<T, Multiquadric>) {
          return std::pow((1.0 - f.eps) * (1.0 - f.eps) / (1.0 + f.eps * f.eps - 2.0 * f.eps * gc), f.tau);
        } else if constexpr (std::is_same_v<T, SineSeries>) {
          return std::exp(gc - 1.0) * (1.0 + gc) / 2.0;
        } else if constexpr (std::is_same_v<T, SinePower>) {
          return 1.0 - std::pow(2.0, -f.a) * std::pow(1.0 - gc, f.a / 2.0);
        } else if constexpr (std::is_same_v<T, AdaptedMultiquadric>) {
          const double g2 = 1.0 + g * g;
          return std::pow(g2 * (1.0 - f.eps) / (g2 - 2.0 * f.eps * gc), f.tau);
        } else {
          return std::exp(f.lambda * (gc - 1.0));
        }
      },
      family);
}

}  // namespace detail

/// Closed-form circular-time correlation with g = phi_inner(d / c_S) and circular lag theta in [0, pi].
inline double eval_circular(const CircularFamily& family, const SpatialFamily& inner, double c_S, double d,
                            double theta) {
  validate(family);
  validate(inner);
  detail::require_positive(c_S, "c_S");
  if (!is_completely_monotone(inner)) {
    throw Error(ErrorCode::InnerFamilyNotCompletelyMonotone,
                "inner correlation must be completely monotone (GenCauchy b<=1, Dagum b,tau<=1, PowExp a<=1, "
                "Matern nu<=1/2, Schilling)");
  }
  if (!(d >= 0.0)) throw Error(ErrorCode::InvalidParams, "distance must be nonnegative");
  if (!(theta >= 0.0 && theta <= std::numbers::pi + 1e-12)) {
    throw Error(ErrorCode::InvalidParams, "circular lag must lie in [0, pi]");
  }
  return detail::circular_unchecked(family, detail::phi_unchecked(inner, d / c_S), theta);
}

struct CircularSpec {
  double sigma2 = 1.0;
  double c_S = 1.0;
  CircularFamily family = NegBinomial{};
  SpatialFamily inner = GenCauchy{};
  MetricKind metric = MetricKind::Resistance;

  void validate() const {
    detail::require_positive(sigma2, "sigma2");
    detail::require_positive(c_S, "c_S");
    netkernel::validate(family);
    netkernel::validate(inner);
    if (!is_completely_monotone(inner)) {
      throw Error(ErrorCode::InnerFamilyNotCompletelyMonotone, "inner correlation must be completely monotone");
    }
  }
};

// ---------------------------------------------------------------------------
// Either kind of model, evaluated uniformly by Gram assembly and audits.

using CovarianceModel = std::variant<KernelSpec, CircularSpec>;

inline MetricKind metric_of(const CovarianceModel& m) {
  return std::visit([](const auto& s) { return s.metric; }, m);
}

inline TimeKind time_kind_of(const CovarianceModel& m) {
  if (const auto* k = std::get_if<KernelSpec>(&m)) return k->time_kind;
  return TimeKind::Circular;
}

inline void validate(const CovarianceModel& m) {
  std::visit([](const auto& s) { s.validate(); }, m);
}

/// Covariance at spatial distance d and temporal separation u (already wrapped to [0, pi] if circular).
inline double evaluate(const CovarianceModel& m, double d, double u) {
  if (const auto* k = std::get_if<KernelSpec>(&m)) return eval_gneiting(*k, d, u);
  const auto& c = std::get<CircularSpec>(m);
  return c.sigma2 * eval_circular(c.family, c.inner, c.c_S, d, u);
}

namespace detail {

inline double evaluate_unchecked(const CovarianceModel& m, double d, double u) {
  if (const auto* k = std::get_if<KernelSpec>(&m)) return gneiting_unchecked(*k, d, u);
  const auto& c = std::get<CircularSpec>(m);
  return c.sigma2 * circular_unchecked(c.family, phi_unchecked(c.inner, d / c.c_S), u);
}

}  // namespace detail

/// Gram matrix: entry (i, j) = k(d_ij, separation(t_i, t_j)). Throws MetricMismatch when the
/// distance matrix was computed under a different metric than the model's.
inline Eigen::MatrixXd gram(const CovarianceModel& model, const DistanceMatrix& dmat, const std::vector<double>& times) {
  validate(model);
  if (dmat.metric != metric_of(model)) {
    throw Error(ErrorCode::MetricMismatch, "distance matrix is " + std::string(to_string(dmat.metric)) +
                                               " but the kernel expects " + std::string(to_string(metric_of(model))));
  }
  if (times.size() != dmat.n()) throw Error(ErrorCode::InvalidParams, "times and distance matrix sizes differ");
  const TimeKind tk = time_kind_of(model);
  const auto n = static_cast<Eigen::Index>(dmat.n());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double u = temporal_separation(times[static_cast<std::size_t>(i)], times[static_cast<std::size_t>(j)], tk);
      k(i, j) = k(j, i) = detail::evaluate_unchecked(model, dmat.values(i, j), u);
    }
  }
  return k;
}

}  // namespace netkernel

#endif  // NETKERNEL_KERNELS_HPP
