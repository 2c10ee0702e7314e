#ifndef NETKERNEL_VALIDITY_HPP
#define NETKERNEL_VALIDITY_HPP
#pragma once

#include <string>
#include <type_traits>
#include <variant>

#include "netkernel/kernels.hpp"
#include "netkernel/network.hpp"

namespace netkernel {

/// Outcome of the sufficient-condition check. Valid carries the governing rule;
/// Invalid carries the violated necessary condition; Unknown means neither applies.
struct ValidityVerdict {
  enum class Status { Valid, Invalid, Unknown };
  Status status = Status::Unknown;
  std::string rule;    // theorem citation, set for Valid
  std::string reason;  // set for Invalid and Unknown
  std::string note;    // caveats that do not change the status

  [[nodiscard]] bool valid() const noexcept { return status == Status::Valid; }
  [[nodiscard]] bool invalid() const noexcept { return status == Status::Invalid; }

  static ValidityVerdict make_valid(std::string rule, std::string note = {}) {
    return {Status::Valid, std::move(rule), {}, std::move(note)};
  }
  static ValidityVerdict make_invalid(std::string reason) { return {Status::Invalid, {}, std::move(reason), {}}; }
  static ValidityVerdict make_unknown(std::string reason) { return {Status::Unknown, {}, std::move(reason), {}}; }
};

inline std::string to_string(ValidityVerdict::Status s) {
  switch (s) {
    case ValidityVerdict::Status::Valid: return "valid";
    case ValidityVerdict::Status::Invalid: return "invalid";
    case ValidityVerdict::Status::Unknown: return "unknown";
  }
  return "unknown";
}

/// Sufficient Askey exponent on a tree with `leaves` leaves. The tree result is stated for
/// trees with ceil(m/2) leaves and nu >= 2m - 1; taking m = 2 * leaves gives 4 * leaves - 1,
/// the larger of the two readings.
inline double askey_nu_bound(int leaves) { return 4.0 * static_cast<double>(leaves) - 1.0; }

namespace detail {

/// Stieltjes whitelist (usable with rescaling beta in (0, 1]).
inline bool is_stieltjes(const SpatialFamily& phi) {
  return std::visit(
      [](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Dagum>) return f.b <= 1.0 && f.tau <= 1.0;
        if constexpr (std::is_same_v<T, GenCauchy>) return f.b_S <= 1.0;
        if constexpr (std::is_same_v<T, Schilling>) return true;
        return false;
      },
      phi);
}

/// psi composed with the lag is Bernstein. Linear time enters through the squared lag, so
/// 1 + u^a and c + u^a qualify up to a = 2 there; circular time uses the lag itself.
inline bool is_bernstein(const TemporalFamily& psi, TimeKind time) {
  const double power_cap = time == TimeKind::Linear ? 2.0 : 1.0;
  return std::visit(
      [&](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, DagumPsi>) return f.b <= 1.0 && f.tau <= 1.0;
        if constexpr (std::is_same_v<T, GenCauchyPsi>) return f.a <= 1.0 && f.b <= f.a;
        if constexpr (std::is_same_v<T, PowerPsi>) return f.a <= power_cap;
        if constexpr (std::is_same_v<T, GneitingPsi>) return f.a_T <= power_cap;
        return false;
      },
      psi);
}

inline std::string topology_scope_reason(const TopologyClass& topo) {
  return "geodesic metric on a " + to_string(topo) +
         " graph: a cycle with a chord or a theta subgraph breaks the 1-sum structure needed for d_G";
}

}  // namespace detail

/// Theorem-encoded validity of a Gneiting-type spec on a network of the given topology.
inline ValidityVerdict check_validity(const KernelSpec& spec, const TopologyClass& topo) {
  using V = ValidityVerdict;
  try {
    spec.validate();
  } catch (const Error& e) {
    return V::make_invalid(e.what());
  }
  const bool linear = spec.time_kind == TimeKind::Linear;
  const bool tree = topo.is_tree();

  // The spatial margin at u = 0 is a Matern in d; beyond 1/2 it fails on graphs with
  // branching (an interval, i.e. a 2-leaf tree, is the exception).
  if (const auto* m = std::get_if<Matern>(&spec.phi); m && m->nu > 0.5) {
    if (tree && topo.leaf_count <= 2) {
      return V::make_unknown("Matern nu > 1/2 on a path is not covered by the graph results");
    }
    return V::make_invalid("Matern restricted to (0,1/2] under Thm 1: nu = " + std::to_string(m->nu));
  }

  if (spec.metric == MetricKind::AmbientEuclidean) {
    return V::make_unknown("ambient Euclidean distance is outside the graph theorems");
  }

  // R2: Askey on a Euclidean tree.
  if (const auto* askey = std::get_if<Askey>(&spec.phi)) {
    if (!tree) return V::make_unknown("Askey validity is only established on Euclidean trees");
    const double bound = askey_nu_bound(topo.leaf_count);
    if (askey->nu < bound) {
      return V::make_invalid("Askey nu = " + std::to_string(askey->nu) + " below the tree bound " +
                             std::to_string(bound) + " for " + std::to_string(topo.leaf_count) + " leaves");
    }
    if (!(spec.beta >= 0.0 && spec.beta <= 1.0)) return V::make_unknown("Askey route needs beta in [0, 1]");
    if (spec.alpha < 1.0) return V::make_unknown("Askey route needs alpha >= 1");
    if (!detail::is_bernstein(spec.psi, spec.time_kind)) {
      return V::make_unknown("psi outside the Bernstein catalog ranges");
    }
    return V::make_valid(linear ? "Thm 2.1" : "Thm 2.2",
                         "alpha and nu are tied to the leaf count in the theorem; alpha >= 1 is checked");
  }

  if (!detail::is_bernstein(spec.psi, spec.time_kind)) {
    return V::make_unknown("psi outside the Bernstein catalog ranges");
  }

  // R1: rescaling form.
  if (spec.beta > 0.0) {
    if (spec.beta > 1.0) return V::make_unknown("beta > 1 is outside the rescaling theorem");
    if (!detail::is_stieltjes(spec.phi)) {
      return V::make_unknown("phi is not in the Stieltjes catalog (Dagum b,tau<=1; GenCauchy b_S<=1; Schilling)");
    }
    if (spec.alpha < 1.0) {
      return V::make_unknown("alpha in (0,1) is not covered; the rescaling theorem needs alpha >= 1");
    }
    if (spec.metric == MetricKind::Resistance) return V::make_valid(linear ? "Thm 1.1" : "Thm 1.2");
    if (topo.is_one_sum()) return V::make_valid("Thm 1.3");
    return V::make_invalid(detail::topology_scope_reason(topo));
  }

  // R3: multiplicative form.
  if (spec.beta < 0.0) {
    if (spec.beta < -1.0) return V::make_unknown("beta < -1 is outside the multiplicative theorem");
    if (!is_completely_monotone(spec.phi)) return V::make_unknown("phi is not completely monotone");
    if (spec.alpha < 1.0) return V::make_unknown("multiplicative route needs alpha >= 1");
    if (spec.metric == MetricKind::Geodesic && !topo.is_one_sum()) {
      return V::make_unknown(detail::topology_scope_reason(topo));
    }
    return V::make_valid(linear ? "Thm 3.1" : "Thm 3.2",
                         "theorem text fixes alpha = m+1 on trees with ceil(m/2) leaves; the worked example "
                         "states alpha >= 1, which is what is checked");
  }

  return V::make_unknown("beta = 0 (separable) is only covered for the Askey family");
}

/// Circular families: valid on any graph under d_R, and under d_G on 1-sums of cycles and trees.
inline ValidityVerdict check_validity(const CircularSpec& spec, const TopologyClass& topo) {
  using V = ValidityVerdict;
  try {
    detail::require_positive(spec.sigma2, "sigma2");
    detail::require_positive(spec.c_S, "c_S");
    validate(spec.family);
    validate(spec.inner);
  } catch (const Error& e) {
    return V::make_invalid(e.what());
  }
  if (!is_completely_monotone(spec.inner)) {
    return V::make_unknown("inner correlation is not completely monotone");
  }
  if (std::holds_alternative<AdaptedMultiquadric>(spec.family)) {
    return V::make_unknown("adapted multiquadric also needs 2g/(1+g^2) to be a correlation on the real line");
  }
  if (spec.metric == MetricKind::AmbientEuclidean) {
    return V::make_unknown("ambient Euclidean distance is outside the graph theorems");
  }
  if (spec.metric == MetricKind::Geodesic && !topo.is_one_sum()) {
    return V::make_unknown(detail::topology_scope_reason(topo));
  }
  return V::make_valid("Thm 4 (half-spectral, Table 3)");
}

inline ValidityVerdict check_validity(const CovarianceModel& model, const TopologyClass& topo) {
  return std::visit([&](const auto& s) { return check_validity(s, topo); }, model);
}

}  // namespace netkernel

#endif  // NETKERNEL_VALIDITY_HPP
