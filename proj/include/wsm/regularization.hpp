#pragma once

//! Finite-size atom: the point-atom potential averaged over a spherical
//! probability density whose near point sits at height z above the mirror.
//!
//! Because the point potential depends on height only, the 3D average reduces
//! to a 1D average against the axial marginal w(u) of the density, with u the
//! distance above the sphere's near point (sphere centre at u = R).

#include "wsm/errors.hpp"
#include "wsm/numerics/quadrature.hpp"
#include "wsm/potential_table.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace wsm {

enum class DensityKind { Uniform, Parabolic };

inline std::string to_string(DensityKind k) {
  return k == DensityKind::Uniform ? "uniform" : "parabolic";
}

inline DensityKind parse_density_kind(const std::string &s) {
  if (s == "uniform" || s == "rho1")
    return DensityKind::Uniform;
  if (s == "parabolic" || s == "rho2")
    return DensityKind::Parabolic;
  throw ValidationError("unknown density profile '" + s + "'");
}

struct DensityProfile {
  DensityKind kind = DensityKind::Uniform;
  double radius = 200e-12; // m

  void validate() const {
    if (!(radius > 0.0))
      throw ValidationError("atomic radius must be > 0");
  }
};

/// Axial marginal of a spherical density, u in [0, 2R].
class AxialWeight {
public:
  AxialWeight(DensityKind kind, double radius) : kind_(kind), r_(radius) {}

  [[nodiscard]] DensityKind kind() const { return kind_; }
  [[nodiscard]] double radius() const { return r_; }

  [[nodiscard]] double operator()(double u) const {
    if (u <= 0.0 || u >= 2.0 * r_)
      return 0.0;
    const double s = u - r_;
    const double disk = r_ * r_ - s * s; // squared radius of the slice
    if (kind_ == DensityKind::Uniform)
      return 3.0 * disk / (4.0 * r_ * r_ * r_);
    return 15.0 * disk * disk / (16.0 * std::pow(r_, 5));
  }

private:
  DensityKind kind_;
  double r_;
};

/// Marginal with u measured in units of length_unit (lattice periods when
/// length_unit = lambda_l / 2).
inline AxialWeight axial_weight(const DensityProfile &profile,
                                double length_unit = 1.0) {
  profile.validate();
  return {profile.kind, profile.radius / length_unit};
}

/// <cos(k (u - R))> under w. Symmetric about the centre, so the sine moment
/// vanishes and averaging cos(k (z + u)) gives phi * cos(k (z + R)).
inline double cosine_moment(const AxialWeight &w, double wavenumber) {
  const double r = w.radius();
  return integrate_fixed(
      [&](double u) { return w(u) * std::cos(wavenumber * (u - r)); }, 0.0, 2.0 * r);
}

/// V_reg(z) = int_0^{2R} w(u) V(z + u) du, z and R in the same unit.
///
/// The panel [0, R] is integrated in v = log(1 + u/z): the point potential is
/// steep on the scale z near contact and the log map spreads that over the
/// panel. [R, 2R] is smooth and integrated directly.
template <class Fn>
double regularize(Fn &&point_potential, const AxialWeight &w, double z,
                  double rel_tol = 1e-9) {
  if (!(z > 0.0))
    throw DomainError("regularize: z must be > 0");
  const double r = w.radius();
  auto inner = [&](double v) {
    const double t = z * std::exp(v);
    return w(z * std::expm1(v)) * point_potential(t) * t;
  };
  auto outer = [&](double u) { return w(u) * point_potential(z + u); };
  // Depth is capped: the source is itself a quadrature result, and asking for
  // more than its noise floor must fail fast rather than bisect forever.
  const double a = integrate(inner, 0.0, std::log1p(r / z), rel_tol,
                             "regularize (near panel)", 0.0, 10)
                       .value;
  const double b =
      integrate(outer, r, 2.0 * r, rel_tol, "regularize (far panel)", 0.0, 10).value;
  return a + b;
}

template <class Fn>
double regularize(Fn &&point_potential, const DensityProfile &profile, double z,
                  double length_unit) {
  return regularize(std::forward<Fn>(point_potential), axial_weight(profile, length_unit),
                    z);
}

/// Regularized table on target.z_min..target.z_max. The source must cover
/// [target.z_min, target.z_max + 2R].
inline PotentialTable regularize_table(const PotentialTable &source,
                                       const DensityProfile &profile,
                                       double length_unit, GridSpec target) {
  const AxialWeight w = axial_weight(profile, length_unit);
  if (target.z_min < source.z_min() ||
      target.z_max + 2.0 * w.radius() > source.z_max() * (1.0 + 1e-12))
    throw ValidationError("regularize_table: source table range [" +
                          std::to_string(source.z_min()) + ", " +
                          std::to_string(source.z_max()) +
                          "] does not cover the target range plus 2R");
  return build_potential_table(
      [&](double z) { return regularize(source, w, z); }, target);
}

/// Same grid as the source, trimmed by 2R at the top.
inline PotentialTable regularize_table(const PotentialTable &source,
                                       const DensityProfile &profile,
                                       double length_unit) {
  const double two_r = 2.0 * profile.radius / length_unit;
  GridSpec target;
  target.z_min = source.z_min();
  target.z_max = source.z_max() - two_r;
  if (!(target.z_max > target.z_min))
    throw ValidationError("regularize_table: source range shorter than 2R");
  target.nodes = source.size();
  return regularize_table(source, profile, length_unit, target);
}

} // namespace wsm
