#pragma once

//! Casimir-Polder potential of a ground-state atom above a planar mirror.
//!
//! Zero temperature:
//!   V(z) = (hbar / pi c^2) int_0^inf dxi alpha*(i xi) I(xi, z)
//!   I(xi, z) = int_{xi/c}^inf dK e^{-2Kz} / 2 [xi^2 r_TE - (xi^2 + 2 c^2 k^2) r_TM]
//! with alpha* = alpha / (4 pi eps0), K^2 = k^2 + xi^2/c^2. This is the usual
//! (k, xi) double integral after k dk = K dK, with xi^2 folded in so the
//! xi -> 0 limit stays finite. Finite temperature replaces
//! (hbar/pi) int dxi by 2 k_B T sum'_n over Matsubara frequencies.
//!
//! Internally SI; public functions take z in lattice periods and return E_r.

#include "wsm/errors.hpp"
#include "wsm/numerics/quadrature.hpp"
#include "wsm/permittivity.hpp"
#include "wsm/polarizability.hpp"
#include "wsm/units.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace wsm {

struct CasimirPolderOptions {
  double outer_tolerance = 1e-9;
  double inner_tolerance = 1e-10;
  double matsubara_tolerance = 1e-8; // per-term, relative to the partial sum
  std::size_t max_matsubara_terms = 20'000'000;
};

namespace detail {

/// I(xi, z) for a perfect mirror, closed form.
inline double cp_inner_perfect(double xi, double z, double c) {
  const double kap = xi / c;
  if (2.0 * kap * z > 700.0)
    return 0.0;
  return -c * c * std::exp(-2.0 * kap * z) *
         (kap * kap / (2.0 * z) + kap / (2.0 * z * z) + 1.0 / (4.0 * z * z * z));
}

/// I(xi, z) for a general permittivity, K = xi/c + t/(2z).
inline double cp_inner(double xi, double z, const PermittivityModel &m, double c,
                       double rel_tol) {
  if (std::holds_alternative<PerfectConductor>(m))
    return cp_inner_perfect(xi, z, c);
  if (xi == 0.0)
    return -c * c * static_tm_reflection(m) / (4.0 * z * z * z);
  const double kap = xi / c;
  if (2.0 * kap * z > 700.0)
    return 0.0;
  const double xi2 = xi * xi;
  auto f = [&](double t) {
    const double q = t / (2.0 * z);
    const double k2 = q * (2.0 * kap + q);
    const auto r = fresnel(std::sqrt(k2), xi, m, c);
    return std::exp(-t) * (xi2 * r.te - (xi2 + 2.0 * c * c * k2) * r.tm);
  };
  const double v = integrate_to_infinity(f, 0.0, rel_tol, "Casimir-Polder transverse integral")
                       .value;
  return std::exp(-2.0 * kap * z) / (4.0 * z) * v;
}

inline std::vector<double> cp_breakpoints(const PolarizabilityModel &atom,
                                          const PermittivityModel &m, double scale) {
  std::vector<double> b = atom.frequencies();
  for (double s : permittivity_scales(m))
    b.push_back(s);
  // The e^{-2 xi z / c} envelope decays over `scale`; a geometric ladder keeps
  // each panel within a few e-folds of it.
  for (double f = 0.125; f <= 512.0; f *= 2.0)
    b.push_back(scale * f);
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double x : b)
    if (x > 0.0 && std::isfinite(x) && (out.empty() || x > out.back() * (1.0 + 1e-9)))
      out.push_back(x);
  return out;
}

/// int_0^inf f over panels split at the breakpoints. Later panels are held to
/// the accuracy of the running total, so negligible tails do not fail on their
/// own relative error.
template <class F>
double integrate_panels(F &&f, const std::vector<double> &breaks, double rel_tol,
                        const std::string &what) {
  double total = 0.0, a = 0.0;
  for (double b : breaks) {
    total += integrate(f, a, b, rel_tol, what, 0.1 * rel_tol * std::abs(total)).value;
    a = b;
  }
  // Tail in units of the last breakpoint: the [a, inf) map has unit scale.
  const double scale = a > 0.0 ? a : 1.0;
  auto tail = [&](double s) { return scale * f(a + scale * s); };
  total += integrate_to_infinity(tail, 0.0, rel_tol, what, 0.1 * rel_tol * std::abs(total))
               .value;
  return total;
}

inline double z_in_meters(double z, const LatticeUnits &u) {
  if (!(z > 0.0))
    throw DomainError("Casimir-Polder potential needs z > 0");
  return u.to_meters(z);
}

} // namespace detail

/// Zero-temperature potential (E_r) at z lattice periods.
inline double vcp_zero_temperature(double z, const PolarizabilityModel &atom,
                                   const SurfaceModel &surface, const LatticeUnits &units,
                                   const PhysicalConstants &k = {},
                                   const CasimirPolderOptions &opt = {}) {
  const double zm = detail::z_in_meters(z, units);
  const double c = k.c;
  const auto &m = surface.permittivity;
  auto f = [&](double xi) {
    return atom.alpha_volume(xi) * detail::cp_inner(xi, zm, m, c, opt.inner_tolerance);
  };
  const double integral =
      detail::integrate_panels(f, detail::cp_breakpoints(atom, m, c / (2.0 * zm)),
                               opt.outer_tolerance, "Casimir-Polder frequency integral");
  return units.from_joule(k.hbar / (std::numbers::pi * c * c) * integral);
}

/// One Matsubara term alpha*(i xi_n) I(xi_n, z), n = 0 at full weight.
inline double matsubara_term(std::size_t n, double zm, double temperature,
                             const PolarizabilityModel &atom, const SurfaceModel &surface,
                             const PhysicalConstants &k, const CasimirPolderOptions &opt) {
  const double xi = 2.0 * std::numbers::pi * static_cast<double>(n) * k.k_B * temperature / k.hbar;
  return atom.alpha_volume(xi) * detail::cp_inner(xi, zm, surface.permittivity, k.c,
                                                  opt.inner_tolerance);
}

/// Finite-temperature potential (E_r), Matsubara sum with the n = 0 term at
/// half weight, summed in ascending n with compensation.
inline double vcp_finite_temperature(double z, const PolarizabilityModel &atom,
                                     const SurfaceModel &surface, const LatticeUnits &units,
                                     double temperature, const PhysicalConstants &k = {},
                                     const CasimirPolderOptions &opt = {}) {
  if (!(temperature > 0.0))
    throw ValidationError("finite-temperature Casimir-Polder needs T > 0; "
                          "use the zero-temperature potential for T = 0");
  const double zm = detail::z_in_meters(z, units);
  CompensatedSum sum;
  sum.add(0.5 * matsubara_term(0, zm, temperature, atom, surface, k, opt));
  int small = 0;
  std::size_t n = 1;
  for (; n <= opt.max_matsubara_terms && small < 3; ++n) {
    const double term = matsubara_term(n, zm, temperature, atom, surface, k, opt);
    sum.add(term);
    small = std::abs(term) < opt.matsubara_tolerance * std::abs(sum.value()) ? small + 1 : 0;
  }
  if (small < 3)
    throw ConvergenceError("Matsubara sum not converged after " +
                           std::to_string(opt.max_matsubara_terms) + " terms");
  return units.from_joule(2.0 * k.k_B * temperature / (k.c * k.c) * sum.value());
}

/// Zero-temperature or Matsubara form depending on the surface temperature.
inline double vcp(double z, const PolarizabilityModel &atom, const SurfaceModel &surface,
                  const LatticeUnits &units, const PhysicalConstants &k = {},
                  const CasimirPolderOptions &opt = {}) {
  if (surface.temperature > 0.0)
    return vcp_finite_temperature(z, atom, surface, units, surface.temperature, k, opt);
  return vcp_zero_temperature(z, atom, surface, units, k, opt);
}

/// Non-retarded limit -(hbar / 4 pi z^3) int dxi alpha*(i xi) (eps-1)/(eps+1).
inline double vcp_vdw(double z, const PolarizabilityModel &atom, const SurfaceModel &surface,
                      const LatticeUnits &units, const PhysicalConstants &k = {},
                      const CasimirPolderOptions &opt = {}) {
  const double zm = detail::z_in_meters(z, units);
  const auto &m = surface.permittivity;
  auto f = [&](double xi) { return atom.alpha_volume(xi) * surface_response(m, xi); };
  const double integral = detail::integrate_panels(
      f, detail::cp_breakpoints(atom, m, atom.frequencies().front()), opt.outer_tolerance,
      "van der Waals frequency integral");
  return units.from_joule(-k.hbar / (4.0 * std::numbers::pi * zm * zm * zm) * integral);
}

/// Retarded perfect-mirror limit -3 hbar c alpha*(0) / (8 pi z^4).
inline double vcp_retarded_limit(double z, const PolarizabilityModel &atom,
                                 const LatticeUnits &units, const PhysicalConstants &k = {}) {
  const double zm = detail::z_in_meters(z, units);
  return units.from_joule(-3.0 * k.hbar * k.c * atom.static_alpha_over_4pieps0() /
                          (8.0 * std::numbers::pi * std::pow(zm, 4)));
}

/// Local exponent -z V'(z) / V(z) by a centred difference of relative step 1e-3.
template <class Fn> double power_law_exponent(Fn &&potential, double z) {
  if (!(z > 0.0))
    throw DomainError("power_law_exponent needs z > 0");
  const double h = 1e-3 * z;
  const double v0 = potential(z), vm = potential(z - h), vp = potential(z + h);
  if (v0 == 0.0 || (vm > 0.0) != (v0 > 0.0) || (vp > 0.0) != (v0 > 0.0) || vm == 0.0 ||
      vp == 0.0)
    throw DomainError("power_law_exponent: potential crosses zero near z = " +
                      std::to_string(z));
  return -z * (vp - vm) / (2.0 * h * v0);
}

/// Callable z -> V_CP(z) bundle for tables.
struct CasimirPolderPotential {
  PolarizabilityModel atom;
  SurfaceModel surface;
  LatticeUnits units;
  PhysicalConstants constants;
  CasimirPolderOptions options;

  double operator()(double z) const {
    return vcp(z, atom, surface, units, constants, options);
  }
};

} // namespace wsm
