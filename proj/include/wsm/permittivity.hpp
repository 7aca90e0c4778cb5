#pragma once

//! Mirror permittivity on the imaginary frequency axis and the Fresnel
//! reflection coefficients of a planar nonmagnetic half-space.

#include "wsm/errors.hpp"
#include "wsm/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace wsm {

struct PerfectConductor {};

/// eps(i xi) = 1 + wp^2 / (xi (xi + gamma)); gamma = 0 is the plasma model.
struct DrudeModel {
  double plasma_frequency = 1.37e16; // rad/s (gold)
  double relaxation_rate = 5.32e13;  // rad/s
};

struct LorentzOscillator {
  double strength = 0.0;  // rad/s, oscillator plasma frequency
  double resonance = 0.0; // rad/s
  double damping = 0.0;   // rad/s
};

/// eps(i xi) = 1 + sum wp_j^2 / (w_j^2 + xi^2 + g_j xi)
struct LorentzOscillators {
  std::vector<LorentzOscillator> oscillators;
};

/// eps sampled on an increasing xi grid; log-linear interpolation of eps - 1,
/// constant below the grid, ~xi^-2 above.
struct TabulatedPermittivity {
  std::vector<double> xi;
  std::vector<double> eps;
};

using PermittivityModel =
    std::variant<PerfectConductor, DrudeModel, LorentzOscillators, TabulatedPermittivity>;

inline std::string permittivity_label(const PermittivityModel &m) {
  struct V {
    std::string operator()(const PerfectConductor &) const { return "perfect-conductor"; }
    std::string operator()(const DrudeModel &) const { return "drude"; }
    std::string operator()(const LorentzOscillators &) const { return "lorentz"; }
    std::string operator()(const TabulatedPermittivity &) const { return "tabulated"; }
  };
  return std::visit(V{}, m);
}

inline void validate_permittivity(const PermittivityModel &m) {
  if (const auto *d = std::get_if<DrudeModel>(&m)) {
    if (!(d->plasma_frequency > 0.0) || !(d->relaxation_rate >= 0.0))
      throw ValidationError("Drude model needs plasma frequency > 0 and damping >= 0");
  } else if (const auto *l = std::get_if<LorentzOscillators>(&m)) {
    if (l->oscillators.empty())
      throw ValidationError("Lorentz model needs at least one oscillator");
    for (const auto &o : l->oscillators)
      if (!(o.strength >= 0.0) || !(o.resonance > 0.0) || !(o.damping >= 0.0))
        throw ValidationError("Lorentz oscillator parameters out of range");
  } else if (const auto *t = std::get_if<TabulatedPermittivity>(&m)) {
    if (t->xi.size() < 2 || t->xi.size() != t->eps.size())
      throw ValidationError("tabulated permittivity needs >= 2 matching samples");
    for (std::size_t i = 0; i < t->xi.size(); ++i) {
      if (!(t->xi[i] > 0.0))
        throw ValidationError("tabulated permittivity: xi must be > 0");
      if (i > 0 && !(t->xi[i] > t->xi[i - 1]))
        throw ValidationError("tabulated permittivity: xi grid must be strictly increasing");
      if (!(t->eps[i] >= 1.0))
        throw ValidationError("tabulated permittivity: eps(i xi) < 1 at xi = " +
                              std::to_string(t->xi[i]));
    }
  }
}

struct SurfaceModel {
  PermittivityModel permittivity = PerfectConductor{};
  double temperature = 0.0;    // K
  double mass_density = 2330.0; // kg/m^3

  void validate() const {
    if (!(temperature >= 0.0))
      throw ValidationError("surface temperature must be >= 0");
    if (!(mass_density > 0.0))
      throw ValidationError("surface mass density must be > 0");
    validate_permittivity(permittivity);
  }
  [[nodiscard]] bool perfect() const {
    return std::holds_alternative<PerfectConductor>(permittivity);
  }
};

namespace detail {

inline double tabulated_eps(const TabulatedPermittivity &t, double xi) {
  if (xi <= t.xi.front())
    return t.eps.front();
  if (xi >= t.xi.back())
    return 1.0 + (t.eps.back() - 1.0) * (t.xi.back() / xi) * (t.xi.back() / xi);
  const auto it = std::upper_bound(t.xi.begin(), t.xi.end(), xi);
  const std::size_t j = static_cast<std::size_t>(it - t.xi.begin());
  const double a = t.eps[j - 1] - 1.0, b = t.eps[j] - 1.0;
  const double s = std::log(xi / t.xi[j - 1]) / std::log(t.xi[j] / t.xi[j - 1]);
  if (a > 0.0 && b > 0.0)
    return 1.0 + a * std::pow(b / a, s);
  return 1.0 + a + (b - a) * s;
}

} // namespace detail

/// eps(i xi); +infinity for conductors at xi = 0.
inline double permittivity(const PermittivityModel &m, double xi) {
  if (!(xi >= 0.0))
    throw DomainError("permittivity needs xi >= 0");
  constexpr double inf = std::numeric_limits<double>::infinity();
  struct V {
    double xi;
    double operator()(const PerfectConductor &) const { return inf; }
    double operator()(const DrudeModel &d) const {
      if (xi == 0.0)
        return inf;
      return 1.0 + d.plasma_frequency * d.plasma_frequency / (xi * (xi + d.relaxation_rate));
    }
    double operator()(const LorentzOscillators &l) const {
      double e = 1.0;
      for (const auto &o : l.oscillators)
        e += o.strength * o.strength /
             (o.resonance * o.resonance + xi * xi + o.damping * xi);
      return e;
    }
    double operator()(const TabulatedPermittivity &t) const {
      const double e = detail::tabulated_eps(t, xi);
      if (e < 1.0)
        throw ValidationError("tabulated permittivity below 1");
      return e;
    }
  };
  return std::visit(V{xi}, m);
}

/// eps(i xi) xi^2, finite at xi = 0 for every model except the perfect conductor.
inline double permittivity_xi2(const PermittivityModel &m, double xi) {
  if (const auto *d = std::get_if<DrudeModel>(&m)) {
    const double wp2 = d->plasma_frequency * d->plasma_frequency;
    if (d->relaxation_rate == 0.0)
      return xi * xi + wp2;
    return xi * xi + wp2 * xi / (xi + d->relaxation_rate);
  }
  return permittivity(m, xi) * xi * xi;
}

/// Static TM reflection (eps(0) - 1) / (eps(0) + 1); 1 for conductors.
inline double static_tm_reflection(const PermittivityModel &m) {
  const double e = permittivity(m, 0.0);
  if (std::isinf(e))
    return 1.0;
  return (e - 1.0) / (e + 1.0);
}

/// (eps(i xi) - 1) / (eps(i xi) + 1)
inline double surface_response(const PermittivityModel &m, double xi) {
  const double e = permittivity(m, xi);
  if (std::isinf(e))
    return 1.0;
  return (e - 1.0) / (e + 1.0);
}

enum class Polarization { TE, TM };

struct Reflection {
  double te = 0.0;
  double tm = 0.0;
};

/// Both Fresnel coefficients at transverse wavenumber k (1/m) and imaginary
/// frequency xi (rad/s).
inline Reflection fresnel(double k, double xi, const PermittivityModel &m,
                          double c = PhysicalConstants{}.c) {
  if (!(k >= 0.0) || !(xi >= 0.0) || (k == 0.0 && xi == 0.0))
    throw DomainError("fresnel needs k >= 0, xi >= 0, not both zero");
  if (std::holds_alternative<PerfectConductor>(m))
    return {-1.0, 1.0};
  const double kv = xi / c;
  const double big_k = std::sqrt(kv * kv + k * k);
  const double km = std::sqrt(permittivity_xi2(m, xi) / (c * c) + k * k);
  Reflection r;
  r.te = (big_k - km) / (big_k + km);
  const double eps = permittivity(m, xi);
  if (std::isinf(eps))
    r.tm = 1.0;
  else
    r.tm = (eps * big_k - km) / (eps * big_k + km);
  return r;
}

inline double fresnel(Polarization p, double k, double xi, const PermittivityModel &m,
                      double c = PhysicalConstants{}.c) {
  const auto r = fresnel(k, xi, m, c);
  return p == Polarization::TE ? r.te : r.tm;
}

/// Frequencies where eps(i xi) changes character; quadrature breakpoints.
inline std::vector<double> permittivity_scales(const PermittivityModel &m) {
  std::vector<double> s;
  if (const auto *d = std::get_if<DrudeModel>(&m)) {
    s.push_back(d->plasma_frequency);
    if (d->relaxation_rate > 0.0)
      s.push_back(d->relaxation_rate);
  } else if (const auto *l = std::get_if<LorentzOscillators>(&m)) {
    for (const auto &o : l->oscillators)
      s.push_back(o.resonance);
  } else if (const auto *t = std::get_if<TabulatedPermittivity>(&m)) {
    s.push_back(t->xi.front());
    s.push_back(t->xi.back());
  }
  return s;
}

} // namespace wsm
