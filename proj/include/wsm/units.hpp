#pragma once

//! Physical constants, species data and the lattice unit system.
//!
//! Every computational module works in lattice units: energies in recoil
//! energies E_r = hbar^2 k_l^2 / 2m, lengths in lattice periods lambda_l / 2.
//! Conversions to SI and Hz go through a LatticeUnits value built once per
//! species; nothing downstream re-derives constants.

#include "wsm/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace wsm {

struct PhysicalConstants {
  double hbar = 1.054571817e-34;    // J s
  double c = 299792458.0;           // m / s
  double k_B = 1.380649e-23;        // J / K
  double G = 6.67430e-11;           // m^3 kg^-1 s^-2
  double epsilon0 = 8.8541878128e-12; // F / m
  double g_earth = 9.81;            // m / s^2
  double h = 2.0 * std::numbers::pi * 1.054571817e-34;

  void validate() const {
    if (!(hbar > 0 && c > 0 && k_B > 0 && G > 0 && epsilon0 > 0 && g_earth > 0 &&
          h > 0))
      throw ValidationError("physical constants must be strictly positive");
    if (std::abs(h - 2.0 * std::numbers::pi * hbar) > 1e-12 * h)
      throw ValidationError("inconsistent constants: h != 2 pi hbar");
  }

  /// Returns a copy with hbar replaced and h kept consistent.
  [[nodiscard]] PhysicalConstants with_hbar(double value) const {
    auto out = *this;
    out.hbar = value;
    out.h = 2.0 * std::numbers::pi * value;
    return out;
  }
};

inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg

struct SpeciesData {
  std::string name;
  double mass = 0.0; // kg
  std::string polarizability_ref = "rb-bundled";

  void validate() const {
    if (!(mass > 0.0))
      throw ValidationError("species '" + name + "': mass must be > 0");
  }
};

inline SpeciesData rubidium87() { return {"Rb87", 1.44316e-25, "rb-bundled"}; }
inline SpeciesData rubidium85() { return {"Rb85", 1.40999e-25, "rb-bundled"}; }

/// Recoil-energy unit system of one species in one lattice.
struct LatticeUnits {
  double lambda_l = 0.0;      // m
  double recoil_energy = 0.0; // J
  double length_unit = 0.0;   // m, lambda_l / 2
  double gravity_step = 0.0;  // m g (lambda_l/2) / E_r
  double mass = 0.0;          // kg
  double planck = 0.0;        // J s, copied so Hz conversion needs no constants

  [[nodiscard]] double to_hz(double energy) const {
    return energy * recoil_energy / planck;
  }
  [[nodiscard]] double from_hz(double hz) const {
    return hz * planck / recoil_energy;
  }
  [[nodiscard]] double to_joule(double energy) const { return energy * recoil_energy; }
  [[nodiscard]] double from_joule(double joule) const { return joule / recoil_energy; }
  [[nodiscard]] double to_meters(double periods) const { return periods * length_unit; }
  [[nodiscard]] double to_periods(double meters) const { return meters / length_unit; }
};

inline LatticeUnits make_units(const SpeciesData &species, double lambda_l,
                               const PhysicalConstants &constants = {}) {
  if (!(lambda_l > 0.0))
    throw ValidationError("laser wavelength must be > 0");
  species.validate();
  constants.validate();
  const double k_l = 2.0 * std::numbers::pi / lambda_l;
  LatticeUnits u;
  u.lambda_l = lambda_l;
  u.recoil_energy =
      constants.hbar * constants.hbar * k_l * k_l / (2.0 * species.mass);
  u.length_unit = 0.5 * lambda_l;
  u.gravity_step =
      species.mass * constants.g_earth * u.length_unit / u.recoil_energy;
  u.mass = species.mass;
  u.planck = constants.h;
  return u;
}

inline double to_hz(double energy, const LatticeUnits &units) {
  return units.to_hz(energy);
}

} // namespace wsm
