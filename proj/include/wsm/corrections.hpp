#pragma once

//! First-order Casimir-Polder energy corrections of the lattice states:
//! Delta E_n = int |psi_n(z)|^2 V_reg(z) dz on the eigenstate mesh.

#include "wsm/casimir_polder.hpp"
#include "wsm/errors.hpp"
#include "wsm/lattice.hpp"
#include "wsm/numerics/parallel.hpp"
#include "wsm/potential_table.hpp"
#include "wsm/regularization.hpp"
#include "wsm/units.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace wsm {

struct EnergyValue {
  double energy = 0.0; // E_r
  double hz = 0.0;
};

/// Mesh quadrature of |psi|^2 V. psi vanishes at both walls, so the
/// trapezoid rule reduces to a plain sum over interior nodes.
inline EnergyValue energy_correction(const EigenState &state, const PotentialTable &v,
                                     const LatticeUnits &units) {
  long double outside = 0.0L, sum = 0.0L;
  for (std::size_t i = 0; i < state.wavefunction.size(); ++i) {
    const double z = state.z(i);
    const long double p = static_cast<long double>(state.wavefunction[i]) *
                          state.wavefunction[i];
    if (z < v.z_min() * (1.0 - 1e-12) || z > v.z_max() * (1.0 + 1e-12))
      outside += p;
    sum += p * v(z);
  }
  const double lost = static_cast<double>(outside) * state.spacing;
  if (lost > 1e-8)
    throw ValidationError("energy_correction: probability " + std::to_string(lost) +
                          " of well " + std::to_string(state.well_index) +
                          " lies outside the potential table [" +
                          std::to_string(v.z_min()) + ", " + std::to_string(v.z_max()) +
                          "]");
  const double e = static_cast<double>(sum) * state.spacing;
  return {e, units.to_hz(e)};
}

/// Point-atom potential at the centre of well n, z = n periods.
inline EnergyValue well_center_estimate(const PotentialTable &v_point, int n,
                                        const LatticeUnits &units) {
  if (n < 1)
    throw ValidationError("well_center_estimate needs n >= 1");
  const double e = v_point(static_cast<double>(n));
  return {e, units.to_hz(e)};
}

struct CorrectionRow {
  int well = 0;
  double energy = 0.0; // E_r, negative for attraction
  double hz = 0.0;
  double radius = 0.0; // m
  DensityKind profile = DensityKind::Uniform;
  std::string surface;
};

struct CorrectionSettings {
  std::vector<double> radii{200e-12, 300e-12};
  std::vector<DensityKind> profiles{DensityKind::Uniform, DensityKind::Parabolic};
  int wells = 12;
  /// Average the trap and gravity terms over the atom as well.
  bool regularize_trap = false;
  std::size_t nodes_per_decade = 60;
};

/// Point and regularized potential tables spanning a lattice box.
struct CorrectionTables {
  PotentialTable point;
  std::vector<PotentialTable> regularized; // radii x profiles, radius-major
};

inline GridSpec log_grid(double z_min, double z_max, std::size_t per_decade) {
  GridSpec g;
  g.z_min = z_min;
  g.z_max = z_max;
  g.nodes = std::max<std::size_t>(
      16, static_cast<std::size_t>(std::ceil(std::log10(z_max / z_min) *
                                             static_cast<double>(per_decade))) + 1);
  return g;
}

/// Tables from the first mesh node to the box wall; the point table reaches
/// 2R further so every regularized node is covered.
template <class Fn>
CorrectionTables build_correction_tables(Fn &&point_potential, const LatticeConfig &config,
                                         const LatticeUnits &units,
                                         const CorrectionSettings &s) {
  if (s.radii.empty() || s.profiles.empty())
    throw ValidationError("correction table needs at least one radius and one profile");
  double r_max = 0.0;
  for (double r : s.radii) {
    DensityProfile{DensityKind::Uniform, r}.validate();
    r_max = std::max(r_max, units.to_periods(r));
  }
  const double z_lo = config.spacing();
  const double z_hi = config.z_max;
  CorrectionTables t;
  t.point = build_potential_table(point_potential,
                                  log_grid(z_lo, z_hi + 2.0 * r_max, s.nodes_per_decade));
  for (double r : s.radii)
    for (DensityKind k : s.profiles)
      t.regularized.push_back(regularize_table(t.point, DensityProfile{k, r},
                                               units.length_unit,
                                               log_grid(z_lo, z_hi, s.nodes_per_decade)));
  return t;
}

/// Corrections for wells 1..wells, every radius and profile, ordered by well,
/// then radius, then profile.
inline std::vector<CorrectionRow>
correction_table(const LatticeConfig &config, const LatticeUnits &units,
                 const CorrectionTables &tables, const std::string &surface_label,
                 const CorrectionSettings &s, const SolveOptions &opt = {}) {
  if (s.wells < 1)
    throw ValidationError("correction table needs at least one well");
  const std::size_t nr = s.radii.size(), np = s.profiles.size();
  if (tables.regularized.size() != nr * np)
    throw ValidationError("correction tables do not match the radius/profile settings");
  const auto wells = static_cast<std::size_t>(s.wells);

  // One solve when the trap is left point-like, one per (R, profile) otherwise.
  std::vector<std::vector<EigenState>> states(s.regularize_trap ? nr * np : 1);
  if (!s.regularize_trap) {
    states[0] = first_band_states(config, wells, opt);
  } else {
    for (std::size_t j = 0; j < nr * np; ++j) {
      LatticeConfig c = config;
      c.trap_smearing = axial_weight(DensityProfile{s.profiles[j % np], s.radii[j / np]},
                                     units.length_unit);
      states[j] = first_band_states(c, wells, opt);
    }
  }

  std::vector<CorrectionRow> rows(wells * nr * np);
  parallel_for(rows.size(), [&](std::size_t idx) {
    const std::size_t n = idx / (nr * np), j = idx % (nr * np);
    const EigenState &st = states[s.regularize_trap ? j : 0][n];
    const EnergyValue v = energy_correction(st, tables.regularized[j], units);
    CorrectionRow &r = rows[idx];
    r.well = st.well_index;
    r.energy = v.energy;
    r.hz = v.hz;
    r.radius = s.radii[j / np];
    r.profile = s.profiles[j % np];
    r.surface = surface_label;
  });
  return rows;
}

/// |Delta E_n| / |V(z = n)| for the first correction column, wells 1..wells.
struct WellCenterRow {
  int well = 0;
  double correction = 0.0; // E_r
  double center = 0.0;     // E_r
  double ratio = 0.0;
};

inline std::vector<WellCenterRow> well_center_comparison(const std::vector<CorrectionRow> &rows,
                                                         const PotentialTable &v_point,
                                                         const LatticeUnits &units,
                                                         double radius, DensityKind profile) {
  std::vector<WellCenterRow> out;
  for (const auto &r : rows) {
    if (r.radius != radius || r.profile != profile)
      continue;
    WellCenterRow w;
    w.well = r.well;
    w.correction = r.energy;
    w.center = well_center_estimate(v_point, r.well, units).energy;
    w.ratio = std::abs(w.correction) / std::abs(w.center);
    out.push_back(w);
  }
  return out;
}

} // namespace wsm
