#pragma once

//! Yukawa-type correction to the atom-mirror gravitational interaction, the
//! two-isotope differential observable and exclusion curves.

#include "wsm/errors.hpp"
#include "wsm/lattice.hpp"
#include "wsm/numerics/parallel.hpp"
#include "wsm/permittivity.hpp"
#include "wsm/units.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace wsm {

struct YukawaParams {
  double alpha = 0.0;          // dimensionless strength
  double lambda = 1e-6;        // range, m
  double exponent_factor = 1.0; // decay exp(-f z / lambda); 1 or 2

  void validate() const {
    if (!std::isfinite(alpha))
      throw ValidationError("Yukawa alpha must be finite");
    if (!(lambda > 0.0))
      throw ValidationError("Yukawa lambda must be > 0");
    if (exponent_factor != 1.0 && exponent_factor != 2.0)
      throw ValidationError("Yukawa exponent_factor must be 1 or 2");
  }
};

/// H_Y(z) = 2 pi alpha G rho m lambda^2 exp(-f z / lambda), in E_r at z periods.
inline double yukawa_potential(double z, const YukawaParams &p, const SurfaceModel &surface,
                               const LatticeUnits &units, const PhysicalConstants &k = {}) {
  if (!(z >= 0.0))
    throw DomainError("yukawa_potential needs z >= 0");
  const double joule = 2.0 * std::numbers::pi * p.alpha * k.G * surface.mass_density *
                       units.mass * p.lambda * p.lambda *
                       std::exp(-p.exponent_factor * units.to_meters(z) / p.lambda);
  return units.from_joule(joule);
}

inline ExtraPotential yukawa_extra_potential(const YukawaParams &p,
                                             const SurfaceModel &surface,
                                             const LatticeUnits &units,
                                             const PhysicalConstants &k = {}) {
  p.validate();
  std::ostringstream tag;
  tag.precision(17);
  tag << "yukawa:a=" << p.alpha << ",l=" << p.lambda << ",f=" << p.exponent_factor
      << ",rho=" << surface.mass_density << ",m=" << units.mass
      << ",Er=" << units.recoil_energy << ",L=" << units.length_unit << ",G=" << k.G;
  return {[p, surface, units, k](double z) {
            return yukawa_potential(z, p, surface, units, k);
          },
          tag.str()};
}

/// <a| f |b> on the shared mesh.
template <class Fn>
double mesh_matrix_element(const EigenState &a, const EigenState &b, Fn &&f) {
  if (a.wavefunction.size() != b.wavefunction.size() || a.spacing != b.spacing)
    throw ValidationError("matrix element needs states on the same mesh");
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.wavefunction.size(); ++i)
    s += static_cast<long double>(a.wavefunction[i]) * b.wavefunction[i] * f(a.z(i));
  return static_cast<double>(s) * a.spacing;
}

enum class YukawaMode { Exact, Perturbative };

struct YukawaLevel {
  int well = 0;
  double energy = 0.0;       // E_n without H_Y, E_r
  double shift = 0.0;        // E^(Y)_n - E_n, E_r
  double shift_hz = 0.0;
  double perturbative = 0.0; // <psi_n|H_Y|psi_n>, E_r
};

/// Levels of wells 1..wells with and without H_Y. The exact shift comes from
/// the identity E^Y - E = <psi^Y|H_Y|psi> / <psi^Y|psi>, which avoids
/// subtracting two nearly equal eigenvalues.
inline std::vector<YukawaLevel> spectrum_with_yukawa(const LatticeConfig &config,
                                                     const YukawaParams &p,
                                                     const SurfaceModel &surface,
                                                     const LatticeUnits &units, int wells,
                                                     YukawaMode mode = YukawaMode::Exact,
                                                     const PhysicalConstants &k = {},
                                                     const SolveOptions &opt = {}) {
  if (wells < 1)
    throw ValidationError("spectrum_with_yukawa needs at least one well");
  p.validate();
  const auto base = first_band_states(config, static_cast<std::size_t>(wells), opt);
  auto hy = [&](double z) { return yukawa_potential(z, p, surface, units, k); };
  std::vector<EigenState> with;
  if (mode == YukawaMode::Exact && p.alpha != 0.0) {
    LatticeConfig c = config;
    c.extra_potential = yukawa_extra_potential(p, surface, units, k);
    with = first_band_states(c, static_cast<std::size_t>(wells), opt);
  }
  std::vector<YukawaLevel> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    YukawaLevel &l = out[i];
    l.well = base[i].well_index;
    l.energy = base[i].energy;
    l.perturbative = mesh_matrix_element(base[i], base[i], hy);
    if (mode == YukawaMode::Perturbative || p.alpha == 0.0) {
      l.shift = l.perturbative;
    } else {
      if (with[i].well_index != l.well)
        throw ValidationError("Yukawa run changed the well labels (well " +
                              std::to_string(l.well) + " vs " +
                              std::to_string(with[i].well_index) + ")");
      const double overlap = inner_product(with[i], base[i]);
      if (std::abs(overlap) < 0.5)
        throw ConvergenceError("Yukawa term mixes well " + std::to_string(l.well) +
                               " too strongly for a per-well shift");
      l.shift = mesh_matrix_element(with[i], base[i], hy) / overlap;
    }
    l.shift_hz = units.to_hz(l.shift);
  }
  return out;
}

/// Lattice depth of the second isotope: the same U in its own recoil units,
/// or the same physical trap (U scaled by the recoil-energy ratio).
enum class IsotopeDepth { OwnRecoil, SharedTrap };

struct IsotopePair {
  SpeciesData light = rubidium85();
  SpeciesData heavy = rubidium87();
  double lambda_l = 532e-9;
  IsotopeDepth depth = IsotopeDepth::OwnRecoil;
};

struct IsotopeLattice {
  LatticeUnits units;
  LatticeConfig config;
};

/// Configs for both isotopes on identical meshes. `base` gives U (in the heavy
/// isotope's E_r for SharedTrap), box and mesh; delta_g comes from the units.
inline std::pair<IsotopeLattice, IsotopeLattice>
isotope_lattices(const LatticeConfig &base, const IsotopePair &pair,
                 const PhysicalConstants &k = {}) {
  IsotopeLattice light, heavy;
  light.units = make_units(pair.light, pair.lambda_l, k);
  heavy.units = make_units(pair.heavy, pair.lambda_l, k);
  light.config = heavy.config = base;
  light.config.gravity_step = light.units.gravity_step;
  heavy.config.gravity_step = heavy.units.gravity_step;
  if (pair.depth == IsotopeDepth::SharedTrap)
    light.config.depth =
        base.depth * heavy.units.recoil_energy / light.units.recoil_energy;
  return {light, heavy};
}

struct DifferentialRow {
  int well = 0;
  double value_hz = 0.0; // DE_n
  double light_shift_hz = 0.0;
  double heavy_shift_hz = 0.0;
};

/// DE_n = (E85 - E87) - (E85_Y - E87_Y) = shift87 - shift85, wells 1..wells.
inline std::vector<DifferentialRow>
isotope_differential(const YukawaParams &p, const SurfaceModel &surface,
                     const LatticeConfig &base, const IsotopePair &pair, int wells,
                     YukawaMode mode = YukawaMode::Exact, const PhysicalConstants &k = {},
                     const SolveOptions &opt = {}) {
  const auto [light, heavy] = isotope_lattices(base, pair, k);
  const auto a =
      spectrum_with_yukawa(light.config, p, surface, light.units, wells, mode, k, opt);
  const auto b =
      spectrum_with_yukawa(heavy.config, p, surface, heavy.units, wells, mode, k, opt);
  std::vector<DifferentialRow> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].well != b[i].well)
      throw ValidationError("isotope runs disagree on well labels");
    out[i].well = a[i].well;
    out[i].light_shift_hz = a[i].shift_hz;
    out[i].heavy_shift_hz = b[i].shift_hz;
    out[i].value_hz = b[i].shift_hz - a[i].shift_hz;
  }
  return out;
}

/// Last well n with DE_n >= threshold, 0 if none.
inline int detectability_horizon(const std::vector<DifferentialRow> &rows, double threshold) {
  int last = 0;
  for (const auto &r : rows)
    if (r.value_hz >= threshold)
      last = std::max(last, r.well);
  return last;
}

// ---------------------------------------------------------------------------
// Exclusion curves

enum class ExclusionScenario { Near, Far40, Far70 };

inline std::string to_string(ExclusionScenario s) {
  switch (s) {
  case ExclusionScenario::Near:
    return "near";
  case ExclusionScenario::Far40:
    return "far40";
  default:
    return "far70";
  }
}

inline ExclusionScenario parse_scenario(const std::string &s) {
  if (s == "near")
    return ExclusionScenario::Near;
  if (s == "far40")
    return ExclusionScenario::Far40;
  if (s == "far70")
    return ExclusionScenario::Far70;
  throw ValidationError("unknown exclusion scenario '" + s + "' (near, far40, far70)");
}

struct ExclusionPoint {
  double lambda = 0.0;      // m
  double alpha_limit = 0.0;
  bool verified = false;    // exact re-diagonalization done at this point
  double exact_ratio = 1.0; // exact / perturbative signal at alpha_limit
  double signal = 0.0;      // Hz per unit alpha, signed
};

struct ExclusionCurve {
  ExclusionScenario scenario = ExclusionScenario::Near;
  double sensitivity = 1e-4; // Hz
  std::vector<ExclusionPoint> points;
  std::vector<std::string> warnings;
};

struct ExclusionSettings {
  double sensitivity = 1e-4; // Hz
  double exponent_factor = 1.0;
  /// Extra periods kept above a far well so the box wall does not matter.
  double far_margin = 20.0;
  bool verify = true;
};

namespace detail {

/// Box for a far well: same spacing, top wall far_margin periods above it.
inline LatticeConfig far_config(const LatticeConfig &base, int well, double margin) {
  LatticeConfig c = base;
  const double h = base.spacing();
  c.z_max = std::max(base.z_max, static_cast<double>(well) + margin);
  c.mesh_points = static_cast<std::size_t>(std::llround(c.z_max / h)) - 1;
  c.z_max = h * static_cast<double>(c.mesh_points + 1);
  return c;
}

struct ScenarioStates {
  // Near: (light well 4, light well 6, heavy well 4, heavy well 6).
  // Far: a single heavy-isotope state.
  std::vector<EigenState> states;
  std::vector<LatticeUnits> units;
  std::vector<double> weights; // signal = sum w_i <psi_i|H_Y|psi_i> in Hz
  std::vector<LatticeConfig> configs;
  std::vector<int> wells;
};

inline ScenarioStates scenario_states(ExclusionScenario s, const LatticeConfig &base,
                                      const IsotopePair &pair, double margin,
                                      const PhysicalConstants &k, const SolveOptions &opt) {
  ScenarioStates out;
  const auto [light, heavy] = isotope_lattices(base, pair, k);
  if (s == ExclusionScenario::Near) {
    // DE_4 - DE_6 = (s87_4 - s85_4) - (s87_6 - s85_6)
    const auto a = first_band_states(light.config, 6, opt);
    const auto b = first_band_states(heavy.config, 6, opt);
    out.states = {a[3], a[5], b[3], b[5]};
    out.units = {light.units, light.units, heavy.units, heavy.units};
    out.weights = {-1.0, 1.0, 1.0, -1.0};
    out.configs = {light.config, light.config, heavy.config, heavy.config};
    out.wells = {4, 6, 4, 6};
  } else {
    const int n = s == ExclusionScenario::Far40 ? 40 : 70;
    LatticeConfig c = far_config(heavy.config, n, margin);
    out.states = {well_state(c, n, opt)};
    out.units = {heavy.units};
    out.weights = {1.0};
    out.configs = {c};
    out.wells = {n};
  }
  return out;
}

} // namespace detail

/// alpha_Y at which the scenario signal equals the sensitivity, for each
/// lambda. The signal is linear in alpha at first order, so the limit is
/// sensitivity / (signal per unit alpha); one exact re-diagonalization per
/// decade of lambda checks that.
inline ExclusionCurve exclusion_curve(ExclusionScenario scenario,
                                      const std::vector<double> &lambdas,
                                      const SurfaceModel &surface, const LatticeConfig &base,
                                      const IsotopePair &pair, const ExclusionSettings &s,
                                      const PhysicalConstants &k = {},
                                      const SolveOptions &opt = {}) {
  if (!(s.sensitivity > 0.0))
    throw ValidationError("exclusion sensitivity must be > 0");
  for (double l : lambdas)
    if (!(l > 0.0))
      throw ValidationError("exclusion lambda grid must be > 0");
  const auto st = detail::scenario_states(scenario, base, pair, s.far_margin, k, opt);

  // Signal per unit alpha. The part collected where |psi|^2 sits below the
  // eigenvector's rounding floor is tracked separately: when it dominates, a
  // short-range Yukawa term is sampling numerical noise, not the state.
  struct Signal {
    double value = 0.0;
    double noise = 0.0;
  };
  // Inverse iteration leaves components of relative size ~ eps ||H|| / gap,
  // with the ladder step as the gap.
  std::vector<double> floors(st.states.size());
  for (std::size_t i = 0; i < st.states.size(); ++i) {
    double peak = 0.0;
    for (double v : st.states[i].wavefunction)
      peak = std::max(peak, v * v);
    const auto &c = st.configs[i];
    const double rel = 64.0 * std::numeric_limits<double>::epsilon() *
                       (4.0 * kinetic_coefficient(c.spacing()) + c.depth) /
                       std::abs(c.gravity_step);
    floors[i] = rel * rel * peak;
  }
  auto signal_per_alpha = [&](double lambda) {
    const YukawaParams unit{1.0, lambda, s.exponent_factor};
    Signal sig;
    for (std::size_t i = 0; i < st.states.size(); ++i) {
      const auto &u = st.units[i];
      const auto &w = st.states[i];
      long double all = 0.0L, low = 0.0L;
      for (std::size_t j = 0; j < w.wavefunction.size(); ++j) {
        const double p2 = w.wavefunction[j] * w.wavefunction[j];
        const long double t = static_cast<long double>(p2) *
                              yukawa_potential(w.z(j), unit, surface, u, k);
        all += t;
        if (p2 < floors[i])
          low += t;
      }
      sig.value += st.weights[i] * u.to_hz(static_cast<double>(all) * w.spacing);
      sig.noise += std::abs(u.to_hz(static_cast<double>(low) * w.spacing));
    }
    return sig;
  };

  ExclusionCurve curve;
  curve.scenario = scenario;
  curve.sensitivity = s.sensitivity;
  std::vector<Signal> per_alpha(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) { per_alpha[i] = signal_per_alpha(lambdas[i]); });
  int last_decade = std::numeric_limits<int>::min();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double sig = std::abs(per_alpha[i].value);
    // Below ~1e-300 Hz per unit alpha the limit overflows; nothing to plot.
    if (!(sig > 1e-300) || !std::isfinite(s.sensitivity / sig) ||
        per_alpha[i].noise > 0.01 * sig) {
      std::ostringstream w;
      w << to_string(scenario) << ": signal vanishes at lambda = " << lambdas[i]
        << " m (below numerical resolution); point omitted";
      curve.warnings.push_back(w.str());
      continue;
    }
    ExclusionPoint pt;
    pt.lambda = lambdas[i];
    pt.alpha_limit = s.sensitivity / sig;
    pt.signal = per_alpha[i].value;
    const int decade = static_cast<int>(std::floor(std::log10(lambdas[i])));
    if (s.verify && decade != last_decade) {
      last_decade = decade;
      const YukawaParams at_limit{pt.alpha_limit, lambdas[i], s.exponent_factor};
      double exact = 0.0;
      // Exact shifts via the overlap identity on the scenario states.
      for (std::size_t j = 0; j < st.states.size(); ++j) {
        LatticeConfig c = st.configs[j];
        c.extra_potential = yukawa_extra_potential(at_limit, surface, st.units[j], k);
        const EigenState y = st.wells[j] <= 12
                                 ? first_band_states(c, static_cast<std::size_t>(st.wells[j]),
                                                     opt)
                                       .back()
                                 : well_state(c, st.wells[j], opt);
        const auto &u = st.units[j];
        const double shift =
            mesh_matrix_element(y, st.states[j],
                                [&](double z) {
                                  return yukawa_potential(z, at_limit, surface, u, k);
                                }) /
            inner_product(y, st.states[j]);
        exact += st.weights[j] * u.to_hz(shift);
      }
      pt.verified = true;
      pt.exact_ratio = std::abs(exact) / s.sensitivity;
      if (std::abs(pt.exact_ratio - 1.0) > 0.01) {
        std::ostringstream w;
        w << to_string(scenario) << ": at lambda = " << lambdas[i]
          << " m the exact signal is " << pt.exact_ratio
          << " x the first-order one; limit is not linear there";
        curve.warnings.push_back(w.str());
      }
    }
    curve.points.push_back(pt);
  }
  // A zero of the signal between two points is a blind spot: the limit
  // diverges there.
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto &a = curve.points[i - 1], &b = curve.points[i];
    if ((a.signal > 0.0) != (b.signal > 0.0)) {
      std::ostringstream w;
      w << to_string(scenario) << ": signal changes sign between lambda = " << a.lambda
        << " and " << b.lambda << " m; the limit diverges in between";
      curve.warnings.push_back(w.str());
    }
  }
  return curve;
}

/// Log-uniform lambda grid.
inline std::vector<double> lambda_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    throw ValidationError("lambda grid needs 0 < lo < hi and >= 2 points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1));
  return g;
}

// ---------------------------------------------------------------------------
// Newtonian atom-mirror term

struct MirrorGeometry {
  double radius = 0.01;    // m, cylinder radius
  double thickness = 0.01; // m
};

/// On-axis Newtonian acceleration towards a cylinder at its face.
inline double cylinder_gravity(const MirrorGeometry &g, double density,
                               const PhysicalConstants &k = {}) {
  const double a = g.radius, d = g.thickness;
  return 2.0 * std::numbers::pi * k.G * density * (d + a - std::hypot(a, d));
}

/// Change in the Wannier-Stark step (Hz) if the mirror's Newtonian pull were
/// added to Earth's: m g_mirror (lambda_l / 2) / h. Bounds the neglected term.
inline double newtonian_step_bound(const MirrorGeometry &g, const SurfaceModel &surface,
                                   const LatticeUnits &units, const PhysicalConstants &k = {}) {
  return units.mass * cylinder_gravity(g, surface.mass_density, k) * units.length_unit /
         units.planck;
}

} // namespace wsm
