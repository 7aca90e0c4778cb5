#pragma once

//! The five driver commands. Each computes its results from a RunConfig and
//! writes CSV (and JSON where useful) into the output directory, headed by
//! the config hash and the polarizability data checksum.

#include "wsm/casimir_polder.hpp"
#include "wsm/corrections.hpp"
#include "wsm/io/cache.hpp"
#include "wsm/io/config.hpp"
#include "wsm/io/csv.hpp"
#include "wsm/io/hash.hpp"
#include "wsm/lattice.hpp"
#include "wsm/numerics/parallel.hpp"
#include "wsm/regularization.hpp"
#include "wsm/yukawa.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace wsm::app {

struct Context {
  io::RunConfig config;
  PhysicalConstants constants;
  LatticeUnits units;
  PolarizabilityModel atom;
  std::string data_checksum;
  std::unique_ptr<io::FileStateStore> store;
  SolveOptions solve;
  std::filesystem::path out;
  std::vector<std::string> written;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;

  explicit Context(io::RunConfig c) : config(std::move(c)) {
    units = config.units(constants);
    const auto &ref = config.species.polarizability_ref;
    atom = load_polarizability(ref, constants);
    data_checksum = ref == "rb-bundled" ? io::sha256_hex(bundled_rb_transitions())
                                        : io::file_sha256_hex(ref);
    if (config.cache_enabled) {
      store = std::make_unique<io::FileStateStore>(config.cache_directory);
      solve.store = store.get();
    }
    out = config.output_directory;
    set_thread_count(config.threads);
  }

  [[nodiscard]] double point_cp(double z) const {
    return vcp(z, atom, config.surface, units, constants);
  }

  void header(io::CsvTable &t, const std::string &command) const {
    t.meta("wsm", command);
    t.meta("config_sha256", config.hash());
    t.meta("data", config.species.polarizability_ref + " sha256=" + data_checksum);
    t.meta("species", config.species.name);
    t.meta("surface", permittivity_label(config.surface.permittivity) +
                          " T=" + io::format_double(config.surface.temperature) + " K");
    t.meta("mesh", "U=" + io::format_double(config.lattice.depth) +
                       " z_max=" + io::format_double(config.lattice.z_max) +
                       " N=" + std::to_string(config.lattice.mesh_points));
    t.meta("recoil_energy_hz", io::format_double(units.to_hz(1.0)));
    t.meta("gravity_step", io::format_double(units.gravity_step));
  }

  [[nodiscard]] nlohmann::ordered_json json_header(const std::string &command) const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_sha256"] = config.hash();
    j["data"] = {{"polarizability", config.species.polarizability_ref},
                 {"sha256", data_checksum}};
    j["species"] = config.species.name;
    j["surface"] = {{"model", permittivity_label(config.surface.permittivity)},
                    {"temperature", config.surface.temperature},
                    {"density", config.surface.mass_density}};
    j["mesh"] = {{"depth", config.lattice.depth},
                 {"z_max", config.lattice.z_max},
                 {"mesh_points", config.lattice.mesh_points},
                 {"gravity_step", units.gravity_step}};
    j["recoil_energy_hz"] = units.to_hz(1.0);
    return j;
  }

  void write(const std::string &name, const std::string &content) {
    io::write_file_atomic(out / name, content);
    written.push_back((out / name).string());
  }
  void write_config() { write("config.resolved.ini", config.raw.resolved()); }
};

// ---------------------------------------------------------------------------
// spectrum

inline SpectrumTable compute_spectrum(Context &ctx) {
  // one extra level so that every listed well has its spacing
  const auto states = first_band_states(ctx.config.lattice, ctx.config.wells + 1, ctx.solve);
  return energy_differences(states, ctx.units);
}

inline void cmd_spectrum(Context &ctx) {
  const SpectrumTable t = compute_spectrum(ctx);
  ctx.write_config();
  if (ctx.config.write_csv) {
    io::CsvTable csv({"n", "E_n[E_r]", "dE_n[E_r]", "dE_n[Hz]"});
    ctx.header(csv, "spectrum");
    for (const auto &r : t.rows)
      csv.row({static_cast<long long>(r.n), r.energy, r.delta, r.delta_hz});
    ctx.write("spectrum.csv", csv.str());
  }
  if (ctx.config.write_json) {
    auto j = ctx.json_header("spectrum");
    for (const auto &r : t.rows)
      j["rows"].push_back({{"n", r.n}, {"E_n", r.energy}, {"dE_n", r.delta},
                           {"dE_n_hz", r.delta_hz}});
    ctx.write("spectrum.json", j.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------
// potential

struct PotentialRow {
  double z = 0.0;
  double cp = 0.0;
  double reg = 0.0;
  double total = 0.0; // trap + gravity + V_CP
  double yukawa = 0.0;
  double exponent_point = 0.0;
  double exponent_reg = 0.0;
};

/// Local minima of V_trap + V_CP on a uniform grid over [a, b].
template <class F>
std::vector<double> local_minima(const F &total, double a, double b, int points = 2001) {
  std::vector<double> z(points), v(points);
  for (int i = 0; i < points; ++i) {
    z[i] = a + (b - a) * i / (points - 1);
    v[i] = total(z[i]);
  }
  std::vector<double> out;
  for (int i = 1; i + 1 < points; ++i)
    if (v[i] < v[i - 1] && v[i] <= v[i + 1])
      out.push_back(z[i]);
  return out;
}

inline std::vector<PotentialRow> compute_potential(Context &ctx) {
  const auto &c = ctx.config;
  const double radius = ctx.units.to_periods(c.radii.front());
  const DensityProfile profile{c.profiles.front(), c.radii.front()};
  auto point = [&](double z) { return ctx.point_cp(z); };
  const auto table = build_potential_table(
      point, log_grid(c.potential_grid.z_min, c.potential_grid.z_max * 1.01 + 2.0 * radius,
                      c.nodes_per_decade));
  const AxialWeight w = axial_weight(profile, ctx.units.length_unit);
  const TrapPotential trap(c.lattice);
  std::vector<PotentialRow> rows(c.potential_grid.nodes);
  const double lo = std::log(c.potential_grid.z_min), hi = std::log(c.potential_grid.z_max);
  parallel_for(rows.size(), [&](std::size_t i) {
    PotentialRow &r = rows[i];
    r.z = i + 1 == rows.size() ? c.potential_grid.z_max
                               : std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                                   static_cast<double>(rows.size() - 1));
    r.cp = point(r.z);
    r.reg = regularize(table, w, r.z);
    r.total = trap(r.z) + r.cp;
    r.yukawa = yukawa_potential(r.z, c.yukawa, c.surface, ctx.units, ctx.constants);
    r.exponent_point = power_law_exponent(point, r.z);
    r.exponent_reg = power_law_exponent([&](double z) { return regularize(table, w, z); }, r.z);
  });
  return rows;
}

inline void cmd_potential(Context &ctx) {
  const auto rows = compute_potential(ctx);
  const TrapPotential trap(ctx.config.lattice);
  const auto minima =
      local_minima([&](double z) { return trap(z) + ctx.point_cp(z); }, 0.5, 1.5);
  std::string first_well = "absent (no local minimum of V_trap+V_CP in 0.5 < z < 1.5)";
  if (!minima.empty())
    first_well = "present (local minimum at z=" + io::format_double(minima.front()) + ")";
  ctx.notes.push_back("first well " + first_well);
  ctx.write_config();
  io::CsvTable v({"z[periods]", "z[m]", "V_CP[E_r]", "V_reg[E_r]", "V_trap+V_CP[E_r]",
                  "V_Y[E_r]"});
  io::CsvTable e({"z[periods]", "z[m]", "exponent_point", "exponent_reg"});
  ctx.header(v, "potential");
  ctx.header(e, "potential");
  const std::string reg = to_string(ctx.config.profiles.front()) + " R=" +
                          io::format_double(ctx.config.radii.front()) + " m";
  v.meta("regularization", reg);
  v.meta("first_well", first_well);
  e.meta("regularization", reg);
  e.meta("exponent", "-z V'(z) / V(z), centred difference with step 1e-3 z");
  for (const auto &r : rows) {
    const double zm = ctx.units.to_meters(r.z);
    v.row({r.z, zm, r.cp, r.reg, r.total, r.yukawa});
    e.row({r.z, zm, r.exponent_point, r.exponent_reg});
  }
  ctx.write("potential.csv", v.str());
  ctx.write("exponent.csv", e.str());
}

// ---------------------------------------------------------------------------
// corrections

struct CorrectionResult {
  std::vector<CorrectionRow> rows;
  std::vector<WellCenterRow> comparison;
};

inline CorrectionResult compute_corrections(Context &ctx) {
  const auto &c = ctx.config;
  CorrectionSettings s;
  s.radii = c.radii;
  s.profiles = c.profiles;
  s.wells = c.correction_wells;
  s.regularize_trap = c.regularize_trap;
  s.nodes_per_decade = c.nodes_per_decade;
  const auto tables = build_correction_tables([&](double z) { return ctx.point_cp(z); },
                                              c.lattice, ctx.units, s);
  CorrectionResult r;
  r.rows = correction_table(c.lattice, ctx.units, tables,
                            permittivity_label(c.surface.permittivity), s, ctx.solve);
  r.comparison = well_center_comparison(r.rows, tables.point, ctx.units, c.radii.front(),
                                        c.profiles.front());
  return r;
}

inline void cmd_corrections(Context &ctx) {
  const auto r = compute_corrections(ctx);
  ctx.write_config();
  if (ctx.config.write_csv) {
    io::CsvTable t({"n", "radius[m]", "profile", "dE[E_r]", "dE[Hz]", "surface"});
    ctx.header(t, "corrections");
    t.meta("sign", "corrections are negative (attractive)");
    t.meta("regularize_trap", ctx.config.regularize_trap ? "true" : "false");
    for (const auto &x : r.rows)
      t.row({static_cast<long long>(x.well), x.radius, to_string(x.profile), x.energy, x.hz,
             x.surface});
    ctx.write("corrections.csv", t.str());
    io::CsvTable w({"n", "dE[E_r]", "V_center[E_r]", "ratio", "dE[Hz]", "V_center[Hz]"});
    ctx.header(w, "corrections");
    w.meta("comparison", to_string(ctx.config.profiles.front()) + " R=" +
                             io::format_double(ctx.config.radii.front()) +
                             " m; ratio = |dE_n| / |V_CP(z = n)|");
    for (const auto &x : r.comparison)
      w.row({static_cast<long long>(x.well), x.correction, x.center, x.ratio,
             ctx.units.to_hz(x.correction), ctx.units.to_hz(x.center)});
    ctx.write("well_center.csv", w.str());
  }
  if (ctx.config.write_json) {
    auto j = ctx.json_header("corrections");
    j["regularize_trap"] = ctx.config.regularize_trap;
    for (const auto &x : r.rows)
      j["rows"].push_back({{"n", x.well},
                           {"radius", x.radius},
                           {"profile", to_string(x.profile)},
                           {"dE", x.energy},
                           {"dE_hz", x.hz},
                           {"surface", x.surface}});
    for (const auto &x : r.comparison)
      j["well_center"].push_back(
          {{"n", x.well}, {"dE", x.correction}, {"V_center", x.center}, {"ratio", x.ratio}});
    ctx.write("corrections.json", j.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------
// yukawa

inline IsotopePair isotope_pair(const Context &ctx) {
  IsotopePair p;
  p.lambda_l = ctx.config.lambda_l;
  p.depth = ctx.config.pair_depth;
  return p;
}

inline std::vector<DifferentialRow> compute_yukawa(Context &ctx) {
  const auto &c = ctx.config;
  return isotope_differential(c.yukawa, c.surface, c.lattice, isotope_pair(ctx),
                              c.yukawa_wells, c.yukawa_mode, ctx.constants, ctx.solve);
}

inline void cmd_yukawa(Context &ctx) {
  const auto rows = compute_yukawa(ctx);
  ctx.write_config();
  const auto &c = ctx.config;
  io::CsvTable t({"n", "DE_n[Hz]", "shift_Rb85[Hz]", "shift_Rb87[Hz]"});
  ctx.header(t, "yukawa");
  t.meta("yukawa", "alpha=" + io::format_double(c.yukawa.alpha) +
                       " lambda=" + io::format_double(c.yukawa.lambda) +
                       " m exponent_factor=" + io::format_double(c.yukawa.exponent_factor));
  t.meta("mode", c.yukawa_mode == YukawaMode::Exact ? "exact" : "perturbative");
  t.meta("pair_depth", c.pair_depth == IsotopeDepth::OwnRecoil ? "own" : "shared");
  t.meta("horizon", std::to_string(detectability_horizon(rows, c.yukawa_threshold)) +
                        " (last well with DE_n >= " + io::format_double(c.yukawa_threshold) +
                        " Hz)");
  for (const auto &r : rows)
    t.row({static_cast<long long>(r.well), r.value_hz, r.light_shift_hz, r.heavy_shift_hz});
  ctx.write("yukawa.csv", t.str());
}

// ---------------------------------------------------------------------------
// exclusion

inline std::vector<ExclusionCurve> compute_exclusion(Context &ctx) {
  const auto &c = ctx.config;
  const auto grid = lambda_grid(c.lambda_min, c.lambda_max, c.lambda_points);
  std::vector<ExclusionCurve> out;
  for (auto s : c.scenarios) {
    out.push_back(exclusion_curve(s, grid, c.surface, c.lattice, isotope_pair(ctx),
                                  c.exclusion, ctx.constants, ctx.solve));
    for (const auto &w : out.back().warnings)
      ctx.warnings.push_back(w);
  }
  return out;
}

inline void cmd_exclusion(Context &ctx) {
  const auto curves = compute_exclusion(ctx);
  ctx.write_config();
  for (const auto &cv : curves) {
    io::CsvTable t({"lambda_Y[m]", "alpha_Y_limit", "verified", "exact_over_first_order",
                    "signal_per_alpha[Hz]"});
    ctx.header(t, "exclusion");
    t.meta("scenario", to_string(cv.scenario));
    t.meta("sensitivity_hz", io::format_double(cv.sensitivity));
    t.meta("exponent_factor", io::format_double(ctx.config.exclusion.exponent_factor));
    for (const auto &w : cv.warnings)
      t.meta("warning", w);
    for (const auto &p : cv.points)
      t.row({p.lambda, p.alpha_limit, static_cast<long long>(p.verified), p.exact_ratio,
             p.signal});
    ctx.write("exclusion_" + to_string(cv.scenario) + ".csv", t.str());
  }
}

} // namespace wsm::app
