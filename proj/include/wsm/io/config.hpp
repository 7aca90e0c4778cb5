#pragma once

//! Run configuration: one INI file with fixed sections, overridable by
//! section.key=value strings. Unknown sections or keys are rejected. The
//! resolved config (every key, defaults filled in, fixed order) is written
//! next to results and its physics sections are hashed.

#include "wsm/casimir_polder.hpp"
#include "wsm/errors.hpp"
#include "wsm/io/hash.hpp"
#include "wsm/lattice.hpp"
#include "wsm/regularization.hpp"
#include "wsm/units.hpp"
#include "wsm/yukawa.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace wsm::io {

struct SchemaEntry {
  const char *section;
  const char *key;
  const char *fallback;
};

// Order here is the order of the resolved config.
inline const std::vector<SchemaEntry> &schema() {
  static const std::vector<SchemaEntry> s = {
      {"trap", "depth", "3"},
      {"trap", "z_max", "30"},
      {"trap", "mesh_points", "400000"},
      {"trap", "lambda_l", "532e-9"},
      {"trap", "wells", "13"},
      {"species", "isotope", "Rb87"},
      {"species", "mass", ""},
      {"species", "polarizability", "rb-bundled"},
      {"species", "pair_depth", "own"},
      {"surface", "model", "perfect-conductor"},
      {"surface", "plasma_frequency", "1.37e16"},
      {"surface", "relaxation_rate", "5.32e13"},
      {"surface", "temperature", "0"},
      {"surface", "density", "2330"},
      {"atom", "radii", "200e-12,300e-12"},
      {"atom", "profiles", "uniform,parabolic"},
      {"atom", "regularize_trap", "false"},
      {"potential", "z_min", "0.005"},
      {"potential", "z_max", "100"},
      {"potential", "points", "200"},
      {"potential", "nodes_per_decade", "60"},
      {"corrections", "wells", "12"},
      {"yukawa", "alpha", "3e10"},
      {"yukawa", "lambda", "1e-6"},
      {"yukawa", "exponent_factor", "1"},
      {"yukawa", "wells", "24"},
      {"yukawa", "mode", "exact"},
      {"yukawa", "threshold", "1e-4"},
      {"exclusion", "scenarios", "near,far40,far70"},
      {"exclusion", "lambda_min", "1e-8"},
      {"exclusion", "lambda_max", "1e-4"},
      {"exclusion", "points", "41"},
      {"exclusion", "sensitivity", "1e-4"},
      {"exclusion", "verify", "true"},
      {"output", "directory", "out"},
      {"output", "formats", "csv,json"},
      {"cache", "directory", ".wsm-cache"},
      {"cache", "enabled", "true"},
      {"run", "threads", "1"},
  };
  return s;
}

/// Raw key/value view, validated against the schema.
class ConfigValues {
public:
  ConfigValues() {
    for (const auto &e : schema())
      values_[name(e.section, e.key)] = e.fallback;
  }

  void set(const std::string &section, const std::string &key, const std::string &value) {
    const std::string n = name(section, key);
    if (!values_.count(n)) {
      bool known_section = false;
      for (const auto &e : schema())
        known_section = known_section || section == e.section;
      throw ValidationError(known_section ? "unknown config key '" + n + "'"
                                          : "unknown config section '" + section + "'");
    }
    values_[n] = trim(value);
  }

  /// "section.key=value"
  void set_override(const std::string &assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ValidationError("override '" + assignment + "' is not section.key=value");
    set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
        assignment.substr(eq + 1));
  }

  void merge_ini(std::istream &in, const std::string &source) {
    boost::property_tree::ptree pt;
    try {
      boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error &e) {
      throw ValidationError(source + ": " + e.message() + " (line " +
                            std::to_string(e.line()) + ")");
    }
    for (const auto &[section, tree] : pt) {
      if (tree.empty() && !tree.data().empty())
        throw ValidationError(source + ": key '" + section + "' outside any section");
      for (const auto &[key, value] : tree) {
        // trailing "; comment"
        const std::string &raw = value.data();
        set(section, key, raw.substr(0, raw.find(';')));
      }
    }
  }

  void merge_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
      throw ValidationError("cannot open config file '" + path + "'");
    merge_ini(in, path);
  }

  [[nodiscard]] const std::string &get(const std::string &section,
                                       const std::string &key) const {
    return values_.at(name(section, key));
  }

  /// Every key in schema order.
  [[nodiscard]] std::string resolved() const {
    std::ostringstream s;
    std::string section;
    for (const auto &e : schema()) {
      if (section != e.section) {
        s << (section.empty() ? "" : "\n") << "[" << e.section << "]\n";
        section = e.section;
      }
      s << e.key << " = " << get(e.section, e.key) << "\n";
    }
    return s.str();
  }

  /// Resolved text of the listed sections only; the cache and output
  /// sections never change results.
  [[nodiscard]] std::string resolved(const std::vector<std::string> &sections) const {
    std::ostringstream s;
    for (const auto &e : schema())
      for (const auto &want : sections)
        if (want == e.section)
          s << e.section << "." << e.key << "=" << get(e.section, e.key) << "\n";
    return s.str();
  }

private:
  static std::string name(const std::string &s, const std::string &k) { return s + "." + k; }
  static std::string trim(const std::string &v) {
    const auto a = v.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
      return "";
    const auto b = v.find_last_not_of(" \t\r\n");
    return v.substr(a, b - a + 1);
  }
  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Typed view

namespace detail {

inline double to_double(const std::string &v, const std::string &what) {
  double out = 0.0;
  const auto *b = v.data(), *e = v.data() + v.size();
  const auto r = std::from_chars(b, e, out);
  if (v.empty() || r.ec != std::errc() || r.ptr != e || !std::isfinite(out))
    throw ValidationError("config " + what + ": '" + v + "' is not a number");
  return out;
}

inline long long to_int(const std::string &v, const std::string &what) {
  long long out = 0;
  const auto *b = v.data(), *e = v.data() + v.size();
  const auto r = std::from_chars(b, e, out);
  if (v.empty() || r.ec != std::errc() || r.ptr != e)
    throw ValidationError("config " + what + ": '" + v + "' is not an integer");
  return out;
}

inline bool to_bool(const std::string &v, const std::string &what) {
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw ValidationError("config " + what + ": '" + v + "' is not a boolean");
}

inline std::vector<std::string> to_list(const std::string &v) {
  std::vector<std::string> out;
  std::stringstream s(v);
  std::string item;
  while (std::getline(s, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos)
      out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

} // namespace detail

struct RunConfig {
  ConfigValues raw;

  LatticeConfig lattice;
  std::size_t wells = 13;
  double lambda_l = 532e-9;
  SpeciesData species;
  IsotopeDepth pair_depth = IsotopeDepth::OwnRecoil;
  SurfaceModel surface;
  std::vector<double> radii;
  std::vector<DensityKind> profiles;
  bool regularize_trap = false;
  GridSpec potential_grid;
  std::size_t nodes_per_decade = 60;
  int correction_wells = 12;
  YukawaParams yukawa;
  int yukawa_wells = 24;
  YukawaMode yukawa_mode = YukawaMode::Exact;
  double yukawa_threshold = 1e-4;
  std::vector<ExclusionScenario> scenarios;
  double lambda_min = 1e-8, lambda_max = 1e-4;
  std::size_t lambda_points = 41;
  ExclusionSettings exclusion;
  std::string output_directory = "out";
  bool write_csv = true, write_json = true;
  std::string cache_directory = ".wsm-cache";
  bool cache_enabled = true;
  unsigned threads = 1;

  [[nodiscard]] LatticeUnits units(const PhysicalConstants &k = {}) const {
    return make_units(species, lambda_l, k);
  }
  /// Hash of the physics sections only; output, cache and thread settings do
  /// not change results.
  [[nodiscard]] std::string hash() const {
    return sha256_hex(raw.resolved({"trap", "species", "surface", "atom", "potential",
                                    "corrections", "yukawa", "exclusion"}));
  }
};

inline RunConfig interpret(const ConfigValues &v) {
  using namespace detail;
  RunConfig c;
  c.raw = v;
  auto num = [&](const char *s, const char *k) { return to_double(v.get(s, k), std::string(s) + "." + k); };
  auto integer = [&](const char *s, const char *k) {
    return to_int(v.get(s, k), std::string(s) + "." + k);
  };
  auto positive_count = [&](const char *s, const char *k, long long min) {
    const long long n = integer(s, k);
    if (n < min)
      throw ValidationError("config " + std::string(s) + "." + k + " must be >= " +
                            std::to_string(min));
    return n;
  };

  c.lattice.depth = num("trap", "depth");
  c.lattice.z_max = num("trap", "z_max");
  c.lattice.mesh_points = static_cast<std::size_t>(positive_count("trap", "mesh_points", 100));
  c.lambda_l = num("trap", "lambda_l");
  c.wells = static_cast<std::size_t>(positive_count("trap", "wells", 2));

  const std::string iso = v.get("species", "isotope");
  if (iso == "Rb87" || iso == "rb87" || iso == "87")
    c.species = rubidium87();
  else if (iso == "Rb85" || iso == "rb85" || iso == "85")
    c.species = rubidium85();
  else
    throw ValidationError("config species.isotope: unknown isotope '" + iso + "' (Rb85, Rb87)");
  if (!v.get("species", "mass").empty())
    c.species.mass = num("species", "mass");
  c.species.polarizability_ref = v.get("species", "polarizability");
  const std::string pd = v.get("species", "pair_depth");
  if (pd == "own")
    c.pair_depth = IsotopeDepth::OwnRecoil;
  else if (pd == "shared")
    c.pair_depth = IsotopeDepth::SharedTrap;
  else
    throw ValidationError("config species.pair_depth must be 'own' or 'shared'");

  const std::string model = v.get("surface", "model");
  if (model == "perfect-conductor" || model == "perfect")
    c.surface.permittivity = PerfectConductor{};
  else if (model == "drude")
    c.surface.permittivity =
        DrudeModel{num("surface", "plasma_frequency"), num("surface", "relaxation_rate")};
  else if (model == "plasma")
    c.surface.permittivity = DrudeModel{num("surface", "plasma_frequency"), 0.0};
  else
    throw ValidationError("config surface.model: unknown model '" + model +
                          "' (perfect-conductor, drude, plasma)");
  c.surface.temperature = num("surface", "temperature");
  c.surface.mass_density = num("surface", "density");

  for (const auto &r : to_list(v.get("atom", "radii")))
    c.radii.push_back(to_double(r, "atom.radii"));
  for (const auto &p : to_list(v.get("atom", "profiles")))
    c.profiles.push_back(parse_density_kind(p));
  if (c.radii.empty() || c.profiles.empty())
    throw ValidationError("config atom.radii and atom.profiles must not be empty");
  c.regularize_trap = to_bool(v.get("atom", "regularize_trap"), "atom.regularize_trap");

  c.potential_grid.z_min = num("potential", "z_min");
  c.potential_grid.z_max = num("potential", "z_max");
  c.potential_grid.nodes = static_cast<std::size_t>(positive_count("potential", "points", 4));
  c.nodes_per_decade =
      static_cast<std::size_t>(positive_count("potential", "nodes_per_decade", 8));
  c.correction_wells = static_cast<int>(positive_count("corrections", "wells", 1));

  c.yukawa.alpha = num("yukawa", "alpha");
  c.yukawa.lambda = num("yukawa", "lambda");
  c.yukawa.exponent_factor = num("yukawa", "exponent_factor");
  c.yukawa_wells = static_cast<int>(positive_count("yukawa", "wells", 1));
  const std::string mode = v.get("yukawa", "mode");
  if (mode == "exact")
    c.yukawa_mode = YukawaMode::Exact;
  else if (mode == "perturbative")
    c.yukawa_mode = YukawaMode::Perturbative;
  else
    throw ValidationError("config yukawa.mode must be 'exact' or 'perturbative'");
  c.yukawa_threshold = num("yukawa", "threshold");

  for (const auto &s : to_list(v.get("exclusion", "scenarios")))
    c.scenarios.push_back(parse_scenario(s));
  c.lambda_min = num("exclusion", "lambda_min");
  c.lambda_max = num("exclusion", "lambda_max");
  c.lambda_points = static_cast<std::size_t>(positive_count("exclusion", "points", 2));
  c.exclusion.sensitivity = num("exclusion", "sensitivity");
  c.exclusion.exponent_factor = c.yukawa.exponent_factor;
  c.exclusion.verify = to_bool(v.get("exclusion", "verify"), "exclusion.verify");

  c.output_directory = v.get("output", "directory");
  c.write_csv = c.write_json = false;
  for (const auto &f : to_list(v.get("output", "formats"))) {
    if (f == "csv")
      c.write_csv = true;
    else if (f == "json")
      c.write_json = true;
    else
      throw ValidationError("config output.formats: unknown format '" + f + "'");
  }
  c.cache_directory = v.get("cache", "directory");
  c.cache_enabled = to_bool(v.get("cache", "enabled"), "cache.enabled");
  c.threads = static_cast<unsigned>(positive_count("run", "threads", 0));

  // Cross-field checks.
  c.lattice.gravity_step = c.units().gravity_step;
  c.lattice.validate();
  c.surface.validate();
  c.yukawa.validate();
  for (double r : c.radii)
    DensityProfile{DensityKind::Uniform, r}.validate();
  if (!(c.potential_grid.z_max > c.potential_grid.z_min && c.potential_grid.z_min > 0.0))
    throw ValidationError("config potential: need 0 < z_min < z_max");
  if (!(c.lambda_max > c.lambda_min && c.lambda_min > 0.0))
    throw ValidationError("config exclusion: need 0 < lambda_min < lambda_max");
  if (!(c.exclusion.sensitivity > 0.0))
    throw ValidationError("config exclusion.sensitivity must be > 0");
  if (!(c.yukawa_threshold > 0.0))
    throw ValidationError("config yukawa.threshold must be > 0");
  return c;
}

/// File (optional) then overrides, in order.
inline RunConfig load_run_config(const std::string &path,
                                 const std::vector<std::string> &overrides) {
  ConfigValues v;
  if (!path.empty())
    v.merge_file(path);
  for (const auto &o : overrides)
    v.set_override(o);
  return interpret(v);
}

} // namespace wsm::io
