#pragma once

//! Ground-state dynamic polarizability on the imaginary frequency axis,
//! alpha(i xi) = (2/3) sum_n E_n mu_n^2 / (E_n^2 + hbar^2 xi^2), from a table of
//! dipole transitions.
//!
//! Transition files are whitespace-separated text:
//!
//!   # units: energy=<cm^-1|eV|Ha|J> dipole=<e*a0|C*m> polarizability=<a.u.|m^3|SI>
//!   # ground_j: <J of the ground state>
//!   <label> <energy> <value> <kind>
//!
//! kind is one of
//!   reduced  value is the reduced matrix element, mu^2 = value^2 / (2J + 1)
//!   mu2      value is mu^2 in dipole units squared
//!   static   value is a static polarizability; stored as one oscillator at
//!            the given energy with mu^2 = 3 alpha E / 2
//! Other '#' lines are free-form provenance.

#include "wsm/errors.hpp"
#include "wsm/units.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace wsm {

namespace atomic_units {
inline constexpr double hartree = 4.3597447222071e-18;     // J
inline constexpr double bohr = 5.29177210903e-11;          // m
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double inverse_cm = 1.98644585714e-23;    // J per cm^-1 (h c * 100)
} // namespace atomic_units

struct Transition {
  std::string label;
  double energy = 0.0; // J
  double mu2 = 0.0;    // C^2 m^2
};

class PolarizabilityModel {
public:
  PolarizabilityModel() = default;
  PolarizabilityModel(std::vector<Transition> transitions, const PhysicalConstants &k = {})
      : transitions_(std::move(transitions)), hbar_(k.hbar), eps0_(k.epsilon0) {
    if (transitions_.empty())
      throw ValidationError("polarizability model has no transitions");
    for (const auto &t : transitions_) {
      if (!(t.energy > 0.0))
        throw ValidationError("transition '" + t.label + "': energy must be > 0");
      if (!(t.mu2 >= 0.0))
        throw ValidationError("transition '" + t.label + "': mu^2 must be >= 0");
    }
  }

  [[nodiscard]] const std::vector<Transition> &transitions() const { return transitions_; }
  [[nodiscard]] bool empty() const { return transitions_.empty(); }

  /// alpha(i xi) in SI (C^2 m^2 / J).
  [[nodiscard]] double alpha(double xi) const {
    if (transitions_.empty())
      throw ValidationError("polarizability model has no transitions");
    if (!(xi >= 0.0))
      throw DomainError("alpha(i xi) needs xi >= 0");
    const double hx = hbar_ * xi;
    double s = 0.0;
    for (const auto &t : transitions_)
      s += t.energy * t.mu2 / (t.energy * t.energy + hx * hx);
    return 2.0 / 3.0 * s;
  }

  /// alpha(i xi) / (4 pi eps0), m^3.
  [[nodiscard]] double alpha_volume(double xi) const {
    return alpha(xi) / (4.0 * std::numbers::pi * eps0_);
  }

  [[nodiscard]] double static_alpha_over_4pieps0() const { return alpha_volume(0.0); }

  /// Angular frequencies E_n / hbar, sorted; quadrature breakpoints.
  [[nodiscard]] std::vector<double> frequencies() const {
    std::vector<double> w;
    for (const auto &t : transitions_)
      w.push_back(t.energy / hbar_);
    std::sort(w.begin(), w.end());
    return w;
  }

  /// Every mu^2 multiplied by s.
  [[nodiscard]] PolarizabilityModel scaled(double s) const {
    auto out = *this;
    for (auto &t : out.transitions_)
      t.mu2 *= s;
    return out;
  }

private:
  std::vector<Transition> transitions_;
  double hbar_ = PhysicalConstants{}.hbar;
  double eps0_ = PhysicalConstants{}.epsilon0;
};

inline PolarizabilityModel parse_polarizability(std::string_view text,
                                                const PhysicalConstants &k = {},
                                                const std::string &source = "<text>") {
  namespace au = atomic_units;
  double energy_unit = 0.0, dipole_unit = 0.0, pol_unit = 0.0, ground_j = -1.0;
  std::vector<Transition> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string &msg) {
    throw ValidationError(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    if (line[0] == '#') {
      std::istringstream h(line.substr(1));
      std::string key;
      h >> key;
      if (key == "units:") {
        std::string item;
        while (h >> item) {
          const auto eq = item.find('=');
          if (eq == std::string::npos)
            fail("malformed units entry '" + item + "'");
          const std::string name = item.substr(0, eq), unit = item.substr(eq + 1);
          if (name == "energy") {
            static const std::map<std::string, double> u{{"cm^-1", au::inverse_cm},
                                                         {"eV", au::elementary_charge},
                                                         {"Ha", au::hartree},
                                                         {"J", 1.0}};
            if (!u.count(unit))
              fail("unknown energy unit '" + unit + "'");
            energy_unit = u.at(unit);
          } else if (name == "dipole") {
            if (unit == "e*a0")
              dipole_unit = au::elementary_charge * au::bohr;
            else if (unit == "C*m")
              dipole_unit = 1.0;
            else
              fail("unknown dipole unit '" + unit + "'");
          } else if (name == "polarizability") {
            const double four_pi_eps0 = 4.0 * std::numbers::pi * k.epsilon0;
            if (unit == "a.u.")
              pol_unit = four_pi_eps0 * std::pow(au::bohr, 3);
            else if (unit == "m^3")
              pol_unit = four_pi_eps0;
            else if (unit == "SI")
              pol_unit = 1.0;
            else
              fail("unknown polarizability unit '" + unit + "'");
          } else {
            fail("unknown units key '" + name + "'");
          }
        }
      } else if (key == "ground_j:") {
        if (!(h >> ground_j) || ground_j < 0.0)
          fail("ground_j must be a non-negative number");
      }
      continue;
    }
    if (energy_unit == 0.0)
      fail("data before a '# units:' header");
    std::istringstream row(line);
    Transition t;
    double e = 0.0, v = 0.0;
    std::string kind;
    if (!(row >> t.label >> e >> v >> kind))
      fail("expected '<label> <energy> <value> <kind>'");
    t.energy = e * energy_unit;
    if (kind == "reduced") {
      if (dipole_unit == 0.0 || ground_j < 0.0)
        fail("reduced matrix elements need dipole units and ground_j");
      const double d = v * dipole_unit;
      t.mu2 = d * d / (2.0 * ground_j + 1.0);
    } else if (kind == "mu2") {
      if (dipole_unit == 0.0)
        fail("mu2 rows need a dipole unit");
      t.mu2 = v * dipole_unit * dipole_unit;
    } else if (kind == "static") {
      if (pol_unit == 0.0)
        fail("static rows need a polarizability unit");
      t.mu2 = 1.5 * v * pol_unit * t.energy;
    } else {
      fail("unknown row kind '" + kind + "'");
    }
    if (!(t.energy > 0.0))
      fail("transition energy must be > 0");
    if (!(t.mu2 >= 0.0))
      fail("mu^2 must be >= 0");
    out.push_back(std::move(t));
  }
  if (out.empty())
    throw ValidationError(source + ": no transitions");
  return {std::move(out), k};
}

/// Text of the bundled Rb table (kept identical to data/rb_transitions.dat).
inline std::string_view bundled_rb_transitions() {
  static constexpr std::string_view text = R"DAT(# Rb ground state 5s1/2: electric-dipole transitions used for alpha(i xi)
# energies: NIST Atomic Spectra Database level energies
# reduced matrix elements: Safronova, Williams & Clark, Phys. Rev. A 69, 022509 (2004)
# core: Rb+ core polarizability 9.08 a.u. lumped into one oscillator at 1 Ha
# units: energy=cm^-1 dipole=e*a0 polarizability=a.u.
# ground_j: 0.5
# columns: label energy value kind
5p1/2  12578.950     4.231  reduced
5p3/2  12816.550     5.977  reduced
6p1/2  23715.080     0.333  reduced
6p3/2  23792.590     0.541  reduced
7p1/2  27835.020     0.115  reduced
7p3/2  27870.110     0.202  reduced
core   219474.6313632 9.08  static
)DAT";
  return text;
}

inline PolarizabilityModel load_polarizability_file(const std::string &path,
                                                    const PhysicalConstants &k = {}) {
  std::ifstream f(path);
  if (!f)
    throw ValidationError("cannot open polarizability file '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return parse_polarizability(s.str(), k, path);
}

/// "rb-bundled" or a file path.
inline PolarizabilityModel load_polarizability(const std::string &ref,
                                               const PhysicalConstants &k = {}) {
  if (ref == "rb-bundled")
    return parse_polarizability(bundled_rb_transitions(), k, "rb-bundled");
  return load_polarizability_file(ref, k);
}

} // namespace wsm
