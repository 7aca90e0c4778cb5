#pragma once

//! Modified Wannier-Stark states: the tilted optical lattice bounded by an
//! impenetrable mirror at z = 0 and a numerical wall at z = z_max.
//!
//! Units: z in lattice periods (lambda_l / 2), energies in recoil energies.
//! In these units p^2 / 2m becomes -(1/pi^2) d^2/dz^2 and the trap reads
//! V(z) = delta_g z + (U/2)(1 - cos 2 pi z). A 3-point stencil on the interior
//! mesh z_i = i dz (i = 1..N, dz = z_max / (N + 1)) with Dirichlet ends gives a
//! symmetric tridiagonal operator.

#include "wsm/errors.hpp"
#include "wsm/numerics/tridiagonal.hpp"
#include "wsm/regularization.hpp"
#include "wsm/units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace wsm {

/// Additional z-dependent term (E_r units, z in periods). The tag identifies
/// the term in cache keys and must change whenever fn does.
struct ExtraPotential {
  std::function<double(double)> fn;
  std::string tag;
};

struct LatticeConfig {
  double depth = 3.0;                // U, E_r
  double gravity_step = 0.0700682;   // delta_g
  double z_max = 30.0;               // periods
  std::size_t mesh_points = 400000;  // N interior points
  std::optional<ExtraPotential> extra_potential;
  /// Finite-size average of the trap and gravity terms (radius in periods).
  std::optional<AxialWeight> trap_smearing;

  [[nodiscard]] double spacing() const {
    return z_max / static_cast<double>(mesh_points + 1);
  }

  void validate() const {
    if (!(depth >= 0.0))
      throw ValidationError("lattice depth U must be >= 0");
    if (!(z_max > 0.0))
      throw ValidationError("box size z_max must be > 0");
    if (mesh_points < 100)
      throw ValidationError("mesh needs at least 100 interior points");
    if (!std::isfinite(gravity_step))
      throw ValidationError("gravity step must be finite");
    if (extra_potential && !extra_potential->fn)
      throw ValidationError("extra potential has no function");
  }

  /// Canonical description of everything that changes the operator.
  [[nodiscard]] std::string cache_tag() const {
    std::ostringstream s;
    s.precision(17);
    s << "U=" << depth << ";dg=" << gravity_step << ";zf=" << z_max
      << ";N=" << mesh_points;
    if (extra_potential)
      s << ";extra=" << extra_potential->tag;
    if (trap_smearing)
      s << ";smear=" << to_string(trap_smearing->kind()) << ":"
        << trap_smearing->radius();
    return s.str();
  }
};

struct Mesh {
  std::size_t size = 0;
  double spacing = 0.0;

  static Mesh of(const LatticeConfig &c) { return {c.mesh_points, c.spacing()}; }
  [[nodiscard]] double z(std::size_t i) const {
    return static_cast<double>(i + 1) * spacing;
  }
  [[nodiscard]] double z_max() const {
    return static_cast<double>(size + 1) * spacing;
  }
  [[nodiscard]] std::vector<double> points() const {
    std::vector<double> p(size);
    for (std::size_t i = 0; i < size; ++i)
      p[i] = z(i);
    return p;
  }
};

/// One bound state on the mesh; psi is normalized with the mesh measure,
/// sum psi_i^2 dz = 1.
struct EigenState {
  double energy = 0.0;
  std::vector<double> wavefunction;
  double spacing = 0.0;
  int well_index = 0;
  int band_index = 1;
  double centroid = 0.0; // <z>
  double spread = 0.0;   // sqrt(<z^2> - <z>^2)
  bool clustered = false;
  bool boundary_warning = false;

  [[nodiscard]] double z(std::size_t i) const {
    return static_cast<double>(i + 1) * spacing;
  }
  [[nodiscard]] double z_max() const {
    return static_cast<double>(wavefunction.size() + 1) * spacing;
  }
  [[nodiscard]] double norm() const {
    long double s = 0.0L;
    for (double v : wavefunction)
      s += static_cast<long double>(v) * v;
    return static_cast<double>(s) * spacing;
  }
  /// Probability of finding the atom in [a, b].
  [[nodiscard]] double probability(double a, double b) const {
    long double s = 0.0L;
    for (std::size_t i = 0; i < wavefunction.size(); ++i) {
      const double zi = z(i);
      if (zi >= a && zi <= b)
        s += static_cast<long double>(wavefunction[i]) * wavefunction[i];
    }
    return static_cast<double>(s) * spacing;
  }
};

inline double inner_product(const EigenState &a, const EigenState &b) {
  if (a.wavefunction.size() != b.wavefunction.size() || a.spacing != b.spacing)
    throw ValidationError("inner product of states on different meshes");
  return detail::dot(a.wavefunction, b.wavefunction) * a.spacing;
}

// ---------------------------------------------------------------------------
// Potential and operator

inline double kinetic_coefficient(double spacing) {
  return 1.0 / (std::numbers::pi * std::numbers::pi * spacing * spacing);
}

/// Trap + gravity (+ extra) at height z, evaluated the way the operator does.
class TrapPotential {
public:
  explicit TrapPotential(const LatticeConfig &c) : c_(c) {
    if (c.trap_smearing) {
      shift_ = c.trap_smearing->radius();
      contrast_ = cosine_moment(*c.trap_smearing, 2.0 * std::numbers::pi);
    }
  }

  [[nodiscard]] double operator()(double z) const {
    const double zc = z + shift_;
    double v = c_.gravity_step * zc +
               0.5 * c_.depth *
                   (1.0 - contrast_ * std::cos(2.0 * std::numbers::pi * zc));
    if (c_.extra_potential)
      v += c_.extra_potential->fn(z);
    return v;
  }

private:
  const LatticeConfig &c_;
  double shift_ = 0.0;
  double contrast_ = 1.0;
};

inline SymTridiagonal assemble_hamiltonian(const LatticeConfig &config,
                                           const Mesh &mesh) {
  config.validate();
  if (mesh.size != config.mesh_points ||
      std::abs(mesh.spacing - config.spacing()) > 1e-14 * config.spacing())
    throw ValidationError("mesh does not match lattice configuration");
  const double a = kinetic_coefficient(mesh.spacing);
  const TrapPotential v(config);
  std::vector<double> d(mesh.size), e(mesh.size - 1, -a);
  for (std::size_t i = 0; i < mesh.size; ++i)
    d[i] = 2.0 * a + v(mesh.z(i));
  return {std::move(d), std::move(e)};
}

// ---------------------------------------------------------------------------
// Bloch bands of the untilted lattice (band classification and E_bar)

struct BlochBands {
  /// Sorted k = 0 and k = pi eigenvalues; band b spans
  /// [edges[2b-2], edges[2b-1]] (1-based b).
  std::vector<double> edges;
  /// Band averages over the Brillouin zone.
  std::vector<double> averages;

  [[nodiscard]] double gap_midpoint(int band) const {
    return 0.5 * (edges[2 * band - 1] + edges[2 * band]);
  }
  [[nodiscard]] int bands() const { return static_cast<int>(averages.size()); }
};

/// One-cell finite-difference Bloch problem, cell_points per period.
inline BlochBands bloch_bands(double depth, int bands = 4, int cell_points = 128,
                              int k_samples = 32) {
  const int m = cell_points;
  const double h = 1.0 / m;
  const double a = kinetic_coefficient(h);
  auto solve = [&](double k) {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      const double z = i * h;
      H(i, i) = 2.0 * a + 0.5 * depth * (1.0 - std::cos(2.0 * std::numbers::pi * z));
      if (i + 1 < m) {
        H(i, i + 1) = -a;
        H(i + 1, i) = -a;
      }
    }
    const std::complex<double> phase = std::polar(1.0, k);
    H(m - 1, 0) += -a * phase;
    H(0, m - 1) += -a * std::conj(phase);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    return Eigen::VectorXd(es.eigenvalues().head(bands + 1));
  };
  BlochBands out;
  const Eigen::VectorXd e0 = solve(0.0), epi = solve(std::numbers::pi);
  for (int b = 0; b <= bands; ++b) {
    out.edges.push_back(e0(b));
    out.edges.push_back(epi(b));
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.edges.resize(2 * bands + 1);
  out.averages.assign(bands, 0.0);
  for (int s = 0; s < k_samples; ++s) {
    const double k = -std::numbers::pi + (s + 0.5) * 2.0 * std::numbers::pi / k_samples;
    const Eigen::VectorXd ek = solve(k);
    for (int b = 0; b < bands; ++b)
      out.averages[b] += ek(b) / k_samples;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labelling

enum class WellNumbering {
  /// Lowest first-band state is well 1 (use when the set starts at the
  /// ground state).
  GroundIsOne,
  /// Offset from the probability centroids (windowed or partial sets).
  Centroid,
};

namespace detail {
inline int round_half_down(double x) { return static_cast<int>(std::ceil(x - 0.5)); }
} // namespace detail

/// Assigns well indices; band indices must already be set. First-band states
/// are numbered consecutively in energy order, other bands by centroid.
inline std::vector<EigenState> label_wells(std::vector<EigenState> states,
                                           WellNumbering numbering = WellNumbering::Centroid) {
  std::vector<std::size_t> first;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto &s = states[i];
    if (std::abs(s.norm() - 1.0) > 1e-8)
      throw ValidationError("label_wells: state is not normalized");
    if (!(s.centroid > 0.0 && s.centroid < s.z_max()))
      throw ValidationError("label_wells: centroid outside (0, z_max)");
    if (s.band_index == 1)
      first.push_back(i);
    else
      states[i].well_index = std::max(1, detail::round_half_down(s.centroid));
  }
  std::sort(first.begin(), first.end(), [&](std::size_t a, std::size_t b) {
    return states[a].energy < states[b].energy;
  });
  int offset = 0;
  if (numbering == WellNumbering::Centroid && !first.empty()) {
    std::vector<int> d;
    for (std::size_t r = 0; r < first.size(); ++r)
      d.push_back(detail::round_half_down(states[first[r]].centroid) -
                  static_cast<int>(r + 1));
    std::sort(d.begin(), d.end());
    offset = d[(d.size() - 1) / 2];
  }
  for (std::size_t r = 0; r < first.size(); ++r)
    states[first[r]].well_index = std::max(1, static_cast<int>(r + 1) + offset);
  return states;
}

// ---------------------------------------------------------------------------
// Solving

struct CountSelection {
  std::size_t count = 1;
  std::size_t first = 0; // 0-based index of the lowest requested eigenvalue
};
struct EnergyWindow {
  double lo = 0.0, hi = 0.0;
};
using Selection = std::variant<CountSelection, EnergyWindow>;

/// Persistent eigenstate storage keyed by a canonical description of the
/// solve. load returns nothing on a miss.
class StateStore {
public:
  virtual ~StateStore() = default;
  [[nodiscard]] virtual std::optional<std::vector<EigenState>>
  load(const std::string &key) const = 0;
  virtual void store(const std::string &key, const std::vector<EigenState> &states) const = 0;
};

struct SolveOptions {
  InverseIterationOptions inverse;
  int bloch_cell_points = 128;
  const StateStore *store = nullptr;

  [[nodiscard]] std::string cache_tag() const {
    std::ostringstream s;
    s.precision(17);
    s << "it=" << inverse.max_iterations << "," << inverse.max_restarts << ","
      << inverse.tolerance << "," << inverse.seed << ";bloch=" << bloch_cell_points;
    return s.str();
  }
};

/// Number of tridiagonal eigensolves run by this process.
inline std::atomic<std::size_t> &eigensolve_counter() {
  static std::atomic<std::size_t> n{0};
  return n;
}

namespace detail {

inline EigenState make_state(const TridiagonalEigenpair &p, double spacing) {
  EigenState s;
  s.energy = p.value;
  s.spacing = spacing;
  s.clustered = p.clustered;
  s.wavefunction = p.vector;
  const double scale = 1.0 / std::sqrt(spacing);
  long double m1 = 0.0L, m2 = 0.0L;
  for (std::size_t i = 0; i < s.wavefunction.size(); ++i) {
    s.wavefunction[i] *= scale;
    const long double prob = static_cast<long double>(p.vector[i]) * p.vector[i];
    const double z = static_cast<double>(i + 1) * spacing;
    m1 += prob * z;
    m2 += prob * z * z;
  }
  s.centroid = static_cast<double>(m1);
  s.spread = std::sqrt(std::max(0.0, static_cast<double>(m2 - m1 * m1)));
  return s;
}

/// Band from the local energy E - delta_g <z> against the Bloch gaps.
inline int classify_band(const EigenState &s, double gravity_step,
                         const BlochBands &bands) {
  const double local = s.energy - gravity_step * s.centroid;
  int b = 1;
  while (b < bands.bands() && local > bands.gap_midpoint(b))
    ++b;
  return b;
}

} // namespace detail

inline std::vector<EigenState> solve_band(const LatticeConfig &config,
                                          const Selection &selection,
                                          const SolveOptions &opt = {}) {
  config.validate();
  ++eigensolve_counter();
  const Mesh mesh = Mesh::of(config);
  const SymTridiagonal h = assemble_hamiltonian(config, mesh);
  std::vector<double> values;
  WellNumbering numbering = WellNumbering::Centroid;
  if (const auto *c = std::get_if<CountSelection>(&selection)) {
    if (c->count == 0)
      throw ValidationError("solve_band: count must be >= 1");
    values = eigenvalues_by_index(h, c->first, c->count);
    if (c->first == 0)
      numbering = WellNumbering::GroundIsOne;
  } else {
    const auto &w = std::get<EnergyWindow>(selection);
    values = eigenvalues_in_window(h, w.lo, w.hi);
  }
  const auto pairs = eigenpairs_for(h, values, opt.inverse);
  const BlochBands bands = bloch_bands(config.depth, 4, opt.bloch_cell_points);
  std::vector<EigenState> states;
  states.reserve(pairs.size());
  for (const auto &p : pairs) {
    states.push_back(detail::make_state(p, mesh.spacing));
    states.back().band_index =
        detail::classify_band(states.back(), config.gravity_step, bands);
  }
  return label_wells(std::move(states), numbering);
}

inline std::vector<EigenState> solve_band(const LatticeConfig &config, std::size_t count,
                                          const SolveOptions &opt = {}) {
  return solve_band(config, CountSelection{count, 0}, opt);
}

/// First-band states of wells 1..n_max, extending the eigenvalue count past
/// any higher-band states that fall inside the ladder.
inline std::vector<EigenState> first_band_states(const LatticeConfig &config,
                                                 std::size_t n_max,
                                                 const SolveOptions &opt = {}) {
  const std::string key =
      config.cache_tag() + ";first_band=" + std::to_string(n_max) + ";" + opt.cache_tag();
  if (opt.store)
    if (auto hit = opt.store->load(key))
      return std::move(*hit);
  std::size_t count = n_max;
  for (int attempt = 0; attempt < 6; ++attempt) {
    auto states = solve_band(config, CountSelection{count, 0}, opt);
    std::vector<EigenState> first;
    for (auto &s : states)
      if (s.band_index == 1)
        first.push_back(std::move(s));
    if (first.size() >= n_max) {
      first.resize(n_max);
      if (opt.store)
        opt.store->store(key, first);
      return first;
    }
    count += (n_max - first.size()) + 4;
  }
  throw ConvergenceError("could not isolate " + std::to_string(n_max) +
                         " first-band states");
}

/// First-band state of one well deep in the ladder, found in an energy window
/// around E_bar_1 + n delta_g.
inline EigenState well_state(const LatticeConfig &config, int n,
                             const SolveOptions &opt = {}) {
  if (n < 1)
    throw ValidationError("well index must be >= 1");
  if (n <= 12)
    return first_band_states(config, static_cast<std::size_t>(n), opt).back();
  const std::string key =
      config.cache_tag() + ";well=" + std::to_string(n) + ";" + opt.cache_tag();
  if (opt.store)
    if (auto hit = opt.store->load(key); hit && hit->size() == 1)
      return std::move(hit->front());
  const BlochBands bands = bloch_bands(config.depth, 2, opt.bloch_cell_points);
  const double guess = bands.averages[0] + n * config.gravity_step;
  const double half = 0.6 * std::abs(config.gravity_step);
  auto states = solve_band(config, EnergyWindow{guess - half, guess + half}, opt);
  for (auto &s : states)
    if (s.band_index == 1 && s.well_index == n) {
      if (opt.store)
        opt.store->store(key, {s});
      return std::move(s);
    }
  throw ConvergenceError("no first-band state found for well " + std::to_string(n));
}

// ---------------------------------------------------------------------------
// Spectrum tables and reference states

struct SpectrumRow {
  int n = 0;
  double energy = 0.0;    // E_r
  double delta = 0.0;     // E_{n+1} - E_n, E_r
  double delta_hz = 0.0;
};

struct SpectrumTable {
  std::vector<SpectrumRow> rows;
};

/// Rows for every state that has a successor; wells must be contiguous.
inline SpectrumTable energy_differences(std::vector<EigenState> states,
                                        const LatticeUnits &units) {
  if (states.size() < 2)
    throw ValidationError("energy_differences needs at least 2 states");
  std::sort(states.begin(), states.end(),
            [](const EigenState &a, const EigenState &b) {
              return a.well_index < b.well_index;
            });
  std::vector<int> missing;
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (states[i].well_index == states[i - 1].well_index)
      throw ValidationError("energy_differences: duplicate well " +
                            std::to_string(states[i].well_index));
    for (int w = states[i - 1].well_index + 1; w < states[i].well_index; ++w)
      missing.push_back(w);
  }
  if (!missing.empty()) {
    std::string list;
    for (int w : missing)
      list += (list.empty() ? "" : ", ") + std::to_string(w);
    throw ValidationError("energy_differences: missing wells " + list);
  }
  SpectrumTable t;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    SpectrumRow r;
    r.n = states[i].well_index;
    r.energy = states[i].energy;
    r.delta = states[i + 1].energy - states[i].energy;
    r.delta_hz = units.to_hz(r.delta);
    t.rows.push_back(r);
  }
  return t;
}

/// Translates a deep-interior state by (target_well - well_index) periods
/// (the ordinary Wannier-Stark ladder relation). Linear interpolation on the
/// mesh, zero outside the box; the norm pushed out of the box is reported
/// through boundary_warning.
inline EigenState reference_ws_state(const EigenState &interior, int target_well,
                                     double gravity_step) {
  if (interior.well_index < 10)
    throw ValidationError("reference_ws_state needs an interior state (well >= 10)");
  const int shift = target_well - interior.well_index;
  EigenState out = interior;
  out.well_index = target_well;
  out.energy = interior.energy + shift * gravity_step;
  out.centroid = interior.centroid + shift;
  if (shift == 0)
    return out;
  const std::size_t n = interior.wavefunction.size();
  const double dz = interior.spacing;
  for (std::size_t i = 0; i < n; ++i) {
    const double src = (static_cast<double>(i + 1) * dz - shift) / dz - 1.0;
    double v = 0.0;
    if (src > -1.0 && src < static_cast<double>(n)) {
      const double fl = std::floor(src);
      const auto j = static_cast<long long>(fl);
      const double t = src - fl;
      const double a = j >= 0 ? interior.wavefunction[static_cast<std::size_t>(j)] : 0.0;
      const double b = j + 1 < static_cast<long long>(n)
                           ? interior.wavefunction[static_cast<std::size_t>(j + 1)]
                           : 0.0;
      v = (1.0 - t) * a + t * b;
    }
    out.wavefunction[i] = v;
  }
  out.boundary_warning = std::abs(1.0 - out.norm()) > 1e-6;
  return out;
}

} // namespace wsm
