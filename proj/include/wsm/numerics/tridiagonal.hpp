#pragma once

//! Selected eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues by Sturm-sequence bisection, eigenvectors by inverse iteration
//! with a partially pivoted LU of (T - lambda I). Memory and work are O(N) per
//! eigenpair, which keeps N ~ 1e6 meshes tractable where a full QL sweep is not.

#include "wsm/errors.hpp"
#include "wsm/numerics/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

namespace wsm {

class SymTridiagonal {
public:
  SymTridiagonal() = default;

  /// diag has N entries, off has N-1 (off[i] couples rows i and i+1).
  SymTridiagonal(std::vector<double> diag, std::vector<double> off)
      : d_(std::move(diag)), e_(std::move(off)) {
    if (d_.empty())
      throw ValidationError("tridiagonal matrix must be non-empty");
    if (e_.size() + 1 != d_.size())
      throw ValidationError("off-diagonal must have N-1 entries");
    e2_.resize(e_.size());
    double max_e2 = 1.0;
    for (std::size_t i = 0; i < e_.size(); ++i) {
      e2_[i] = e_[i] * e_[i];
      max_e2 = std::max(max_e2, e2_[i]);
    }
    pivmin_ = std::numeric_limits<double>::min() * max_e2;
    auto [lo, hi] = gershgorin();
    norm_ = std::max(std::abs(lo), std::abs(hi));
  }

  [[nodiscard]] std::size_t size() const { return d_.size(); }
  [[nodiscard]] std::span<const double> diag() const { return d_; }
  [[nodiscard]] std::span<const double> off() const { return e_; }
  [[nodiscard]] double norm_bound() const { return norm_; }

  [[nodiscard]] std::pair<double, double> gershgorin() const {
    const std::size_t n = d_.size();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0;
      if (i > 0)
        r += std::abs(e_[i - 1]);
      if (i + 1 < n)
        r += std::abs(e_[i]);
      lo = std::min(lo, d_[i] - r);
      hi = std::max(hi, d_[i] + r);
    }
    return {lo, hi};
  }

  /// Number of eigenvalues strictly below x (Sturm count of the LDL^T pivots).
  [[nodiscard]] std::size_t count_below(double x) const {
    double xs[1] = {x};
    std::size_t c[1];
    count_below(xs, c);
    return c[0];
  }

  /// Sturm counts for several shifts at once. Four independent recurrences
  /// are interleaved so the division latency of one hides behind the others.
  void count_below(std::span<const double> xs, std::span<std::size_t> out) const {
    std::size_t j = 0;
    for (; j + 4 <= xs.size(); j += 4)
      count4(&xs[j], &out[j]);
    for (; j < xs.size(); ++j)
      out[j] = count1(xs[j]);
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = d_.size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = d_[i] * x[i];
      if (i > 0)
        s += e_[i - 1] * x[i - 1];
      if (i + 1 < n)
        s += e_[i] * x[i + 1];
      y[i] = s;
    }
  }

private:
  [[nodiscard]] double pivot(double q) const {
    return std::abs(q) < pivmin_ ? -pivmin_ : q;
  }

  [[nodiscard]] std::size_t count1(double x) const {
    double q = pivot(d_[0] - x);
    std::size_t c = q < 0.0;
    for (std::size_t i = 1; i < d_.size(); ++i) {
      q = pivot(d_[i] - x - e2_[i - 1] / q);
      c += q < 0.0;
    }
    return c;
  }

  void count4(const double *x, std::size_t *out) const {
    double q0 = pivot(d_[0] - x[0]), q1 = pivot(d_[0] - x[1]);
    double q2 = pivot(d_[0] - x[2]), q3 = pivot(d_[0] - x[3]);
    std::size_t c0 = q0 < 0.0, c1 = q1 < 0.0, c2 = q2 < 0.0, c3 = q3 < 0.0;
    for (std::size_t i = 1; i < d_.size(); ++i) {
      const double di = d_[i], ei = e2_[i - 1];
      q0 = pivot(di - x[0] - ei / q0);
      q1 = pivot(di - x[1] - ei / q1);
      q2 = pivot(di - x[2] - ei / q2);
      q3 = pivot(di - x[3] - ei / q3);
      c0 += q0 < 0.0;
      c1 += q1 < 0.0;
      c2 += q2 < 0.0;
      c3 += q3 < 0.0;
    }
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
  }

  std::vector<double> d_, e_, e2_;
  double pivmin_ = 0.0;
  double norm_ = 0.0;
};

namespace detail {

/// Bisects every requested index in lockstep; each sweep issues one batched
/// Sturm count per active eigenvalue.
inline std::vector<double> bisect_indices(const SymTridiagonal &t,
                                          std::span<const std::size_t> idx,
                                          double lo0, double hi0) {
  const std::size_t m = idx.size();
  std::vector<double> lo(m, lo0), hi(m, hi0);
  std::vector<double> mids;
  std::vector<std::size_t> active, counts;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 256; ++sweep) {
    active.clear();
    mids.clear();
    for (std::size_t j = 0; j < m; ++j) {
      const double width = hi[j] - lo[j];
      const double tol =
          2.0 * eps * std::max(std::abs(lo[j]), std::abs(hi[j])) +
          std::numeric_limits<double>::min();
      const double mid = 0.5 * (lo[j] + hi[j]);
      if (width > tol && mid > lo[j] && mid < hi[j]) {
        active.push_back(j);
        mids.push_back(mid);
      }
    }
    if (active.empty())
      break;
    counts.assign(mids.size(), 0);
    const std::size_t chunk = 4;
    const std::size_t chunks = (mids.size() + chunk - 1) / chunk;
    parallel_for(chunks, [&](std::size_t c) {
      const std::size_t b = c * chunk, e = std::min(mids.size(), b + chunk);
      t.count_below(std::span<const double>(mids).subspan(b, e - b),
                    std::span<std::size_t>(counts).subspan(b, e - b));
    });
    for (std::size_t a = 0; a < active.size(); ++a) {
      const std::size_t j = active[a];
      if (counts[a] > idx[j])
        hi[j] = mids[a];
      else
        lo[j] = mids[a];
    }
  }
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j)
    out[j] = 0.5 * (lo[j] + hi[j]);
  return out;
}

/// Smallest x in [lo, hi] (up to bisection resolution) with count_below(x) >= k.
inline double bracket_count(const SymTridiagonal &t, std::size_t k, double lo,
                            double hi, int steps = 64) {
  for (int s = 0; s < steps; ++s) {
    const double mid = 0.5 * (lo + hi);
    if (t.count_below(mid) >= k)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Partially pivoted LU of a shifted tridiagonal matrix, LAPACK dgttrf layout.
class ShiftedLU {
public:
  ShiftedLU(const SymTridiagonal &t, double shift) {
    const std::size_t n = t.size();
    auto d = t.diag();
    auto e = t.off();
    dl_.assign(e.begin(), e.end());
    du_.assign(e.begin(), e.end());
    d_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      d_[i] = d[i] - shift;
    du2_.assign(n > 2 ? n - 2 : 0, 0.0);
    swap_.assign(n > 0 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i])) {
        if (d_[i] != 0.0) {
          const double fact = dl_[i] / d_[i];
          dl_[i] = fact;
          d_[i + 1] -= fact * du_[i];
        }
      } else {
        const double fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const double temp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = temp - fact * d_[i + 1];
        if (i + 2 < n) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        swap_[i] = 1;
      }
    }
    // Singular pivots are expected when the shift is an eigenvalue to
    // working precision; perturb them so the solve yields a large vector.
    const double tiny = std::numeric_limits<double>::epsilon() *
                        std::max(t.norm_bound(), 1.0);
    for (double &p : d_)
      if (std::abs(p) < tiny)
        p = std::copysign(tiny, p == 0.0 ? 1.0 : p);
  }

  void solve(std::span<double> b) const {
    const std::size_t n = d_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!swap_[i]) {
        b[i + 1] -= dl_[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl_[i] * b[i];
      }
    }
    b[n - 1] /= d_[n - 1];
    if (n > 1)
      b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
    if (n > 2)
      for (std::size_t i = n - 2; i-- > 0;)
        b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
  }

private:
  std::vector<double> d_, dl_, du_, du2_;
  std::vector<unsigned char> swap_;
};

inline double norm2(std::span<const double> v) {
  long double s = 0.0L;
  for (double x : v)
    s += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(s));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

/// Flips the sign so the largest-magnitude component is positive.
inline void canonical_sign(std::span<double> v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[arg]))
      arg = i;
  if (v[arg] < 0.0)
    for (double &x : v)
      x = -x;
}

} // namespace detail

/// Eigenvalues with 0-based ascending indices [first, first + count).
inline std::vector<double> eigenvalues_by_index(const SymTridiagonal &t,
                                                std::size_t first,
                                                std::size_t count) {
  if (count == 0)
    throw ValidationError("eigenvalue count must be >= 1");
  if (first + count > t.size())
    throw ValidationError("eigenvalue index range exceeds matrix size");
  auto [glo, ghi] = t.gershgorin();
  const double pad = 4.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(glo), std::abs(ghi)) +
                     std::numeric_limits<double>::min();
  glo -= pad;
  ghi += pad;
  // Shrink the shared bracket before the per-index bisection.
  const double hi = detail::bracket_count(t, first + count, glo, ghi, 48);
  double lo = glo;
  if (first > 0) {
    double a = glo, b = hi;
    for (int s = 0; s < 48; ++s) {
      const double mid = 0.5 * (a + b);
      if (t.count_below(mid) <= first)
        a = mid;
      else
        b = mid;
    }
    lo = a;
  }
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), first);
  return detail::bisect_indices(t, idx, lo, hi);
}

/// All eigenvalues in the half-open window [lo, hi).
inline std::vector<double> eigenvalues_in_window(const SymTridiagonal &t,
                                                 double lo, double hi) {
  if (!(hi > lo))
    throw ValidationError("energy window must be non-empty (hi > lo)");
  const std::size_t c_lo = t.count_below(lo);
  const std::size_t c_hi = t.count_below(hi);
  if (c_hi == c_lo)
    return {};
  std::vector<std::size_t> idx(c_hi - c_lo);
  std::iota(idx.begin(), idx.end(), c_lo);
  return detail::bisect_indices(t, idx, lo, hi);
}

struct InverseIterationOptions {
  int max_iterations = 12;
  int max_restarts = 3;
  double tolerance = 1e-12;
  std::uint64_t seed = 0x5eed;
};

/// Unit-norm eigenvector for an eigenvalue known to working precision.
inline std::vector<double>
inverse_iteration(const SymTridiagonal &t, double lambda,
                  const InverseIterationOptions &opt = {}) {
  const std::size_t n = t.size();
  const detail::ShiftedLU lu(t, lambda);
  std::vector<double> x(n), y(n);
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    std::mt19937_64 rng(opt.seed + 0x9e3779b97f4a7c15ULL * (restart + 1));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (double &v : x)
      v = uni(rng);
    double nx = detail::norm2(x);
    for (double &v : x)
      v /= nx;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_iterations; ++it) {
      y = x;
      lu.solve(y);
      const double ny = detail::norm2(y);
      if (!std::isfinite(ny) || ny == 0.0)
        break;
      for (double &v : y)
        v /= ny;
      detail::canonical_sign(y);
      double diff = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        diff = std::max(diff, std::abs(y[i] - x[i]));
      x.swap(y);
      if (it > 0 && diff < opt.tolerance)
        return x;
      // On fine meshes rounding in the solve sets a floor well above the
      // tolerance; stop once the change has stalled at a small level.
      if (it > 1 && diff < 1e-6 && diff > 0.5 * prev)
        return x;
      prev = diff;
    }
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "inverse iteration did not converge for eigenvalue " << lambda
      << " after " << opt.max_restarts << " restarts";
  throw ConvergenceError(msg.str());
}

struct TridiagonalEigenpair {
  double value = 0.0;
  std::vector<double> vector; // unit 2-norm
  bool clustered = false;     // another returned eigenvalue within tolerance
};

/// Eigenvectors for the given ascending eigenvalues. Vectors are computed
/// independently (in parallel) and then re-orthogonalized in ascending order,
/// so the result does not depend on the worker count.
inline std::vector<TridiagonalEigenpair>
eigenpairs_for(const SymTridiagonal &t, std::span<const double> values,
               const InverseIterationOptions &opt = {}) {
  const std::size_t m = values.size();
  std::vector<TridiagonalEigenpair> out(m);
  parallel_for(m, [&](std::size_t j) {
    auto o = opt;
    o.seed = opt.seed + 7919ULL * j;
    out[j].value = values[j];
    out[j].vector = inverse_iteration(t, values[j], o);
  });
  const double cluster_tol = 1e-3 * t.norm_bound();
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double gap = std::abs(values[j] - values[i]);
      if (gap < 1e-10 * std::max(1.0, std::abs(values[j])))
        out[i].clustered = out[j].clustered = true;
      if (gap > cluster_tol)
        continue;
      const double p = detail::dot(out[i].vector, out[j].vector);
      for (std::size_t k = 0; k < t.size(); ++k)
        out[j].vector[k] -= p * out[i].vector[k];
    }
    const double nv = detail::norm2(out[j].vector);
    for (double &v : out[j].vector)
      v /= nv;
  }
  return out;
}

} // namespace wsm
