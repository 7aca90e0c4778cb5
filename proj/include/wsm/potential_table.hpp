#pragma once

//! Tabulated z -> V(z) on a log-uniform grid.
//!
//! Single-signed, non-zero tables interpolate log|V| against log z with a
//! cubic B-spline, so pure power laws are reproduced to rounding. Tables that
//! touch zero or change sign fall back to interpolating V itself against log z.
//! Outside the grid the end segments are extended linearly in the same
//! coordinates (power-law extrapolation for log-log tables).

#include "wsm/errors.hpp"
#include "wsm/numerics/parallel.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

namespace wsm {

class PotentialTable {
public:
  enum class Mode { LogLog, LogLinear };

  PotentialTable() = default;

  /// Values sampled at z_i = z_min * (z_max / z_min)^(i / (n - 1)).
  PotentialTable(double z_min, double z_max, std::vector<double> values)
      : z_min_(z_min), z_max_(z_max), values_(std::move(values)) {
    if (!(z_min > 0.0) || !(z_max > z_min))
      throw ValidationError("potential table needs 0 < z_min < z_max");
    if (values_.size() < 4)
      throw ValidationError("potential table needs at least 4 nodes");
    for (double v : values_)
      if (!std::isfinite(v))
        throw ValidationError("potential table values must be finite");
    const bool all_neg =
        std::all_of(values_.begin(), values_.end(), [](double v) { return v < 0; });
    const bool all_pos =
        std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0; });
    sign_ = all_neg ? -1.0 : 1.0;
    mode_ = (all_neg || all_pos) ? Mode::LogLog : Mode::LogLinear;
    log_lo_ = std::log(z_min_);
    step_ = (std::log(z_max_) - log_lo_) / static_cast<double>(values_.size() - 1);
    std::vector<double> y(values_.size());
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] = mode_ == Mode::LogLog ? std::log(sign_ * values_[i]) : values_[i];
    // Endpoint slopes from 4th-order one-sided differences; the spline's own
    // estimate is poor near the upper end.
    const std::size_t n = y.size();
    auto one_sided = [&](double a0, double a1, double a2, double a3, double a4) {
      return (-25.0 * a0 + 48.0 * a1 - 36.0 * a2 + 16.0 * a3 - 3.0 * a4) / (12.0 * step_);
    };
    double left = std::numeric_limits<double>::quiet_NaN(), right = left;
    if (n >= 5) {
      left = one_sided(y[0], y[1], y[2], y[3], y[4]);
      right = -one_sided(y[n - 1], y[n - 2], y[n - 3], y[n - 4], y[n - 5]);
    }
    spline_ = std::make_shared<Spline>(y.data(), n, log_lo_, step_, left, right);
    y_lo_ = y.front();
    y_hi_ = y.back();
    d_lo_ = spline_->prime(log_lo_);
    d_hi_ = spline_->prime(log_lo_ + step_ * static_cast<double>(y.size() - 1));
  }

  [[nodiscard]] double z_min() const { return z_min_; }
  [[nodiscard]] double z_max() const { return z_max_; }
  [[nodiscard]] Mode mode() const { return mode_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const std::vector<double> &values() const { return values_; }
  [[nodiscard]] bool contains(double z) const { return z >= z_min_ && z <= z_max_; }

  [[nodiscard]] double node(std::size_t i) const {
    if (i + 1 == values_.size())
      return z_max_;
    return std::exp(log_lo_ + step_ * static_cast<double>(i));
  }

  [[nodiscard]] std::vector<double> grid() const {
    std::vector<double> g(values_.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = node(i);
    return g;
  }

  [[nodiscard]] double operator()(double z) const {
    if (!(z > 0.0))
      throw DomainError("potential table evaluated at z <= 0");
    const double x = std::log(z);
    const double x_hi = log_lo_ + step_ * static_cast<double>(values_.size() - 1);
    double y;
    if (x < log_lo_)
      y = y_lo_ + d_lo_ * (x - log_lo_);
    else if (x > x_hi)
      y = y_hi_ + d_hi_ * (x - x_hi);
    else
      y = (*spline_)(x);
    return mode_ == Mode::LogLog ? sign_ * std::exp(y) : y;
  }

private:
  using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

  double z_min_ = 1.0, z_max_ = 2.0;
  std::vector<double> values_;
  Mode mode_ = Mode::LogLinear;
  double sign_ = 1.0;
  double log_lo_ = 0.0, step_ = 1.0;
  double y_lo_ = 0.0, y_hi_ = 0.0, d_lo_ = 0.0, d_hi_ = 0.0;
  std::shared_ptr<const Spline> spline_;
};

struct GridSpec {
  double z_min = 0.005;
  double z_max = 100.0;
  std::size_t nodes = 200;
  std::size_t probes = 16;          // off-grid midpoints checked after build
  double probe_tolerance = 1e-4;    // relative
};

/// Samples fn on the log grid (nodes evaluated in parallel) and checks the
/// interpolant against direct evaluation at midpoints between nodes.
template <class Fn>
PotentialTable build_potential_table(Fn &&fn, const GridSpec &spec) {
  if (!(spec.z_min > 0.0) || !(spec.z_max > spec.z_min))
    throw ValidationError("grid spec needs 0 < z_min < z_max");
  if (spec.nodes < 4)
    throw ValidationError("grid spec needs at least 4 nodes");
  const double lo = std::log(spec.z_min);
  const double step = (std::log(spec.z_max) - lo) / static_cast<double>(spec.nodes - 1);
  std::vector<double> values(spec.nodes);
  parallel_for(spec.nodes, [&](std::size_t i) {
    const double z = i + 1 == spec.nodes ? spec.z_max
                                          : std::exp(lo + step * static_cast<double>(i));
    values[i] = fn(z);
  });
  PotentialTable table(spec.z_min, spec.z_max, std::move(values));
  if (spec.probes == 0)
    return table;
  const std::size_t stride = std::max<std::size_t>(1, (spec.nodes - 1) / spec.probes);
  std::vector<std::size_t> cells;
  for (std::size_t i = stride / 2; i + 1 < spec.nodes; i += stride)
    cells.push_back(i);
  std::vector<double> err(cells.size());
  double scale = 0.0;
  for (double v : table.values())
    scale = std::max(scale, std::abs(v));
  parallel_for(cells.size(), [&](std::size_t k) {
    const double z = std::exp(lo + step * (static_cast<double>(cells[k]) + 0.5));
    const double direct = fn(z);
    // Tables that cross zero are judged against their largest magnitude.
    const double denom =
        table.mode() == PotentialTable::Mode::LogLog ? std::abs(direct) : scale;
    err[k] = denom > 0.0 ? std::abs(table(z) - direct) / denom
                         : std::abs(table(z) - direct);
  });
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (err[k] > spec.probe_tolerance) {
      std::ostringstream msg;
      msg << "potential table interpolation error " << err[k]
          << " exceeds " << spec.probe_tolerance << " near z = "
          << std::exp(lo + step * (static_cast<double>(cells[k]) + 0.5))
          << "; use a denser grid (nodes = " << spec.nodes << ")";
      throw ValidationError(msg.str());
    }
  }
  return table;
}

} // namespace wsm
