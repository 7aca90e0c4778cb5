#pragma once

// Thin error-checked wrappers over Boost.Math adaptive Gauss-Kronrod.

#include "wsm/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace wsm {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

/// Adaptive 31-point Gauss-Kronrod on [a, b]; b may be +infinity.
/// Throws ConvergenceError when the error estimate misses
/// max(rel_tol * L1, abs_tol).
template <class F>
QuadratureResult integrate(F &&f, double a, double b, double rel_tol,
                           const std::string &what, double abs_tol = 0.0,
                           unsigned max_depth = 18) {
  QuadratureResult r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, rel_tol, &r.error, &r.l1);
  const double bound =
      std::max({rel_tol * r.l1, abs_tol, 1e3 * std::numeric_limits<double>::min()});
  if (!std::isfinite(r.value) || r.error > 10.0 * bound) {
    std::ostringstream msg;
    msg.precision(6);
    msg << what << ": quadrature did not converge on [" << a << ", " << b
        << "], estimate " << r.value << " with error " << r.error
        << " (bound " << bound << ")";
    throw ConvergenceError(msg.str());
  }
  return r;
}

/// int_a^inf f by exp-sinh, for integrands decaying at least exponentially on
/// an O(1) scale (rescale before calling).
template <class F>
QuadratureResult integrate_to_infinity(F &&f, double a, double rel_tol,
                                       const std::string &what, double abs_tol = 0.0) {
  thread_local boost::math::quadrature::exp_sinh<double> rule(12);
  QuadratureResult r;
  std::size_t levels = 0;
  try {
    r.value = rule.integrate(f, a, std::numeric_limits<double>::infinity(), rel_tol,
                             &r.error, &r.l1, &levels);
  } catch (const std::exception &e) {
    throw ConvergenceError(what + ": " + e.what());
  }
  const double bound =
      std::max({rel_tol * r.l1, abs_tol, 1e3 * std::numeric_limits<double>::min()});
  if (!std::isfinite(r.value) || r.error > 10.0 * bound) {
    std::ostringstream msg;
    msg.precision(6);
    msg << what << ": quadrature did not converge on [" << a << ", inf), estimate "
        << r.value << " with error " << r.error << " (bound " << bound << ")";
    throw ConvergenceError(msg.str());
  }
  return r;
}

/// Fixed 30-point Gauss-Legendre for smooth integrands on [a, b].
template <class F> double integrate_fixed(F &&f, double a, double b) {
  return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

/// Neumaier compensated sum, used where summation order must not matter
/// beyond one rounding.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

} // namespace wsm
