#ifndef EVCS_SCALAR_MIN_HPP_
#define EVCS_SCALAR_MIN_HPP_

#include <functional>
#include <span>

namespace evcs {

struct ScalarMinResult {
  double x = 0.0;
  double fx = 0.0;
  int evals = 0;
};

/// Golden-section minimization of f over [lo, hi] to an argument tolerance
/// tol. Known breakpoints of a piecewise objective split the interval; each
/// sub-interval is searched separately and every breakpoint and endpoint is
/// evaluated explicitly, so the result is never worse than f at any of them.
/// Throws std::domain_error when f returns a non-finite value, naming the
/// offending argument.
ScalarMinResult minimize_scalar(const std::function<double(double)>& f,
                                double lo, double hi, double tol,
                                std::span<const double> breakpoints = {});

}  // namespace evcs

#endif  // EVCS_SCALAR_MIN_HPP_
