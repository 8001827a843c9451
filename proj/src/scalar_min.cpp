#include "evcs/scalar_min.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace evcs {

namespace {

double checked_eval(const std::function<double(double)>& f, double x, int& evals) {
  const double v = f(x);
  ++evals;
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "minimize_scalar: non-finite objective value at x = " << x;
    throw std::domain_error(os.str());
  }
  return v;
}

// Golden section on one interval assumed unimodal. Keeps the best of the
// two interior probes; endpoints are handled by the caller.
ScalarMinResult golden_section(const std::function<double(double)>& f,
                               double lo, double hi, double tol, int& evals) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = checked_eval(f, x1, evals);
  double f2 = checked_eval(f, x2, evals);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = checked_eval(f, x1, evals);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = checked_eval(f, x2, evals);
    }
  }
  return f1 <= f2 ? ScalarMinResult{x1, f1, 0} : ScalarMinResult{x2, f2, 0};
}

}  // namespace

ScalarMinResult minimize_scalar(const std::function<double(double)>& f,
                                double lo, double hi, double tol,
                                std::span<const double> breakpoints) {
  if (!(lo < hi)) {
    if (lo == hi) {
      int evals = 0;
      const double v = checked_eval(f, lo, evals);
      return {lo, v, evals};
    }
    throw std::invalid_argument("minimize_scalar requires lo <= hi");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("minimize_scalar requires tol > 0");

  std::vector<double> knots{lo, hi};
  for (double b : breakpoints) {
    if (b > lo && b < hi) knots.push_back(b);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  int evals = 0;
  ScalarMinResult best{knots.front(), checked_eval(f, knots.front(), evals), 0};
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double fv = checked_eval(f, knots[i], evals);
    if (fv < best.fx) best = {knots[i], fv, 0};
  }
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i + 1] - knots[i] <= tol) continue;
    const ScalarMinResult r = golden_section(f, knots[i], knots[i + 1], tol, evals);
    if (r.fx < best.fx) best = r;
  }
  best.evals = evals;
  return best;
}

}  // namespace evcs
