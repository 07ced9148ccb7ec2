#pragma once

// Central finite-difference gradient oracle over the flat parameter view of
// an Mlp, independent of the analytic backward pass it is checking.

#include <cmath>
#include <functional>
#include <vector>

#include "ebrl/mlp.hpp"

namespace ebrl::test {

inline std::vector<double> finite_difference_gradient(
    Mlp& net, const std::function<double()>& loss, double step = 1e-5) {
  const std::size_t n = net.parameter_count();
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double original = net.parameter(i);
    net.set_parameter(i, original + step);
    const double up = loss();
    net.set_parameter(i, original - step);
    const double down = loss();
    net.set_parameter(i, original);
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

// Relative error with a small absolute dead zone so near-zero gradient pairs
// do not blow up the ratio.
inline double relative_error(double a, double b, double abs_tol = 1e-10) {
  const double diff = std::max(0.0, std::abs(a - b) - abs_tol);
  return diff / (std::abs(a) + std::abs(b) + abs_tol);
}

inline double max_relative_error(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, relative_error(a[i], b[i]));
  return worst;
}

}  // namespace ebrl::test
