#pragma once

// Shared statistical checks for sampling tests: chi-square goodness-of-fit
// against a known discrete distribution, and 3-sigma binomial bounds.

#include <cmath>
#include <cstddef>
#include <vector>

namespace ebrl::test {

// Upper critical value of the chi-square distribution via the
// Wilson-Hilferty cube approximation. z is the standard normal quantile of
// the target significance (2.326... for alpha = 0.01).
inline double chi_square_critical(std::size_t dof, double z = 2.3263478740408408) {
  const double k = static_cast<double>(dof);
  const double a = 2.0 / (9.0 * k);
  const double c = 1.0 - a + z * std::sqrt(a);
  return k * c * c * c;
}

inline double chi_square_statistic(const std::vector<std::size_t>& counts,
                                   const std::vector<double>& probs,
                                   std::size_t draws) {
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = probs[i] * static_cast<double>(draws);
    if (expected == 0.0) continue;  // zero-probability cell must stay empty
    const double diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

// Goodness-of-fit at significance 0.01. Cells with zero expected probability
// are excluded from the statistic but must have zero observations.
inline bool passes_chi_square(const std::vector<std::size_t>& counts,
                              const std::vector<double>& probs,
                              std::size_t draws) {
  std::size_t dof = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] == 0.0) {
      if (counts[i] != 0) return false;
    } else {
      ++dof;
    }
  }
  if (dof < 2) return true;
  return chi_square_statistic(counts, probs, draws) <
         chi_square_critical(dof - 1);
}

// |observed/n - p| within 3 standard errors.
inline bool within_three_sigma(std::size_t observed, std::size_t draws,
                               double p) {
  const double n = static_cast<double>(draws);
  const double sigma = std::sqrt(p * (1.0 - p) / n);
  return std::abs(static_cast<double>(observed) / n - p) <= 3.0 * sigma;
}

}  // namespace ebrl::test
