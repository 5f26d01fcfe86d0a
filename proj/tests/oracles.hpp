#pragma once

// Closed-form reference values computed without the library.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// P(chi^2_k(lambda) <= y) as a Poisson mixture of central chi^2 laws.
inline double noncentral_chi2_cdf(double y, double k, double lambda) {
  if (y <= 0.0) return 0.0;
  const double half = 0.5 * lambda;
  double total = 0.0;
  double weight = std::exp(-half);
  const int terms = 40 + static_cast<int>(half + 12.0 * std::sqrt(half));
  for (int j = 0; j < terms; ++j) {
    if (j > 0) weight *= half / j;
    total += weight * boost::math::gamma_p(0.5 * k + j, 0.5 * y);
  }
  return std::min(total, 1.0);
}

// One-sample Kolmogorov-Smirnov distance of data against a CDF.
inline double ks_distance(std::vector<double> data, const std::function<double(double)>& cdf) {
  std::sort(data.begin(), data.end());
  const double n = static_cast<double>(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = cdf(data[i]);
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  return d;
}

// Transition density of BES(3) (Brownian motion conditioned to stay positive).
inline double bes3_density(double t, double x, double y) {
  const double s = std::sqrt(t);
  return (y / x) * (normal_pdf((y - x) / s) - normal_pdf((y + x) / s)) / s;
}

// Brownian motion killed at 0: density on y > 0.
inline double killed_bm_density(double t, double x, double y) {
  const double s = std::sqrt(t);
  return (normal_pdf((y - x) / s) - normal_pdf((y + x) / s)) / s;
}

}  // namespace oracle
