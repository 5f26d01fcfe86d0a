#include "inversio/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "inversio/errors.hpp"

namespace inversio {

namespace {

double log_bessel_i_hankel(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * z);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return z - 0.5 * std::log(2.0 * std::numbers::pi * z) + std::log(sum);
}

}  // namespace

double log_bessel_i(double nu, double z) {
  if (!(nu > -1.0)) throw InvalidArgument("Bessel order must exceed -1");
  if (z < 0.0 || std::isnan(z)) throw InvalidArgument("Bessel argument must be >= 0");
  if (z == 0.0) {
    if (nu == 0.0) return 0.0;
    return nu > 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  }
  if (z > 500.0) return log_bessel_i_hankel(nu, z);
  if (z < 1e-6) {
    // Leading two terms of the power series.
    const double lead = nu * std::log(0.5 * z) - std::lgamma(nu + 1.0);
    return lead + std::log1p(0.25 * z * z / (nu + 1.0));
  }
  if (nu >= 0.0) return std::log(std::cyl_bessel_i(nu, z));
  const double m = -nu;
  const double value = std::cyl_bessel_i(m, z) + 2.0 / std::numbers::pi * std::sin(m * std::numbers::pi) *
                                                     std::cyl_bessel_k(m, z);
  return std::log(value);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

}  // namespace inversio
