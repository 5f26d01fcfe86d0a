#pragma once

namespace inversio {

// log I_nu(z) for nu > -1, z >= 0. Hankel expansion for large z.
double log_bessel_i(double nu, double z);

double normal_cdf(double x);
// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);
// Two-sided p-value of a standard normal statistic.
double normal_two_sided_p(double z);

}  // namespace inversio
