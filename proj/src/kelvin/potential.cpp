#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <string>

#include "inversio/errors.hpp"
#include "inversio/kelvin.hpp"

namespace inversio {

namespace {

// int p_t dt over [exp(u0), exp(u1)] in the variable u = log t.
double integrate_log_time(const Characteristics& family, const State& x, const State& y, double u0, double u1) {
  auto g = [&](double u) {
    const double t = std::exp(u);
    const double p = family.density(t, x, y);
    return std::isfinite(p) ? p * t : 0.0;
  };
  double total = 0.0;
  // Unit pieces keep the adaptive rule from missing a narrow peak.
  const auto pieces = static_cast<std::size_t>(std::ceil(u1 - u0));
  const double width = (u1 - u0) / static_cast<double>(std::max<std::size_t>(pieces, 1));
  for (std::size_t k = 0; k < std::max<std::size_t>(pieces, 1); ++k) {
    const double a = u0 + width * static_cast<double>(k);
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, a + width, 12, 1e-12);
  }
  return total;
}

}  // namespace

PotentialEstimate potential_kernel(const Characteristics& family, const State& x, const State& y, double t_max,
                                   double rtol) {
  if (!family.has_density()) throw Unsupported(family.name() + " has no closed-form density");
  if (!(t_max > 0.0) || !(rtol > 0.0)) throw InvalidArgument("t_max and rtol must be positive");
  if (family.is_tip() && bessel_dimension(family) < 2.0)
    throw Unsupported(family.name() + " is not transient (dimension below 2)");
  if (!family.in_domain(x) || !family.in_domain(y)) throw DomainError("potential arguments outside the domain");

  const double scale = 1.0 + family.rho(x) + family.rho(y);
  const double u_min = std::log(1e-14 * scale);
  double u_max = std::log(t_max);
  double body = integrate_log_time(family, x, y, u_min, u_max);

  for (int round = 0; round < 16; ++round) {
    const double t_end = std::exp(u_max);
    const double p_end = family.density(t_end, x, y);
    const double p_decade = family.density(t_end / 10.0, x, y);
    PotentialEstimate est;
    est.t_max = t_end;
    if (p_end > 0.0 && p_decade > 0.0) {
      est.exponent = std::log(p_decade / p_end) / std::log(10.0);
      if (!(est.exponent > 1.01))
        throw TailError("potential integrand decays like t^-" + std::to_string(est.exponent) +
                        ", not integrable at infinity");
      est.tail = p_end * t_end / (est.exponent - 1.0);
    }
    est.value = body + est.tail;
    if (est.tail <= rtol * est.value) return est;
    const double next = u_max + std::log(4.0);
    body += integrate_log_time(family, x, y, u_max, next);
    u_max = next;
  }
  throw TailError("potential tail did not fall below the tolerance");
}

double potential_relation_residual(const Characteristics& family, const State& x, const State& y) {
  const auto tip = family.model().tip();
  if (!tip) throw Unsupported(family.name() + " is not a t.i.p. family");
  const State ix = family.involution(x);
  const State iy = family.involution(y);
  const double jac = family.jacobian_I(y);
  const double lhs = potential_kernel(family, ix, iy).value * jac;
  const double n = static_cast<double>(family.n());
  const double V = jac * std::pow(family.rho(y), n * tip->alpha - 2.0);
  const double rhs = V * family.excessive_h(y) / family.excessive_h(x) * potential_kernel(family, x, y).value;
  return std::abs(lhs - rhs) / std::abs(rhs);
}

}  // namespace inversio
