#include "inversio/samplers.hpp"

#include <cmath>
#include <numbers>

#include "inversio/errors.hpp"

namespace inversio {

double sample_besq_exact(double delta, double x, double t, RngStream& rng) {
  if (!(delta > 0.0)) throw InvalidArgument("BESQ dimension delta must be > 0");
  if (!(x >= 0.0) || !(t > 0.0)) throw InvalidArgument("BESQ transition needs x >= 0 and t > 0");
  if (delta >= 1.0) {
    const double root = std::sqrt(x) + std::sqrt(t) * rng.normal();
    double y = root * root;
    const double rest = delta - 1.0;
    if (rest > 0.0) y += 2.0 * t * rng.gamma(0.5 * rest);
    return y;
  }
  const auto k = rng.poisson(x / (2.0 * t));
  return 2.0 * t * rng.gamma(0.5 * delta + static_cast<double>(k));
}

void sample_stable_increment(double alpha, double dt, RngStream& rng, std::span<double> out) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw InvalidArgument("stable index alpha must lie in (0, 2]");
  if (!(dt > 0.0)) throw InvalidArgument("stable increment needs dt > 0");
  double scale = dt;
  if (alpha < 2.0) {
    // Kanter's representation of the positive (alpha/2)-stable subordinator
    // with Laplace exponent lambda^(alpha/2).
    const double a = 0.5 * alpha;
    const double u = std::numbers::pi * rng.uniform();
    const double e = rng.exponential();
    const double s = std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) *
                     std::pow(std::sin((1.0 - a) * u) / e, (1.0 - a) / a);
    scale = std::pow(dt, 1.0 / a) * s;
  }
  const double root = std::sqrt(scale);
  for (double& z : out) z = root * rng.normal();
}

std::vector<double> sample_stable_increment(double alpha, double dt, std::size_t n, RngStream& rng) {
  if (n == 0) throw InvalidArgument("stable increment dimension must be >= 1");
  std::vector<double> out(n);
  sample_stable_increment(alpha, dt, rng, out);
  return out;
}

State euler_step(const VectorField& drift,
                 const std::function<void(std::span<const double>, std::span<const double>,
                                          std::span<double>)>& dispersion,
                 const State& s, double dt, std::span<const double> noise,
                 const std::function<void(std::span<double>)>& projection) {
  if (s.is_cemetery()) throw InvalidArgument("euler_step from the cemetery");
  const std::size_t n = s.size();
  std::vector<double> b(n), kick(n), out(s.data().begin(), s.data().end());
  drift(s.data(), b);
  dispersion(s.data(), noise, kick);
  const double root = std::sqrt(dt);
  for (std::size_t i = 0; i < n; ++i) out[i] += b[i] * dt + kick[i] * root;
  if (projection) projection(out);
  return State::like(s, out);
}

namespace {

ExitCause absorption_cause(const ProcessModel& m, std::span<const double> x) {
  if (m.tip() && m.in_domain(x) && m.rho(x) < kAbsorptionEpsilon) return ExitCause::Origin;
  return ExitCause::Boundary;
}

void require_start(const Characteristics& family, const State& x0) {
  if (x0.is_cemetery() || x0.size() != family.n() || !family.model().in_domain(x0.data())) {
    throw DomainError("starting state is outside the state space of " + family.name());
  }
}

}  // namespace

Path sample_path(const Characteristics& family, const State& x0, const TimeGrid& grid,
                 RngStream& rng) {
  require_start(family, x0);
  const ProcessModel& m = family.model();
  auto stepper = m.make_stepper();
  stepper->reset(x0.data(), rng);
  Path path(m.kind(), m.order(), m.dim());
  path.reserve(grid.size());
  std::vector<double> x(x0.data().begin(), x0.data().end());
  path.push(0.0, x);
  const auto t = grid.times();
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (!stepper->advance(t[k] - t[k - 1], rng, x) || m.absorbed(x)) {
      path.kill(t[k], absorption_cause(m, x));
      path.set_grid_tail(t.subspan(k + 1));
      break;
    }
    path.push(t[k], x);
  }
  return path;
}

Quadrature default_quadrature(const Characteristics& family) {
  return family.model().interpolation() == Interpolation::Previous ? Quadrature::LeftPoint
                                                                  : Quadrature::Trapezoid;
}

Path sample_clocked_path(const Characteristics& family, const State& x0, const ClockPolicy& policy,
                         RngStream& rng) {
  require_start(family, x0);
  const ProcessModel& m = family.model();
  const Quadrature quad = default_quadrature(family);
  auto stepper = m.make_stepper();
  stepper->reset(x0.data(), rng);
  Path path(m.kind(), m.order(), m.dim());
  path.reserve(static_cast<std::size_t>(policy.horizon / policy.clock_step) + 64);
  std::vector<double> x(x0.data().begin(), x0.data().end());
  path.push(0.0, x);

  double t = 0.0;
  double a = 0.0;
  double v = m.v(x);
  for (std::size_t step = 0; a < policy.horizon && step < policy.max_steps; ++step) {
    const double ds = std::min(policy.clock_step * v, policy.max_relative_step * m.clock_scale(x));
    if (!(ds > 0.0) || !std::isfinite(ds)) throw NumericalDomainError("clock step degenerated");
    if (!stepper->advance(ds, rng, x) || m.absorbed(x)) {
      path.kill(t + ds, absorption_cause(m, x));
      return path;
    }
    t += ds;
    const double v_new = m.v(x);
    if (!std::isfinite(v_new)) {
      path.kill(t, ExitCause::Infinity);
      return path;
    }
    a += quad == Quadrature::Trapezoid ? 0.5 * ds * (1.0 / v + 1.0 / v_new) : ds / v;
    v = v_new;
    path.push(t, x);
    if (1.0 / std::sqrt(v) < policy.tail_tolerance) {
      path.kill(t + ds, ExitCause::Infinity);
      return path;
    }
  }
  return path;
}

}  // namespace inversio
