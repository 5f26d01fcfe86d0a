#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "inversio/characteristics.hpp"
#include "inversio/rng.hpp"
#include "inversio/state.hpp"

namespace inversio {

// Exact BESQ(delta) transition: a draw of t * chi^2_delta(x / t).
double sample_besq_exact(double delta, double x, double t, RngStream& rng);

// Isotropic alpha-stable increment over dt, normalised so that alpha = 2 is
// standard Brownian motion (characteristic exponent (|xi|^2 / 2)^(alpha/2)).
std::vector<double> sample_stable_increment(double alpha, double dt, std::size_t n, RngStream& rng);
void sample_stable_increment(double alpha, double dt, RngStream& rng, std::span<double> out);

// One Euler-Maruyama step s + b(s) dt + sigma(s) noise sqrt(dt), followed by the
// projection when given.
State euler_step(const VectorField& drift,
                 const std::function<void(std::span<const double>, std::span<const double>,
                                          std::span<double>)>& dispersion,
                 const State& s, double dt, std::span<const double> noise,
                 const std::function<void(std::span<double>)>& projection = {});

Path sample_path(const Characteristics& family, const State& x0, const TimeGrid& grid,
                 RngStream& rng);

enum class Quadrature { Trapezoid, LeftPoint };

// Explicit grid chosen so that each step adds about clock_step to the additive
// functional A = int 1/v(X) ds, capped at max_relative_step * clock_scale(X).
struct ClockPolicy {
  double clock_step = 1e-3;
  double max_relative_step = 0.05;
  double horizon = 1.0;
  // Stop once the remaining A, of order 1/sqrt(v(X)), is below this.
  double tail_tolerance = 1e-9;
  std::size_t max_steps = 50'000'000;
};

// Path on the clock grid. Ends alive when A reaches the horizon; otherwise ends
// with a cemetery point (Origin/Boundary when absorbed, Infinity when the tail
// rule fires).
Path sample_clocked_path(const Characteristics& family, const State& x0, const ClockPolicy& policy,
                         RngStream& rng);

Quadrature default_quadrature(const Characteristics& family);

}  // namespace inversio
