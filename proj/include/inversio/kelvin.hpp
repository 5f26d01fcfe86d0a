#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "inversio/characteristics.hpp"
#include "inversio/report.hpp"
#include "inversio/rng.hpp"
#include "inversio/transforms.hpp"

namespace inversio {

// x -> h(x) f(I x).
ScalarField kelvin_transform(const Characteristics& family, ScalarField f);

// Image of the measure h mu under I: states mapped by I, weights times h.
WeightedSample dual_kelvin(const WeightedSample& mu, const Characteristics& family);

// L f(x) = b . grad f + 1/2 tr(a Hess f) by central differences with one
// Richardson level. step <= 0 selects 1e-4 (1 + |x|).
double generator_residual(const Characteristics& family, const ScalarField& f, const State& x, double step = 0.0);

enum class RegionKind { RadialAnnulus, Box, HalfOrder, Involuted };

// Open region of a family's state space.
class RegionSpec {
 public:
  // a < radial(x) < b with the family's radial coordinate.
  static RegionSpec annulus(double a, double b);
  // lower < x < upper componentwise.
  static RegionSpec box(std::vector<double> lower, std::vector<double> upper);
  // 0 < x_1 < x_2 < ... < x_n (or x_1 < ... < x_n when `positive` is false).
  static RegionSpec half_order(bool positive = false);

  RegionKind kind() const noexcept { return kind_; }
  double inner() const noexcept { return a_; }
  double outer() const noexcept { return b_; }

  bool contains(const ProcessModel& model, std::span<const double> x) const;
  // The image I(D); annuli map to annuli, ordered chambers to themselves.
  RegionSpec involuted(const ProcessModel& model) const;

 private:
  RegionKind kind_ = RegionKind::Box;
  double a_ = 0.0;
  double b_ = 0.0;
  bool positive_ = false;
  std::vector<double> lower_, upper_;
  std::shared_ptr<const RegionSpec> base_;
};

struct ExitSample {
  // Exit states with weight 1; weight 0 for paths that died inside D or
  // were still inside at the end of the grid.
  WeightedSample exits;
  // Exit times, +inf where no exit was seen.
  std::vector<double> tau;
  std::size_t unfinished = 0;
  std::vector<std::string> warnings;
};

// First exit from D on the grid. For diffusions leaving an annulus the
// crossing between grid points is detected by the Brownian bridge
// probability of the radial coordinate and the exit point is moved onto the
// boundary.
ExitSample exit_sample(const Characteristics& family, const State& x, const RegionSpec& D, const TimeGrid& grid,
                       const RngStream& rng, std::size_t N);

// E_x Kf(X at exit of I(D)) against h(x) E_{I x} f(X at exit of D) for
// x in I(D). Residual report: relative gap against max(3 SE, 2%) plus a
// discretization allowance from a run at twice the step.
TestReport exit_identity_check(const Characteristics& family, const ScalarField& f, const State& x,
                               const RegionSpec& D, const TimeGrid& grid, const RngStream& rng, std::size_t N);

struct PotentialEstimate {
  double value = 0.0;
  // Analytic tail beyond t_max from the fitted power law.
  double tail = 0.0;
  double exponent = 0.0;
  double t_max = 0.0;
};

// U(x, y) = int_0^inf p_t(x, y) dt by Gauss-Kronrod quadrature in log t with
// a power-law tail fitted on the last decade; t_max grows until the tail is
// below rtol * value.
PotentialEstimate potential_kernel(const Characteristics& family, const State& x, const State& y,
                                   double t_max = 100.0, double rtol = 1e-3);

// Relative gap between U^{I(X)}(x, y) = U(I x, I y) Jac(I)(y) and
// V(y) h(y) / h(x) U(x, y) with V(y) = Jac(I)(y) rho(y)^(n alpha - 2).
double potential_relation_residual(const Characteristics& family, const State& x, const State& y);

}  // namespace inversio
