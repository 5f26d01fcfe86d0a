#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "inversio/characteristics.hpp"
#include "inversio/report.hpp"
#include "inversio/stats.hpp"
#include "inversio/transforms.hpp"

namespace inversio {

// Marginal laws of X_t from x0 at each of the (increasing) times: weight 1 for
// live paths, 0 for killed ones. Exact and jump samplers step straight between
// the requested times; Euler samplers use steps of at most dt.
std::vector<WeightedSample> sample_marginals(const Characteristics& family, const State& x0,
                                             std::span<const double> times, std::size_t N, double dt,
                                             const RngStream& base);

struct ShapeOptions {
  std::size_t permutations = 999;
  std::size_t energy_points = 1000;
  std::size_t energy_permutations = 499;
  double threshold = 0.01;
  // Metric cap for the energy distance (0 = Euclidean).
  double metric_cap = 0.0;
};

struct IpOptions : ShapeOptions {
  double max_relative_step = 0.05;
  double tail_tolerance = 1e-9;
  // Replaces the family's h in the reweighting (negative controls).
  ScalarField h_override;
  std::string label;
};

// Inversion property at each t: the involuted, time-changed paths from x0,
// reweighted by h(I x0) / h(Y_t), against plain paths from I(x0). Sub-tests:
// survival mass, KS per coordinate and on the radial coordinate, energy
// distance; Bonferroni-aggregated into one report per t.
std::vector<TestReport> verify_ip(const Characteristics& family, const State& x0, std::span<const double> times,
                                  std::size_t N, double dt, std::uint64_t seed, const IpOptions& options = {});

// Null calibration: both sides are plain samples of X_t from x0 with
// independent streams, run through the same sub-tests.
TestReport verify_ip_self(const Characteristics& family, const State& x0, double t, std::size_t N, double dt,
                          std::uint64_t seed, const ShapeOptions& options = {});

struct ExcessiveOptions {
  double threshold = 0.01;
  std::string label;
};

// One-sided tests of E_x g(X_t) <= g(x0) at each t plus the monotone approach
// of the means toward g(x0) as t decreases.
TestReport verify_excessive(const Characteristics& family, const ScalarField& g, const State& x0,
                            std::span<const double> times, std::size_t N, double dt, std::uint64_t seed,
                            const ExcessiveOptions& options = {});

// KS between sqrt(rho(X_t)) and an exact Bessel process of dimension
// (beta + n) alpha started at sqrt(rho(x0)).
TestReport verify_radial_bessel(const Characteristics& family, const State& x0, double t, std::size_t N,
                                double dt, std::uint64_t seed, const ShapeOptions& options = {});

struct Bijection {
  std::string name;
  VectorField forward;
  VectorField inverse;
};

Bijection identity_bijection(std::size_t dim);
// (x_1, ..., x_m, off-diagonal y) in R^{m(m+1)/2} -> symmetric M with
// M_ii = x_i, M_ij = y_ij / sqrt 2 (upper triangle, row-major).
Bijection flat_to_symmetric(std::size_t m);
// x -> (x_1^2, ..., x_n^2) on the positive orthant.
Bijection coordinate_squares(std::size_t n);

struct ConjugationOptions : ShapeOptions {
  double characteristic_tolerance = 1e-10;
  std::size_t characteristic_points = 1000;
};

// Phi(X^A_t) against X^B_t from Phi(x0), and J = Phi o I_A o Phi^-1,
// h_A o Phi^-1, v_A o Phi^-1 against B's characteristics.
TestReport verify_conjugation(const Characteristics& family_a, const Characteristics& family_b,
                              const Bijection& phi, const State& x0, double t, std::size_t N, std::uint64_t seed,
                              const ConjugationOptions& options = {});

}  // namespace inversio
