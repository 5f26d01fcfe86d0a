#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inversio/characteristics.hpp"
#include "inversio/samplers.hpp"
#include "inversio/state.hpp"

namespace inversio {

// A_t = int_0^t 1/v(X_s) ds on the grid of a path, frozen at the lifetime.
struct AdditiveFunctional {
  std::vector<double> times;
  std::vector<double> values;
  // A at the last live grid point.
  double final_value = 0.0;
  // Grid points up to and including the last live one.
  std::size_t live_points = 0;
  // True when the path never died on its grid (final value is then a lower
  // bound standing in for A_infinity).
  bool survives = true;
};

AdditiveFunctional additive_functional(const Path& path, const ScalarField& v,
                                       Quadrature rule = Quadrature::Trapezoid);

// gamma_t, the inverse of A at t; empty past the final value.
std::optional<double> invert_time_change(const AdditiveFunctional& a, double t);

// State of the path at time s: linear interpolation between grid points, or the
// previous grid state for jump families. Writes into out.
void interpolate_path(const Path& path, double s, Interpolation mode, std::span<double> out);

// Y_s = I(X_{gamma_s}) on out_grid; cemetery past A's final value.
Path involute_path(const Path& path, const Characteristics& family, const TimeGrid& out_grid);
// Same with an explicit speed function (used for compositions).
Path involute_path(const Path& path, const Characteristics& family, const ScalarField& v,
                   const TimeGrid& out_grid);

// h(X_t) / h(X_0), zero at or past the lifetime or where h is not finite.
double h_weight(const Path& path, const ScalarField& h, double t,
                Interpolation mode = Interpolation::Linear);

// Euler scheme of X^h: the family's drift plus a grad log h (central
// differences unless grad_log_h is given). Steps follow the grid exactly.
Path doob_drift_sampler(const Characteristics& family, const ScalarField& h, const State& x0,
                        const TimeGrid& grid, RngStream& rng, const VectorField& grad_log_h = {});

// x -> h(x) H(I x) / H(x).
ScalarField kelvin_conditioning_h(const Characteristics& family, const ScalarField& H);

struct SampleOrigin {
  std::vector<double> x0;
  double t = 0.0;
  std::string family;
  std::uint64_t seed = 0;
};

// Weighted empirical (sub-probability) measure. States are stored row-major;
// the cemetery is represented by weight 0 only.
class WeightedSample {
 public:
  WeightedSample() = default;
  explicit WeightedSample(std::size_t dim) : dim_(dim) {}

  void add(std::span<const double> x, double w);
  void reserve(std::size_t n);
  // Associative, commutative merge.
  void merge(const WeightedSample& other);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<double> mutable_weights() noexcept { return weights_; }
  double total_weight() const;
  // Column k as a 1-d sample.
  WeightedSample coordinate(std::size_t k) const;
  // Drops zero-weight points.
  WeightedSample support() const;

  SampleOrigin origin;

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
  std::vector<double> weights_;
};

}  // namespace inversio
