#include <algorithm>
#include <cmath>
#include <numbers>

#include "common.hpp"
#include "inversio/errors.hpp"

namespace inversio::detail {

namespace {

// I0(r) = 1/2 log coth r = 1/2 log(1 + 2 / (e^{2r} - 1)), exact at both ends.
double inv0(double r) { return 0.5 * std::log1p(2.0 / std::expm1(2.0 * r)); }
// (coth r - 1) / sqrt(2), normalised so that h * h o I0 = 1.
double h0(double r) { return std::numbers::sqrt2 / std::expm1(2.0 * r); }
double v0(double r) {
  const double s = std::sinh(2.0 * r);
  return s * s;
}

// Radial part of a 3-d Brownian motion with unit drift (Rogers-Pitman): its
// norm is the diffusion 1/2 f'' + coth(r) f'. The hidden vector starts with a
// von Mises-Fisher direction of concentration r0 around the drift.
class HyperbolicBesselStepper : public Stepper {
 public:
  void reset(std::span<const double> x0, RngStream& rng) override {
    const double r = x0[0];
    const double u = rng.uniform();
    double c = 1.0 + std::log1p(-(1.0 - u) * -std::expm1(-2.0 * r)) / r;
    c = std::clamp(c, -1.0, 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    w_[0] = r * c;
    w_[1] = r * s * std::cos(phi);
    w_[2] = r * s * std::sin(phi);
  }

  bool advance(double dt, RngStream& rng, std::span<double> x) override {
    const double s = std::sqrt(dt);
    w_[0] += dt + s * rng.normal();
    w_[1] += s * rng.normal();
    w_[2] += s * rng.normal();
    x[0] = std::sqrt(w_[0] * w_[0] + w_[1] * w_[1] + w_[2] * w_[2]);
    return x[0] > 0.0;
  }

 private:
  double w_[3] = {0.0, 0.0, 0.0};
};

class HyperbolicBesselModel : public ProcessModel {
 public:
  std::string id() const override { return "hyperbolic-bessel"; }
  std::string name() const override { return "hyperbolic-bessel(n=3)"; }
  std::size_t dim() const override { return 1; }
  double radial(std::span<const double> x) const override { return x[0]; }
  double radial_involution(double r) const override { return inv0(r); }
  void scale_to_radial(std::span<const double>, double r, std::span<double> out) const override { out[0] = r; }
  void involution(std::span<const double> x, std::span<double> out) const override { out[0] = inv0(x[0]); }
  double h(std::span<const double> x) const override { return h0(x[0]); }
  double v(std::span<const double> x) const override { return v0(x[0]); }
  double jacobian(std::span<const double> x) const override { return 1.0 / std::sinh(2.0 * x[0]); }
  bool in_domain(std::span<const double> x) const override {
    return x.size() == 1 && std::isfinite(x[0]) && x[0] > 0.0;
  }
  bool absorbed(std::span<const double> x) const override {
    return !in_domain(x) || x[0] < kAbsorptionEpsilon;
  }

  SamplerKind sampler_kind() const override { return SamplerKind::Exact; }
  // Unit volatility and drift near 1: the motion has no large scale, unlike v.
  double clock_scale(std::span<const double> x) const override { return std::min(std::sqrt(v0(x[0])), 0.2); }
  std::unique_ptr<Stepper> make_stepper() const override {
    return std::make_unique<HyperbolicBesselStepper>();
  }

  bool has_generator() const override { return true; }
  void drift(std::span<const double> x, std::span<double> out) const override {
    out[0] = 1.0 / std::tanh(x[0]);
  }
  void diffusion(std::span<const double>, std::span<double> out) const override { out[0] = 1.0; }
  void disperse(std::span<const double>, std::span<const double> noise, std::span<double> out) const override {
    out[0] = noise[0];
  }
  void project(std::span<double> x) const override { x[0] = std::abs(x[0]); }
};

// Hyperbolic Brownian motion on the Poincare ball B^3 with the radial
// inversion of the hyperbolic Bessel process lifted along rays. Its Kelvin
// transform does not preserve harmonicity: registered for the negative
// generator check only, without a sampler.
class HyperbolicBallModel : public ProcessModel {
 public:
  std::string id() const override { return "hyperbolic-bm"; }
  std::string name() const override { return "hyperbolic-bm(n=3)"; }
  std::size_t dim() const override { return 3; }
  std::vector<std::string> flags() const override { return {"candidate-only"}; }

  static double distance(double s) { return 2.0 * std::atanh(s); }
  // 1 - |x| from 1 - |x|^2, which keeps its digits near the boundary.
  static double one_minus_norm(std::span<const double> x) {
    const double q2 = squared_norm(x);
    return (1.0 - q2) / (1.0 + std::sqrt(q2));
  }
  // Euclidean radius of the image of a point at Euclidean radius s. With
  // r = d(0, x), coth r = 1 + q and q = (1 - s)^2 / (2 s); tanh(I0(r) / 2)
  // is then q / (sqrt(1 + q) + 1)^2.
  static double image_radius(double s, double one_minus_s) {
    const double q = one_minus_s * one_minus_s / (2.0 * s);
    const double d = std::sqrt(1.0 + q) + 1.0;
    return q / (d * d);
  }

  double radial(std::span<const double> x) const override { return distance(std::sqrt(squared_norm(x))); }
  double radial_involution(double r) const override { return inv0(r); }
  void scale_to_radial(std::span<const double> x, double r, std::span<double> out) const override {
    scale_into(x, std::tanh(0.5 * r) / std::sqrt(squared_norm(x)), out);
  }
  void involution(std::span<const double> x, std::span<double> out) const override {
    const double s = std::sqrt(squared_norm(x));
    scale_into(x, image_radius(s, one_minus_norm(x)) / s, out);
  }
  // h0 and v0 in the Euclidean radius, avoiding artanh near the boundary.
  double h(std::span<const double> x) const override {
    const double s = std::sqrt(squared_norm(x));
    const double d = one_minus_norm(x);
    return std::numbers::sqrt2 * d * d / (4.0 * s);
  }
  double v(std::span<const double> x) const override {
    const double q2 = squared_norm(x);
    const double w = 4.0 * std::sqrt(q2) * (1.0 + q2) / ((1.0 - q2) * (1.0 - q2));
    return w * w;
  }
  double jacobian(std::span<const double> x) const override {
    const double s = std::sqrt(squared_norm(x));
    const double r = distance(s);
    const double i = inv0(r);
    const double sech = 1.0 / std::cosh(0.5 * i);
    const double g = std::tanh(0.5 * i);
    const double dg = 0.5 * sech * sech * (1.0 / std::sinh(2.0 * r)) * 2.0 / (1.0 - s * s);
    return dg * (g / s) * (g / s);
  }
  bool in_domain(std::span<const double> x) const override {
    if (x.size() != 3 || !all_finite(x)) return false;
    const double q = squared_norm(x);
    return q > 0.0 && q < 1.0;
  }
  SamplerKind sampler_kind() const override { return SamplerKind::None; }

  bool has_generator() const override { return true; }
  void drift(std::span<const double> x, std::span<double> out) const override {
    const double c = 0.25 * (1.0 - squared_norm(x));
    for (std::size_t i = 0; i < 3; ++i) out[i] = c * x[i];
  }
  void diffusion(std::span<const double> x, std::span<double> out) const override {
    const double q = 1.0 - squared_norm(x);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < 3; ++i) out[i * 3 + i] = 0.25 * q * q;
  }
  void disperse(std::span<const double> x, std::span<const double> noise, std::span<double> out) const override {
    const double c = 0.5 * (1.0 - squared_norm(x));
    for (std::size_t i = 0; i < 3; ++i) out[i] = c * noise[i];
  }
};

}  // namespace

std::shared_ptr<const ProcessModel> make_hyperbolic_bessel() { return std::make_shared<HyperbolicBesselModel>(); }
std::shared_ptr<const ProcessModel> make_hyperbolic_ball() { return std::make_shared<HyperbolicBallModel>(); }

}  // namespace inversio::detail
