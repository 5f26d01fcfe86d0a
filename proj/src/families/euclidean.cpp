#include <cmath>
#include <numbers>

#include "common.hpp"
#include "inversio/errors.hpp"
#include "inversio/samplers.hpp"

namespace inversio::detail {

namespace {

// Independent Gaussian increments with per-coordinate variance c_k * dt.
class GaussianStepper : public Stepper {
 public:
  explicit GaussianStepper(std::vector<double> variance) : root_(variance.size()) {
    for (std::size_t k = 0; k < variance.size(); ++k) root_[k] = std::sqrt(variance[k]);
  }
  void reset(std::span<const double>, RngStream&) override {}
  bool advance(double dt, RngStream& rng, std::span<double> x) override {
    const double s = std::sqrt(dt);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += s * root_[k] * rng.normal();
    return true;
  }

 private:
  std::vector<double> root_;
};

class StableStepper : public Stepper {
 public:
  StableStepper(double alpha, std::size_t n) : alpha_(alpha), inc_(n) {}
  void reset(std::span<const double>, RngStream&) override {}
  bool advance(double dt, RngStream& rng, std::span<double> x) override {
    sample_stable_increment(alpha_, dt, rng, inc_);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += inc_[k];
    return true;
  }

 private:
  double alpha_;
  std::vector<double> inc_;
};

// Spherical inversion characteristics shared by Brownian motion and GOE:
// rho = |x|^2 for a quadratic norm, alpha = 1, beta = 0.
class QuadraticNormModel : public ProcessModel {
 public:
  std::optional<TipData> tip() const override { return TipData{1.0, 0.0}; }
  void involution(std::span<const double> x, std::span<double> out) const override {
    scale_into(x, 1.0 / rho(x), out);
  }
  double h(std::span<const double> x) const override {
    return std::pow(rho(x), 1.0 - 0.5 * static_cast<double>(dim()));
  }
  double v(std::span<const double> x) const override {
    const double r = rho(x);
    return r * r;
  }
  double jacobian(std::span<const double> x) const override {
    return std::pow(rho(x), -static_cast<double>(dim()));
  }
  bool in_domain(std::span<const double> x) const override {
    if (x.size() != dim() || !all_finite(x)) return false;
    return rho(x) > 0.0;
  }
  bool transient() const override { return dim() >= 3; }
  std::vector<std::string> flags() const override {
    if (!transient()) return {"non-transient"};
    return {};
  }
  SamplerKind sampler_kind() const override { return SamplerKind::Exact; }
  std::unique_ptr<Stepper> make_stepper() const override {
    return std::make_unique<GaussianStepper>(variances());
  }

  bool has_density() const override { return true; }
  double log_density(double t, std::span<const double> x, std::span<const double> y) const override {
    const auto c = variances();
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double d = y[k] - x[k];
      s += -0.5 * std::log(2.0 * std::numbers::pi * c[k] * t) - d * d / (2.0 * c[k] * t);
    }
    return s;
  }
  bool has_theta() const override { return true; }
  double log_theta(std::span<const double>) const override { return 0.0; }

  bool has_generator() const override { return true; }
  void drift(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }
  void diffusion(std::span<const double>, std::span<double> out) const override {
    const auto c = variances();
    const std::size_t n = c.size();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) out[k * n + k] = c[k];
  }
  void disperse(std::span<const double>, std::span<const double> noise, std::span<double> out) const override {
    const auto c = variances();
    for (std::size_t k = 0; k < c.size(); ++k) out[k] = std::sqrt(c[k]) * noise[k];
  }

 protected:
  virtual std::vector<double> variances() const = 0;
};

class BrownianModel : public QuadraticNormModel {
 public:
  explicit BrownianModel(std::size_t n) : n_(n) {}
  std::string id() const override { return "bm"; }
  std::string name() const override { return "bm(n=" + std::to_string(n_) + ")"; }
  std::size_t dim() const override { return n_; }
  double rho(std::span<const double> x) const override { return squared_norm(x); }

 protected:
  std::vector<double> variances() const override { return std::vector<double>(n_, 1.0); }

 private:
  std::size_t n_;
};

class GoeModel : public QuadraticNormModel {
 public:
  explicit GoeModel(std::size_t m) : m_(m) {}
  std::string id() const override { return "goe"; }
  std::string name() const override { return "goe(m=" + std::to_string(m_) + ")"; }
  StateKind kind() const override { return StateKind::SymMatrix; }
  std::size_t order() const override { return m_; }
  std::size_t dim() const override { return sym_size(m_); }
  double rho(std::span<const double> x) const override { return frobenius_squared(m_, x); }

 protected:
  // (N + N^T)/2 for a Brownian matrix N: diagonal variance t, off-diagonal t/2.
  std::vector<double> variances() const override {
    std::vector<double> c;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = i; j < m_; ++j) c.push_back(i == j ? 1.0 : 0.5);
    }
    return c;
  }

 private:
  std::size_t m_;
};

class StableModel : public ProcessModel {
 public:
  StableModel(double alpha, std::size_t n) : alpha_(alpha), n_(n) {}
  std::string id() const override { return "stable"; }
  std::string name() const override {
    return "stable(alpha=" + format_number(alpha_) + ", n=" + std::to_string(n_) + ")";
  }
  std::size_t dim() const override { return n_; }
  double radial(std::span<const double> x) const override { return std::sqrt(squared_norm(x)); }
  void scale_to_radial(std::span<const double> x, double r, std::span<double> out) const override {
    scale_into(x, r / radial(x), out);
  }
  void involution(std::span<const double> x, std::span<double> out) const override {
    scale_into(x, 1.0 / squared_norm(x), out);
  }
  double h(std::span<const double> x) const override {
    return std::pow(squared_norm(x), 0.5 * (alpha_ - static_cast<double>(n_)));
  }
  double v(std::span<const double> x) const override { return std::pow(squared_norm(x), alpha_); }
  double jacobian(std::span<const double> x) const override {
    return std::pow(squared_norm(x), -static_cast<double>(n_));
  }
  bool in_domain(std::span<const double> x) const override {
    if (x.size() != n_ || !all_finite(x)) return false;
    return squared_norm(x) > 0.0;
  }
  bool absorbed(std::span<const double> x) const override {
    return !in_domain(x) || squared_norm(x) < kAbsorptionEpsilon;
  }
  SamplerKind sampler_kind() const override { return SamplerKind::Jump; }
  std::unique_ptr<Stepper> make_stepper() const override {
    return std::make_unique<StableStepper>(alpha_, n_);
  }
  Interpolation interpolation() const override {
    return alpha_ < 2.0 ? Interpolation::Previous : Interpolation::Linear;
  }

 private:
  double alpha_;
  std::size_t n_;
};

}  // namespace

std::shared_ptr<const ProcessModel> make_bm(std::size_t n) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  return std::make_shared<BrownianModel>(n);
}

std::shared_ptr<const ProcessModel> make_goe(std::size_t m) {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  return std::make_shared<GoeModel>(m);
}

std::shared_ptr<const ProcessModel> make_stable(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw InvalidArgument("alpha must lie in (0, 2]");
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (!(alpha < static_cast<double>(n))) {
    throw InvalidArgument("alpha must be < n (recurrent stable processes are not supported)");
  }
  return std::make_shared<StableModel>(alpha, n);
}

}  // namespace inversio::detail
