#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "common.hpp"
#include "inversio/errors.hpp"

namespace inversio::detail {

double log_det_exp(std::span<const double> logs, std::size_t n) {
  if (n == 2) {
    // Exact for near-singular pairs: log(e^d - e^o) = d + log(-expm1(o - d)).
    const double d = logs[0] + logs[3];
    const double o = logs[1] + logs[2];
    if (!std::isfinite(d) || !(d > o)) return -INFINITY;
    return d + std::log(-std::expm1(o - d));
  }
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a(nn, nn);
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_max = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) row_max = std::max(row_max, logs[i * n + j]);
    if (!std::isfinite(row_max)) return -INFINITY;
    shift += row_max;
    for (std::size_t j = 0; j < n; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(logs[i * n + j] - row_max);
    }
  }
  double det;
  if (n == 1) {
    det = a(0, 0);
  } else {
    det = a.partialPivLu().determinant();
  }
  if (!(det > 0.0)) return -INFINITY;
  return shift + std::log(det);
}

namespace {

bool separated(std::span<const double> x) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] - x[i - 1] >= kAbsorptionEpsilon)) return false;
  }
  return true;
}

// Eigenvalues of a Hermitian Brownian matrix: diagonal variance t, complex
// off-diagonal entries with E|H_ij|^2 = t.
class DysonStepper : public Stepper {
 public:
  explicit DysonStepper(std::size_t n) : n_(n), h_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) {}

  void reset(std::span<const double> x0, RngStream&) override {
    h_.setZero();
    for (std::size_t i = 0; i < n_; ++i) h_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = x0[i];
  }

  bool advance(double dt, RngStream& rng, std::span<double> x) override {
    const double s = std::sqrt(dt);
    const double so = s * (1.0 / std::numbers::sqrt2);
    const auto n = static_cast<Eigen::Index>(n_);
    for (Eigen::Index i = 0; i < n; ++i) {
      h_(i, i) += s * rng.normal();
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double re = so * rng.normal();
        const double im = so * rng.normal();
        h_(i, j) += std::complex<double>(re, im);
        h_(j, i) = std::conj(h_(i, j));
      }
    }
    if (n_ == 2) {
      const double a = h_(0, 0).real(), b = h_(1, 1).real();
      const double c2 = std::norm(h_(0, 1));
      const double mid = 0.5 * (a + b);
      const double rad = std::sqrt(0.25 * (a - b) * (a - b) + c2);
      x[0] = mid - rad;
      x[1] = mid + rad;
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h_, Eigen::EigenvaluesOnly);
      for (std::size_t i = 0; i < n_; ++i) x[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
    }
    return true;
  }

 private:
  std::size_t n_;
  Eigen::MatrixXcd h_;
};

class DysonModel : public ProcessModel {
 public:
  explicit DysonModel(std::size_t n) : n_(n) {}

  std::string id() const override { return "dyson"; }
  std::string name() const override { return "dyson(n=" + std::to_string(n_) + ")"; }
  std::size_t dim() const override { return n_; }
  std::optional<TipData> tip() const override {
    const double n = static_cast<double>(n_);
    return TipData{1.0, n * (n - 1.0)};
  }
  double rho(std::span<const double> x) const override { return squared_norm(x); }
  void involution(std::span<const double> x, std::span<double> out) const override {
    scale_into(x, 1.0 / squared_norm(x), out);
  }
  double h(std::span<const double> x) const override {
    const double n = static_cast<double>(n_);
    return std::pow(squared_norm(x), 1.0 - 0.5 * n * n);
  }
  double v(std::span<const double> x) const override {
    const double r = squared_norm(x);
    return r * r;
  }
  double jacobian(std::span<const double> x) const override {
    return std::pow(squared_norm(x), -static_cast<double>(n_));
  }
  bool in_domain(std::span<const double> x) const override {
    return x.size() == n_ && all_finite(x) && strictly_increasing(x) && squared_norm(x) > 0.0;
  }
  bool absorbed(std::span<const double> x) const override {
    return !in_domain(x) || !separated(x) || squared_norm(x) < kAbsorptionEpsilon;
  }

  SamplerKind sampler_kind() const override { return SamplerKind::Exact; }
  std::unique_ptr<Stepper> make_stepper() const override { return std::make_unique<DysonStepper>(n_); }

  bool has_density() const override { return true; }
  double log_density(double t, std::span<const double> x, std::span<const double> y) const override {
    std::vector<double> logs(n_ * n_);
    const double c = -0.5 * std::log(2.0 * std::numbers::pi * t);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double d = x[i] - y[j];
        logs[i * n_ + j] = c - d * d / (2.0 * t);
      }
    }
    return log_vandermonde(y) - log_vandermonde(x) + log_det_exp(logs, n_);
  }
  bool has_theta() const override { return true; }
  double log_theta(std::span<const double> y) const override {
    return 0.5 * static_cast<double>(n_) * std::log(2.0 * std::numbers::pi) + 2.0 * log_vandermonde(y);
  }

  bool has_generator() const override { return true; }
  void drift(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j != i) s += 1.0 / (x[i] - x[j]);
      }
      out[i] = s;
    }
  }
  void diffusion(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) out[i * n_ + i] = 1.0;
  }
  void disperse(std::span<const double>, std::span<const double> noise, std::span<double> out) const override {
    std::copy(noise.begin(), noise.end(), out.begin());
  }
  void project(std::span<double> x) const override { std::sort(x.begin(), x.end()); }

 private:
  std::size_t n_;
};

// Free BESQ(delta)^n conditioned never to collide (Doob transform by the
// Vandermonde determinant). Simulated by Euler on the conditioned SDE.
class NonCollidingBesqModel : public ProcessModel {
 public:
  NonCollidingBesqModel(std::size_t n, double delta) : n_(n), delta_(delta) {}

  std::string id() const override { return "noncolliding-besq"; }
  std::string name() const override {
    return "noncolliding-besq(n=" + std::to_string(n_) + ", delta=" + format_number(delta_) + ")";
  }
  std::size_t dim() const override { return n_; }
  std::optional<TipData> tip() const override {
    const double n = static_cast<double>(n_);
    return TipData{2.0, n * (0.5 * delta_ - 1.0) + n * (n - 1.0)};
  }
  double rho(std::span<const double> x) const override { return sum(x); }
  void involution(std::span<const double> x, std::span<double> out) const override {
    const double s = sum(x);
    scale_into(x, 1.0 / (s * s), out);
  }
  double h(std::span<const double> x) const override {
    const double n = static_cast<double>(n_);
    return std::pow(sum(x), 1.0 - 0.5 * n * delta_ - n * (n - 1.0));
  }
  double v(std::span<const double> x) const override {
    const double s = sum(x);
    return s * s;
  }
  double jacobian(std::span<const double> x) const override {
    return std::pow(sum(x), -2.0 * static_cast<double>(n_));
  }
  bool in_domain(std::span<const double> x) const override {
    return x.size() == n_ && all_finite(x) && x[0] >= 0.0 && strictly_increasing(x) && sum(x) > 0.0;
  }
  bool absorbed(std::span<const double> x) const override {
    return !in_domain(x) || !separated(x) || sum(x) < kAbsorptionEpsilon;
  }

  SamplerKind sampler_kind() const override { return SamplerKind::Euler; }
  std::unique_ptr<Stepper> make_stepper() const override {
    return std::make_unique<EulerStepper>(shared_from_this());
  }
  // Diffusive time across the smallest gap also caps the Euler step.
  double clock_scale(std::span<const double> x) const override {
    double gap = INFINITY;
    for (std::size_t i = 1; i < n_; ++i) gap = std::min(gap, x[i] - x[i - 1]);
    const double across = 10.0 * gap * gap / (4.0 * x[n_ - 1]);
    return std::min(sum(x), across);
  }

  bool has_density() const override { return true; }
  double log_density(double t, std::span<const double> x, std::span<const double> y) const override {
    std::vector<double> logs(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) logs[i * n_ + j] = besq_log_density(delta_, t, x[i], y[j]);
    }
    return log_vandermonde(y) - log_vandermonde(x) + log_det_exp(logs, n_);
  }
  bool has_theta() const override { return true; }
  double log_theta(std::span<const double> y) const override {
    double s = 2.0 * log_vandermonde(y);
    for (double yi : y) s += (0.5 * delta_ - 1.0) * std::log(yi);
    return s;
  }

  bool has_generator() const override { return true; }
  void drift(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = delta_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j != i) s += 4.0 * x[i] / (x[i] - x[j]);
      }
      out[i] = s;
    }
  }
  void diffusion(std::span<const double> x, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) out[i * n_ + i] = 4.0 * x[i];
  }
  void disperse(std::span<const double> x, std::span<const double> noise, std::span<double> out) const override {
    for (std::size_t i = 0; i < n_; ++i) out[i] = 2.0 * std::sqrt(std::max(x[i], 0.0)) * noise[i];
  }
  void project(std::span<double> x) const override {
    for (double& xi : x) xi = std::abs(xi);
    std::sort(x.begin(), x.end());
  }

 private:
  std::size_t n_;
  double delta_;
};

}  // namespace

std::shared_ptr<const ProcessModel> make_dyson(std::size_t n) {
  if (n < 2) throw InvalidArgument("n must be >= 2");
  return std::make_shared<DysonModel>(n);
}

std::shared_ptr<const ProcessModel> make_noncolliding_besq(std::size_t n, double delta) {
  if (n < 2) throw InvalidArgument("n must be >= 2");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be > 0");
  return std::make_shared<NonCollidingBesqModel>(n, delta);
}

}  // namespace inversio::detail
