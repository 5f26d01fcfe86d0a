#include <cmath>
#include <numeric>

#include "common.hpp"
#include "inversio/errors.hpp"
#include "inversio/samplers.hpp"
#include "inversio/special.hpp"

namespace inversio::detail {

namespace {

double power(double x, double p) {
  if (p == 1.0) return x;
  if (p == 2.0) return x * x;
  if (p == 0.5) return std::sqrt(x);
  return std::pow(x, p);
}

// Coordinatewise exact BESQ transitions of the squared Bessel components
// R_i^2 = x_i^(2/alpha), run at speed sigma_i^2.
class PowerBesselStepper : public Stepper {
 public:
  PowerBesselStepper(std::vector<double> delta, std::vector<double> speed, double alpha)
      : delta_(std::move(delta)), speed_(std::move(speed)), alpha_(alpha) {}

  void reset(std::span<const double>, RngStream&) override {}

  bool advance(double dt, RngStream& rng, std::span<double> x) override {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r2 = power(x[i], 2.0 / alpha_);
      const double next = sample_besq_exact(delta_[i], r2, speed_[i] * dt, rng);
      x[i] = power(next, 0.5 * alpha_);
      if (!std::isfinite(x[i])) return false;
    }
    return true;
  }

 private:
  std::vector<double> delta_, speed_;
  double alpha_;
};

class FspbesModel : public ProcessModel {
 public:
  FspbesModel(std::vector<double> nu, std::vector<double> sigma, double alpha, std::string id)
      : nu_(std::move(nu)), sigma_(std::move(sigma)), alpha_(alpha), id_(std::move(id)) {
    n_ = nu_.size();
    const double nu_sum = std::accumulate(nu_.begin(), nu_.end(), 0.0);
    beta_ = 2.0 * (static_cast<double>(n_) + nu_sum) / alpha_ - static_cast<double>(n_);
    dimension_ = (beta_ + static_cast<double>(n_)) * alpha_;
    for (std::size_t i = 0; i < n_; ++i) {
      delta_.push_back(2.0 * nu_[i] + 2.0);
      speed_.push_back(sigma_[i] * sigma_[i]);
    }
  }

  std::string id() const override { return id_; }
  std::string name() const override {
    if (id_ == "bes") return "bes(nu=" + format_number(nu_[0]) + ")";
    if (id_ == "besq") return "besq(delta=" + format_number(delta_[0]) + ")";
    return "fspbes(nu=" + format_list(nu_) + ", sigma=" + format_list(sigma_) +
           ", alpha=" + format_number(alpha_) + ")";
  }
  std::size_t dim() const override { return n_; }
  std::optional<TipData> tip() const override { return TipData{alpha_, beta_}; }

  double rho(std::span<const double> x) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += power(x[i], 2.0 / alpha_) / speed_[i];
    return s;
  }

  void involution(std::span<const double> x, std::span<double> out) const override {
    scale_into(x, power(rho(x), -alpha_), out);
  }
  double h(std::span<const double> x) const override { return power(rho(x), 1.0 - 0.5 * dimension_); }
  double v(std::span<const double> x) const override {
    const double r = rho(x);
    return r * r;
  }
  double jacobian(std::span<const double> x) const override {
    return std::pow(rho(x), -static_cast<double>(n_) * alpha_);
  }

  bool in_domain(std::span<const double> x) const override {
    if (x.size() != n_ || !all_finite(x)) return false;
    for (double xi : x) {
      if (alpha_ > 0.0 ? xi < 0.0 : xi <= 0.0) return false;
    }
    const double r = rho(x);
    return r > 0.0 && std::isfinite(r);
  }

  bool transient() const override { return dimension_ > 2.0; }
  std::vector<std::string> flags() const override {
    if (!transient()) return {"non-transient"};
    return {};
  }

  SamplerKind sampler_kind() const override { return SamplerKind::Exact; }
  std::unique_ptr<Stepper> make_stepper() const override {
    return std::make_unique<PowerBesselStepper>(delta_, speed_, alpha_);
  }

  bool has_density() const override { return true; }
  double log_density(double t, std::span<const double> x, std::span<const double> y) const override {
    double s = 0.0;
    const double inv = 1.0 / alpha_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!(y[i] > 0.0)) return -INFINITY;
      const double a = power(x[i], inv);
      const double b = power(y[i], inv);
      const double tt = speed_[i] * t;
      // Bessel density of the root process in b, times |db/dy|.
      double lq;
      if (a == 0.0) {
        lq = std::log(2.0) + (2.0 * nu_[i] + 1.0) * std::log(b) - (nu_[i] + 1.0) * std::log(2.0 * tt) -
             std::lgamma(nu_[i] + 1.0) - b * b / (2.0 * tt);
      } else {
        lq = std::log(b / tt) + nu_[i] * std::log(b / a) - (a * a + b * b) / (2.0 * tt) +
             log_bessel_i(nu_[i], a * b / tt);
      }
      s += lq - std::log(std::abs(alpha_)) + (inv - 1.0) * std::log(y[i]);
    }
    return s;
  }

  bool has_theta() const override { return true; }
  double log_theta(std::span<const double> y) const override {
    double s = -static_cast<double>(n_) * std::log(std::abs(alpha_));
    for (std::size_t i = 0; i < n_; ++i) {
      const double ls = std::log(std::abs(sigma_[i]));
      s -= alpha_ * ls;
      s += (2.0 * (1.0 + nu_[i]) / alpha_ - 1.0) * (std::log(y[i]) - alpha_ * ls);
    }
    return s;
  }

  bool has_generator() const override { return true; }
  void drift(std::span<const double> x, std::span<double> out) const override {
    for (std::size_t i = 0; i < n_; ++i) {
      out[i] = speed_[i] * alpha_ * (delta_[i] + alpha_ - 2.0) * 0.5 * power(x[i], 1.0 - 2.0 / alpha_);
    }
  }
  void diffusion(std::span<const double> x, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      out[i * n_ + i] = alpha_ * alpha_ * speed_[i] * power(x[i], 2.0 - 2.0 / alpha_);
    }
  }
  void disperse(std::span<const double> x, std::span<const double> noise, std::span<double> out) const override {
    for (std::size_t i = 0; i < n_; ++i) {
      out[i] = alpha_ * sigma_[i] * power(std::max(x[i], 0.0), 1.0 - 1.0 / alpha_) * noise[i];
    }
  }
  void project(std::span<double> x) const override {
    for (double& xi : x) xi = std::abs(xi);
  }

 private:
  std::vector<double> nu_, sigma_, delta_, speed_;
  double alpha_;
  std::string id_;
  std::size_t n_ = 0;
  double beta_ = 0.0;
  double dimension_ = 0.0;
};

class FreeBesqModel : public ProcessModel {
 public:
  FreeBesqModel(std::size_t n, double delta) : n_(n), delta_(delta) {}

  std::string id() const override { return "free-besq"; }
  std::string name() const override {
    return "free-besq(n=" + std::to_string(n_) + ", delta=" + format_number(delta_) + ")";
  }
  std::size_t dim() const override { return n_; }
  std::optional<TipData> tip() const override {
    return TipData{2.0, static_cast<double>(n_) * (0.5 * delta_ - 1.0)};
  }
  double rho(std::span<const double> x) const override { return sum(x); }
  void involution(std::span<const double> x, std::span<double> out) const override {
    const double s = sum(x);
    scale_into(x, 1.0 / (s * s), out);
  }
  double h(std::span<const double> x) const override {
    return std::pow(sum(x), 1.0 - 0.5 * static_cast<double>(n_) * delta_);
  }
  double v(std::span<const double> x) const override {
    const double s = sum(x);
    return s * s;
  }
  double jacobian(std::span<const double> x) const override {
    return std::pow(sum(x), -2.0 * static_cast<double>(n_));
  }
  bool in_domain(std::span<const double> x) const override {
    if (x.size() != n_ || !all_finite(x)) return false;
    for (double xi : x) {
      if (xi < 0.0) return false;
    }
    return sum(x) > 0.0;
  }
  bool transient() const override { return static_cast<double>(n_) * delta_ > 2.0; }
  std::vector<std::string> flags() const override {
    if (!transient()) return {"non-transient"};
    return {};
  }

  SamplerKind sampler_kind() const override { return SamplerKind::Exact; }
  std::unique_ptr<Stepper> make_stepper() const override {
    return std::make_unique<PowerBesselStepper>(std::vector<double>(n_, delta_), std::vector<double>(n_, 1.0),
                                                2.0);
  }

  bool has_density() const override { return true; }
  double log_density(double t, std::span<const double> x, std::span<const double> y) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += besq_log_density(delta_, t, x[i], y[i]);
    return s;
  }
  bool has_theta() const override { return true; }
  double log_theta(std::span<const double> y) const override {
    double s = 0.0;
    for (double yi : y) s += (0.5 * delta_ - 1.0) * std::log(yi);
    return s;
  }

  bool has_generator() const override { return true; }
  void drift(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), delta_);
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
  }

 private:
  std::size_t n_;
  double delta_;
};

}  // namespace

double besq_log_density(double delta, double t, double x, double y) {
  if (!(y > 0.0)) return -INFINITY;
  const double nu = 0.5 * delta - 1.0;
  if (x == 0.0) {
    return (0.5 * delta - 1.0) * std::log(y) - y / (2.0 * t) - 0.5 * delta * std::log(2.0 * t) -
           std::lgamma(0.5 * delta);
  }
  return -std::log(2.0 * t) + 0.5 * nu * std::log(y / x) - (x + y) / (2.0 * t) +
         log_bessel_i(nu, std::sqrt(x * y) / t);
}

std::shared_ptr<const ProcessModel> make_fspbes(std::vector<double> nu, std::vector<double> sigma,
                                                double alpha, std::string id) {
  if (nu.empty()) throw InvalidArgument("nu must have at least one entry");
  if (sigma.empty()) sigma.assign(nu.size(), 1.0);
  if (sigma.size() != nu.size()) throw InvalidArgument("sigma must have as many entries as nu");
  for (double v : nu) {
    if (!(v > -1.0) || !std::isfinite(v)) throw InvalidArgument("nu entries must be > -1");
  }
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("sigma entries must be > 0");
  }
  if (!(alpha != 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be nonzero");
  return std::make_shared<FspbesModel>(std::move(nu), std::move(sigma), alpha, std::move(id));
}

std::shared_ptr<const ProcessModel> make_free_besq(std::size_t n, double delta) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be > 0");
  return std::make_shared<FreeBesqModel>(n, delta);
}

}  // namespace inversio::detail
