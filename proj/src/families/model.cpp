#include "inversio/model.hpp"

#include <cmath>

#include "inversio/characteristics.hpp"
#include "inversio/errors.hpp"

namespace inversio {

double ProcessModel::rho(std::span<const double>) const {
  throw Unsupported(name() + " has no t.i.p. function rho");
}

double ProcessModel::radial(std::span<const double> x) const { return std::sqrt(rho(x)); }

void ProcessModel::scale_to_radial(std::span<const double> x, double r, std::span<double> out) const {
  const auto t = tip();
  if (!t) throw Unsupported(name() + " has no radial scaling");
  // radial(lambda x) = lambda^(1/alpha) radial(x).
  const double lambda = std::pow(r / radial(x), t->alpha);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = lambda * x[i];
}

bool ProcessModel::absorbed(std::span<const double> x) const {
  if (!in_domain(x)) return true;
  return tip() && rho(x) < kAbsorptionEpsilon;
}

std::unique_ptr<Stepper> ProcessModel::make_stepper() const {
  throw Unsupported(name() + " has no path sampler");
}

double ProcessModel::clock_scale(std::span<const double> x) const { return std::sqrt(v(x)); }

double ProcessModel::log_density(double, std::span<const double>, std::span<const double>) const {
  throw Unsupported(name() + " has no closed-form transition density");
}

double ProcessModel::log_theta(std::span<const double>) const {
  throw Unsupported(name() + " has no duality density theta");
}

void ProcessModel::drift(std::span<const double>, std::span<double>) const {
  throw Unsupported(name() + " has no diffusion generator");
}

void ProcessModel::diffusion(std::span<const double>, std::span<double>) const {
  throw Unsupported(name() + " has no diffusion generator");
}

void ProcessModel::disperse(std::span<const double>, std::span<const double>, std::span<double>) const {
  throw Unsupported(name() + " has no diffusion generator");
}

EulerStepper::EulerStepper(std::shared_ptr<const ProcessModel> model, VectorField extra_drift,
                           bool substep, bool kill_on_exit)
    : model_(std::move(model)), extra_drift_(std::move(extra_drift)), substep_(substep), kill_on_exit_(kill_on_exit) {
  const std::size_t n = model_->dim();
  drift_.resize(n);
  extra_.resize(n);
  kick_.resize(n);
  noise_.resize(model_->noise_dim());
}

void EulerStepper::reset(std::span<const double>, RngStream&) {}

bool EulerStepper::advance(double dt, RngStream& rng, std::span<double> x) {
  const std::size_t n = x.size();
  double remaining = dt;
  while (remaining > 0.0) {
    double h = remaining;
    if (substep_) {
      const double cap = model_->euler_relative_step() * model_->clock_scale(x);
      if (cap < h) h = cap;
      if (!(h > 0.0) || !std::isfinite(h)) return false;
      // Avoid a sliver of a final substep.
      if (remaining - h < 0.25 * h) h = remaining;
    }
    model_->drift(x, drift_);
    if (extra_drift_) {
      extra_drift_(x, extra_);
      for (std::size_t i = 0; i < n; ++i) drift_[i] += extra_[i];
    }
    rng.normals(noise_);
    model_->disperse(x, noise_, kick_);
    const double root = std::sqrt(h);
    for (std::size_t i = 0; i < n; ++i) x[i] += drift_[i] * h + kick_[i] * root;
    if (kill_on_exit_ && !model_->in_domain(x)) return false;
    model_->project(x);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(x[i])) return false;
    }
    if (model_->absorbed(x)) return false;
    remaining -= h;
  }
  return true;
}

Characteristics::Characteristics(std::shared_ptr<const ProcessModel> model) : model_(std::move(model)) {
  if (!model_) throw InvalidArgument("null process model");
}

std::optional<double> Characteristics::alpha() const {
  if (auto t = model_->tip()) return t->alpha;
  return std::nullopt;
}

std::optional<double> Characteristics::beta() const {
  if (auto t = model_->tip()) return t->beta;
  return std::nullopt;
}

State Characteristics::make_state(std::vector<double> data) const {
  if (data.size() != model_->dim()) {
    throw InvalidArgument(name() + " states have " + std::to_string(model_->dim()) + " entries, got " +
                          std::to_string(data.size()));
  }
  if (model_->kind() == StateKind::SymMatrix) return State::sym_matrix(model_->order(), std::move(data));
  return State::vector(std::move(data));
}

bool Characteristics::in_domain(const State& s) const {
  return !s.is_cemetery() && s.size() == model_->dim() && model_->in_domain(s.data());
}

double Characteristics::rho(const State& s) const { return s.is_cemetery() ? 0.0 : model_->rho(s.data()); }

State Characteristics::involution(const State& s) const {
  if (s.is_cemetery()) return s;
  std::vector<double> out(s.size());
  model_->involution(s.data(), out);
  return State::like(s, out);
}

double Characteristics::excessive_h(const State& s) const {
  return s.is_cemetery() ? 0.0 : model_->h(s.data());
}

double Characteristics::speed_v(const State& s) const { return s.is_cemetery() ? 0.0 : model_->v(s.data()); }

double Characteristics::jacobian_I(const State& s) const {
  return s.is_cemetery() ? 0.0 : model_->jacobian(s.data());
}

ScalarField Characteristics::h_field() const {
  auto m = model_;
  return [m](std::span<const double> x) { return m->h(x); };
}

ScalarField Characteristics::v_field() const {
  auto m = model_;
  return [m](std::span<const double> x) { return m->v(x); };
}

double Characteristics::density(double t, const State& x, const State& y) const {
  if (x.is_cemetery() || y.is_cemetery()) return 0.0;
  if (!(t > 0.0)) throw InvalidArgument("density needs t > 0");
  return std::exp(model_->log_density(t, x.data(), y.data()));
}

double Characteristics::theta(const State& y) const { return std::exp(model_->log_theta(y.data())); }

double FamilyParams::scalar(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("missing parameter '" + key + "'");
  if (it->second.size() != 1) throw InvalidArgument("parameter '" + key + "' must be a single number");
  return it->second.front();
}

double FamilyParams::scalar_or(const std::string& key, double fallback) const {
  return has(key) ? scalar(key) : fallback;
}

const std::vector<double>& FamilyParams::list(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidArgument("missing parameter '" + key + "'");
  return it->second;
}

}  // namespace inversio
