#include "inversio/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "inversio/errors.hpp"

namespace inversio {

AdditiveFunctional additive_functional(const Path& path, const ScalarField& v, Quadrature rule) {
  AdditiveFunctional a;
  const auto t = path.times();
  a.times.assign(t.begin(), t.end());
  a.values.assign(t.size(), 0.0);
  a.live_points = path.live_size();
  a.survives = !path.closed();
  if (a.live_points == 0) return a;
  auto inverse_speed = [&](std::size_t k) {
    const double s = v(path.row(k));
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw NumericalDomainError("speed function is not positive at t = " + std::to_string(t[k]));
    }
    return 1.0 / s;
  };
  double prev = inverse_speed(0);
  for (std::size_t k = 1; k < a.live_points; ++k) {
    const double next = inverse_speed(k);
    const double dt = t[k] - t[k - 1];
    a.values[k] = a.values[k - 1] + (rule == Quadrature::Trapezoid ? 0.5 * dt * (prev + next) : dt * prev);
    prev = next;
  }
  a.final_value = a.values[a.live_points - 1];
  for (std::size_t k = a.live_points; k < t.size(); ++k) a.values[k] = a.final_value;
  return a;
}

std::optional<double> invert_time_change(const AdditiveFunctional& a, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("time-change inversion needs t >= 0");
  if (a.live_points == 0 || t > a.final_value) return std::nullopt;
  const auto begin = a.values.begin();
  const auto end = begin + static_cast<std::ptrdiff_t>(a.live_points);
  const auto it = std::upper_bound(begin, end, t);
  const auto k = static_cast<std::size_t>(it - begin) - 1;
  if (k + 1 >= a.live_points || a.values[k] == t) return a.times[k];
  const double span = a.values[k + 1] - a.values[k];
  return a.times[k] + (t - a.values[k]) / span * (a.times[k + 1] - a.times[k]);
}

void interpolate_path(const Path& path, double s, Interpolation mode, std::span<double> out) {
  const std::size_t live = path.live_size();
  const auto t = path.times().first(live);
  const auto it = std::upper_bound(t.begin(), t.end(), s);
  const std::size_t k = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
  const auto a = path.row(k);
  if (mode == Interpolation::Previous || k + 1 >= live || s <= t[k]) {
    std::copy(a.begin(), a.end(), out.begin());
    return;
  }
  const auto b = path.row(k + 1);
  const double theta = (s - t[k]) / (t[k + 1] - t[k]);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + theta * (b[i] - a[i]);
}

Path involute_path(const Path& path, const Characteristics& family, const ScalarField& v,
                   const TimeGrid& out_grid) {
  const ProcessModel& m = family.model();
  const Interpolation mode = m.interpolation();
  const AdditiveFunctional a =
      additive_functional(path, v, mode == Interpolation::Previous ? Quadrature::LeftPoint : Quadrature::Trapezoid);
  Path out(path.kind(), path.order(), path.dim());
  out.reserve(out_grid.size());
  std::vector<double> x(path.dim()), y(path.dim());
  const auto s = out_grid.times();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto gamma = invert_time_change(a, s[k]);
    if (!gamma) {
      if (k == 0) throw InvalidArgument("involuted path is dead at time 0");
      out.kill(s[k], path.closed() ? path.exit_cause() : ExitCause::Infinity);
      out.set_grid_tail(s.subspan(k + 1));
      break;
    }
    interpolate_path(path, *gamma, mode, x);
    m.involution(x, y);
    out.push(s[k], y);
  }
  return out;
}

Path involute_path(const Path& path, const Characteristics& family, const TimeGrid& out_grid) {
  return involute_path(path, family, family.v_field(), out_grid);
}

double h_weight(const Path& path, const ScalarField& h, double t, Interpolation mode) {
  const double h0 = h(path.row(0));
  if (!(h0 > 0.0) || !std::isfinite(h0)) throw InvalidArgument("h(X_0) must lie in (0, inf)");
  if (t >= path.lifetime()) return 0.0;
  if (t > path.times().back()) throw InvalidArgument("h_weight time beyond the path grid");
  std::vector<double> x(path.dim());
  interpolate_path(path, t, mode, x);
  const double value = h(x);
  if (!(value >= 0.0) || !std::isfinite(value)) return 0.0;
  return value / h0;
}

namespace {

// Central-difference gradient of log h, shrinking the step near the boundary
// and falling back to a one-sided difference.
void grad_log(const ScalarField& h, std::span<const double> x, std::span<double> out) {
  double norm = 0.0;
  for (double v : x) norm += v * v;
  const double base = 1e-5 * (1.0 + std::sqrt(norm));
  std::vector<double> p(x.begin(), x.end());
  const double l0 = std::log(h(x));
  for (std::size_t i = 0; i < x.size(); ++i) {
    double eps = base;
    double g = 0.0;
    bool done = false;
    for (int attempt = 0; attempt < 3 && !done; ++attempt, eps *= 0.125) {
      p[i] = x[i] + eps;
      const double up = std::log(h(p));
      p[i] = x[i] - eps;
      const double down = std::log(h(p));
      p[i] = x[i];
      if (std::isfinite(up) && std::isfinite(down)) {
        g = (up - down) / (2.0 * eps);
        done = true;
      } else if (attempt == 2) {
        g = std::isfinite(up) ? (up - l0) / eps : std::isfinite(down) ? (l0 - down) / eps : 0.0;
      }
    }
    out[i] = g;
  }
}

}  // namespace

Path doob_drift_sampler(const Characteristics& family, const ScalarField& h, const State& x0,
                        const TimeGrid& grid, RngStream& rng, const VectorField& grad_log_h) {
  const auto model = family.model_ptr();
  if (!model->has_generator() || model->sampler_kind() == SamplerKind::Jump ||
      model->sampler_kind() == SamplerKind::None) {
    throw Unsupported("Doob drift sampling needs a diffusion family; " + family.name() + " is not one");
  }
  if (!family.in_domain(x0)) throw DomainError("starting state is outside the state space of " + family.name());
  const double h0 = h(x0.data());
  if (!(h0 > 0.0) || !std::isfinite(h0)) throw InvalidArgument("h(x0) must lie in (0, inf)");

  const std::size_t n = model->dim();
  auto extra = [model, h, grad_log_h, n](std::span<const double> x, std::span<double> out) {
    std::vector<double> g(n), a(n * n);
    if (grad_log_h) {
      grad_log_h(x, g);
    } else {
      grad_log(h, x, g);
    }
    model->diffusion(x, a);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * g[j];
      out[i] = s;
    }
  };
  // X^h dies where the scheme leaves the state space; projecting back would
  // turn that exit into a reflection.
  EulerStepper stepper(model, extra, false, true);
  Path path(model->kind(), model->order(), n);
  path.reserve(grid.size());
  std::vector<double> x(x0.data().begin(), x0.data().end());
  path.push(0.0, x);
  const auto t = grid.times();
  for (std::size_t k = 1; k < t.size(); ++k) {
    const bool moved = stepper.advance(t[k] - t[k - 1], rng, x);
    const double hx = moved ? h(x) : 0.0;
    if (!moved || model->absorbed(x) || !(hx > 0.0) || !std::isfinite(hx)) {
      path.kill(t[k], ExitCause::Boundary);
      path.set_grid_tail(t.subspan(k + 1));
      break;
    }
    path.push(t[k], x);
  }
  return path;
}

ScalarField kelvin_conditioning_h(const Characteristics& family, const ScalarField& H) {
  auto model = family.model_ptr();
  return [model, H](std::span<const double> x) {
    std::vector<double> ix(x.size());
    model->involution(x, ix);
    return model->h(x) * H(ix) / H(x);
  };
}

void WeightedSample::add(std::span<const double> x, double w) {
  if (x.size() != dim_) throw InvalidArgument("sample point has the wrong dimension");
  if (!(w >= 0.0)) throw InvalidArgument("sample weights must be >= 0");
  values_.insert(values_.end(), x.begin(), x.end());
  weights_.push_back(w);
}

void WeightedSample::reserve(std::size_t n) {
  values_.reserve(n * dim_);
  weights_.reserve(n);
}

void WeightedSample::merge(const WeightedSample& other) {
  if (other.dim_ != dim_) throw InvalidArgument("cannot merge samples of different dimension");
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
  weights_.insert(weights_.end(), other.weights_.begin(), other.weights_.end());
}

double WeightedSample::total_weight() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

WeightedSample WeightedSample::coordinate(std::size_t k) const {
  WeightedSample out(1);
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const double v = values_[i * dim_ + k];
    out.add({&v, 1}, weights_[i]);
  }
  out.origin = origin;
  return out;
}

WeightedSample WeightedSample::support() const {
  WeightedSample out(dim_);
  for (std::size_t i = 0; i < size(); ++i) {
    if (weights_[i] > 0.0) out.add(row(i), weights_[i]);
  }
  out.origin = origin;
  return out;
}

}  // namespace inversio
