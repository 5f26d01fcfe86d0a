#include "inversio/kelvin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "inversio/errors.hpp"

namespace inversio {

ScalarField kelvin_transform(const Characteristics& family, ScalarField f) {
  auto model = family.model_ptr();
  return [model, f = std::move(f)](std::span<const double> x) {
    const double h = model->h(x);
    if (h == 0.0) return 0.0;
    std::vector<double> ix(x.size());
    model->involution(x, ix);
    return h * f(ix);
  };
}

WeightedSample dual_kelvin(const WeightedSample& mu, const Characteristics& family) {
  const ProcessModel& m = family.model();
  WeightedSample out(mu.dim());
  out.reserve(mu.size());
  out.origin = mu.origin;
  std::vector<double> y(mu.dim());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto x = mu.row(i);
    const double w = mu.weights()[i];
    if (w == 0.0) {
      out.add(x, 0.0);
      continue;
    }
    m.involution(x, y);
    out.add(y, w * m.h(x));
  }
  return out;
}

namespace {

// Generator at x with finite-difference step e.
double generator_at(const ProcessModel& m, const ScalarField& f, std::span<const double> x, double e) {
  const std::size_t n = x.size();
  std::vector<double> p(x.begin(), x.end());
  auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
    p[i] += di;
    p[j] += dj;
    const double value = f(p);
    p[i] -= di;
    p[j] -= dj;
    return value;
  };
  const double f0 = f(x);
  std::vector<double> grad(n), hess(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double up = at(i, e, i, 0.0);
    const double down = at(i, -e, i, 0.0);
    grad[i] = (up - down) / (2.0 * e);
    hess[i * n + i] = (up - 2.0 * f0 + down) / (e * e);
    for (std::size_t j = 0; j < i; ++j) {
      const double mixed = (at(i, e, j, e) - at(i, e, j, -e) - at(i, -e, j, e) + at(i, -e, j, -e)) / (4.0 * e * e);
      hess[i * n + j] = mixed;
      hess[j * n + i] = mixed;
    }
  }
  std::vector<double> b(n), a(n * n);
  m.drift(x, b);
  m.diffusion(x, a);
  double out = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out += b[i] * grad[i];
    for (std::size_t j = 0; j < n; ++j) out += 0.5 * a[i * n + j] * hess[i * n + j];
  }
  return out;
}

}  // namespace

double generator_residual(const Characteristics& family, const ScalarField& f, const State& x, double step) {
  const ProcessModel& m = family.model();
  if (!m.has_generator()) throw Unsupported(family.name() + " has no local generator");
  if (x.size() != m.dim()) throw InvalidArgument("state has the wrong dimension");
  if (!m.in_domain(x.data())) throw DomainError("state is outside the domain");
  double norm = 0.0;
  for (double c : x.data()) norm += c * c;
  const double e = step > 0.0 ? step : 1e-4 * (1.0 + std::sqrt(norm));
  const double coarse = generator_at(m, f, x.data(), e);
  const double fine = generator_at(m, f, x.data(), 0.5 * e);
  return (4.0 * fine - coarse) / 3.0;
}

RegionSpec RegionSpec::annulus(double a, double b) {
  if (!(a >= 0.0) || !(a < b)) throw InvalidArgument("annulus needs 0 <= a < b");
  RegionSpec r;
  r.kind_ = RegionKind::RadialAnnulus;
  r.a_ = a;
  r.b_ = b;
  return r;
}

RegionSpec RegionSpec::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.size() != upper.size() || lower.empty()) throw InvalidArgument("box bounds must have equal, nonzero size");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i])) throw InvalidArgument("box needs lower < upper");
  RegionSpec r;
  r.kind_ = RegionKind::Box;
  r.lower_ = std::move(lower);
  r.upper_ = std::move(upper);
  return r;
}

RegionSpec RegionSpec::half_order(bool positive) {
  RegionSpec r;
  r.kind_ = RegionKind::HalfOrder;
  r.positive_ = positive;
  return r;
}

bool RegionSpec::contains(const ProcessModel& model, std::span<const double> x) const {
  switch (kind_) {
    case RegionKind::RadialAnnulus: {
      if (!model.in_domain(x)) return false;
      const double r = model.radial(x);
      return r > a_ && r < b_;
    }
    case RegionKind::Box:
      if (x.size() != lower_.size()) throw InvalidArgument("box and state dimensions differ");
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] > lower_[i] && x[i] < upper_[i])) return false;
      return true;
    case RegionKind::HalfOrder:
      if (positive_ && !(x[0] > 0.0)) return false;
      for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) return false;
      return true;
    case RegionKind::Involuted: {
      if (!model.in_domain(x)) return false;
      std::vector<double> ix(x.size());
      model.involution(x, ix);
      return base_->contains(model, ix);
    }
  }
  return false;
}

RegionSpec RegionSpec::involuted(const ProcessModel& model) const {
  switch (kind_) {
    case RegionKind::RadialAnnulus: {
      const double ia = a_ > 0.0 ? model.radial_involution(a_) : std::numeric_limits<double>::infinity();
      const double ib = model.radial_involution(b_);
      return annulus(std::min(ia, ib), std::max(ia, ib));
    }
    case RegionKind::HalfOrder:
      // I(x) = x rho(x)^(-alpha) preserves order and signs.
      return *this;
    case RegionKind::Involuted:
      return *base_;
    case RegionKind::Box:
      break;
  }
  RegionSpec r;
  r.kind_ = RegionKind::Involuted;
  r.base_ = std::make_shared<const RegionSpec>(*this);
  return r;
}

}  // namespace inversio
