#include <algorithm>
#include <chrono>
#include <cmath>

#include "inversio/cli.hpp"
#include "inversio/errors.hpp"
#include "inversio/kelvin.hpp"
#include "inversio/verify.hpp"

namespace inversio {

namespace {

// Poisson kernel of the hyperbolic ball at the boundary point (0, 0, 1).
double hyperbolic_poisson(std::span<const double> x) {
  const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  const double d2 = x[0] * x[0] + x[1] * x[1] + (x[2] - 1.0) * (x[2] - 1.0);
  const double p = (1.0 - r2) / d2;
  return p * p;
}

ScalarField test_function(const std::string& name, const Characteristics& family) {
  const std::size_t n = family.n();
  if (name.empty() || name == "one") return [](std::span<const double>) { return 1.0; };
  if (name == "h") return family.h_field();
  if (name == "kelvin-one") return kelvin_transform(family, [](std::span<const double>) { return 1.0; });
  if (name == "kelvin-h") return kelvin_transform(family, family.h_field());
  if (name == "linear") return [](std::span<const double> x) { return x[0]; };
  if (name == "product" || name == "saddle") {
    if (n < 2) throw ConfigError("function", name + " needs at least two coordinates");
    if (name == "product") return [](std::span<const double> x) { return x[0] * x[1]; };
    return [](std::span<const double> x) { return x[0] * x[0] - x[1] * x[1]; };
  }
  if (name == "poisson") {
    if (n != 3) throw ConfigError("function", "poisson needs a three-dimensional state");
    return hyperbolic_poisson;
  }
  throw ConfigError("function", "unknown test function '" + name + "'");
}

std::string function_label(const std::string& name) { return name.empty() ? "one" : name; }

double first_time(const ExperimentConfig& c) { return c.times.empty() ? c.t_end : c.times.front(); }

Bijection choose_bijection(const Characteristics& a, const Characteristics& b) {
  if (a.name() == b.name()) return identity_bijection(a.n());
  if (a.id() == "bm" && b.id() == "goe") {
    const std::size_t m = b.model().order();
    if (a.n() == sym_size(m)) return flat_to_symmetric(m);
  }
  if ((a.id() == "bes" || a.id() == "fspbes") && b.id() == "free-besq" && a.alpha() == 1.0)
    return coordinate_squares(a.n());
  throw Unsupported("no bijection from " + a.name() + " to " + b.name());
}

std::vector<TestReport> self_duality(const ExperimentConfig& c, const Characteristics& family) {
  const auto start = std::chrono::steady_clock::now();
  if (!family.has_density() || !family.has_theta())
    throw Unsupported(family.name() + " has no density/theta pair");
  const State x0 = family.make_state(c.x0);
  // Random points of the state space: marginals of the family itself.
  const double times[2] = {0.5, 2.0};
  const auto pts = sample_marginals(family, x0, times, c.points, c.dt, RngStream(c.seed, 8));
  RngStream rng(c.seed, 9);
  double worst = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < c.points; ++i) {
    const double t = 0.05 * std::pow(100.0, rng.uniform());
    if (pts[0].weights()[i] <= 0.0 || pts[1].weights()[i] <= 0.0) continue;
    const State x = State::like(x0, pts[0].row(i));
    const State y = State::like(x0, pts[1].row(i));
    worst = std::max(worst, self_duality_residual(family, t, x, y));
    ++used;
  }
  TestReport r;
  r.name = "self-duality/" + family.name();
  r.kind = ReportKind::Residual;
  r.statistic = static_cast<double>(used);
  r.value = worst;
  r.threshold = c.threshold.value_or(1e-10);
  r.n = used;
  r.dt = c.dt;
  r.seed = c.seed;
  r.decide();
  r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {r};
}

}  // namespace

std::vector<TestReport> run_experiment(const ExperimentConfig& c) {
  const Characteristics family = get_family(c.family, c.params);
  const State x0 = family.make_state(c.x0);

  if (c.test == "ip") {
    IpOptions o;
    o.permutations = c.permutations;
    o.threshold = c.threshold.value_or(0.01);
    if (c.h_power != 1.0) {
      auto h = family.h_field();
      const double p = c.h_power;
      o.h_override = [h, p](std::span<const double> x) { return std::pow(h(x), p); };
      o.label = "ip/" + family.name() + "/h^" + std::to_string(p).substr(0, 6);
    }
    return verify_ip(family, x0, c.times, c.N, c.dt, c.seed, o);
  }
  if (c.test == "excessive") {
    ExcessiveOptions o;
    o.threshold = c.threshold.value_or(0.01);
    o.label = "excessive/" + family.name() + "/" + function_label(c.function);
    if (c.function == "identity") {
      return {verify_excessive(family, [](std::span<const double> x) { return x[0]; }, x0, c.times, c.N, c.dt,
                               c.seed, o)};
    }
    return {verify_excessive(family, test_function(c.function.empty() ? "h" : c.function, family), x0, c.times,
                             c.N, c.dt, c.seed, o)};
  }
  if (c.test == "kelvin-exit") {
    const double a = c.annulus[0];
    const double b = c.annulus[1];
    ScalarField f;
    if (c.function == "outer") {
      const auto model = family.model_ptr();
      const double mid = a > 0.0 ? std::sqrt(a * b) : 0.5 * b;
      f = [model, mid](std::span<const double> x) { return model->radial(x) > mid ? 1.0 : 0.0; };
    } else {
      f = test_function(c.function, family);
    }
    auto r = exit_identity_check(family, f, x0, RegionSpec::annulus(a, b), TimeGrid::uniform(c.t_end, c.dt),
                                 RngStream(c.seed, 10), c.N);
    r.name += "/" + function_label(c.function);
    return {r};
  }
  if (c.test == "generator") {
    const auto start = std::chrono::steady_clock::now();
    const ScalarField kf = kelvin_transform(family, test_function(c.function, family));
    TestReport r;
    r.name = "generator/" + family.name() + "/" + function_label(c.function);
    r.kind = ReportKind::Residual;
    r.value = std::abs(generator_residual(family, kf, x0));
    r.statistic = r.value;
    r.threshold = c.threshold.value_or(c.expect == "defect" ? 1e-2 : 1e-6);
    r.n = 1;
    r.seed = c.seed;
    r.decide();
    if (c.expect == "defect") r.pass = r.value >= r.threshold;
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {r};
  }
  if (c.test == "potential") {
    const auto start = std::chrono::steady_clock::now();
    const State y = family.make_state(c.y);
    TestReport r;
    r.name = "potential/" + family.name();
    r.kind = ReportKind::Residual;
    r.statistic = potential_kernel(family, x0, y).value;
    r.value = potential_relation_residual(family, x0, y);
    r.threshold = c.threshold.value_or(0.02);
    r.n = 1;
    r.seed = c.seed;
    r.decide();
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {r};
  }
  if (c.test == "radial-bessel") {
    ShapeOptions o;
    o.permutations = c.permutations;
    o.threshold = c.threshold.value_or(0.01);
    return {verify_radial_bessel(family, x0, first_time(c), c.N, c.dt, c.seed, o)};
  }
  if (c.test == "conjugation") {
    const Characteristics target = get_family(c.target, c.target_params);
    ConjugationOptions o;
    o.permutations = c.permutations;
    o.threshold = c.threshold.value_or(0.01);
    return {verify_conjugation(family, target, choose_bijection(family, target), x0, first_time(c), c.N, c.seed, o)};
  }
  if (c.test == "self-duality") return self_duality(c, family);
  throw ConfigError("test", "unknown test kind '" + c.test + "'");
}

}  // namespace inversio
