#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "inversio/errors.hpp"
#include "inversio/stats.hpp"
#include "inversio/transforms.hpp"
#include "inversio/verify.hpp"
#include "oracles.hpp"

using namespace inversio;

namespace {

Path constant_path(std::vector<double> x, const TimeGrid& grid) {
  Path p(StateKind::Vector, x.size(), x.size());
  for (double t : grid.times()) p.push(t, x);
  return p;
}

ScalarField constant_field(double c) {
  return [c](std::span<const double>) { return c; };
}

Path bes3_path(double x0, double t_end, double dt, std::uint64_t seed) {
  const auto bes3 = get_family("bes", {{"nu", {0.5}}});
  RngStream rng(seed, 0);
  return sample_path(bes3, bes3.make_state({x0}), make_grid(t_end, dt), rng);
}

// Value of the piecewise-linear interpolant of A at time s.
double a_at(const AdditiveFunctional& a, double s) {
  const auto it = std::upper_bound(a.times.begin(), a.times.end(), s);
  const auto k = static_cast<std::size_t>(it - a.times.begin()) - 1;
  if (k + 1 >= a.times.size()) return a.values[k];
  const double th = (s - a.times[k]) / (a.times[k + 1] - a.times[k]);
  return a.values[k] + th * (a.values[k + 1] - a.values[k]);
}

}  // namespace

TEST_CASE("additive functional examples") {
  const TimeGrid grid = make_grid(2.0, 0.25);
  const Path p = constant_path({0.7}, grid);
  const auto one = additive_functional(p, constant_field(1.0));
  const auto three = additive_functional(p, constant_field(3.0));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(one.values[k] == doctest::Approx(grid[k]).epsilon(1e-15));
    CHECK(three.values[k] == doctest::Approx(grid[k] / 3.0).epsilon(1e-15));
  }
  CHECK(one.survives);
  CHECK_THROWS_AS(additive_functional(p, constant_field(0.0)), NumericalDomainError);
  CHECK_THROWS_AS(additive_functional(p, constant_field(-1.0)), NumericalDomainError);

  // Frozen after the lifetime.
  Path killed(StateKind::Vector, 1, 1);
  const double x[1] = {1.0};
  killed.push(0.0, x);
  killed.push(0.5, x);
  killed.kill(1.0, ExitCause::Origin);
  const double rest[2] = {1.5, 2.0};
  killed.set_grid_tail(rest);
  const auto a = additive_functional(killed, constant_field(1.0));
  CHECK(!a.survives);
  CHECK(a.final_value == 0.5);
  for (std::size_t k = 1; k < a.values.size(); ++k) CHECK(a.values[k] >= a.values[k - 1]);
  CHECK(a.values.back() == 0.5);
}

TEST_CASE("additive functional of a BES(3) path: dt = 1e-3 against dt = 1e-5") {
  const Path fine = bes3_path(1.0, 1.0, 1e-5, 31);
  REQUIRE(fine.live_size() == fine.size());
  Path coarse(StateKind::Vector, 1, 1);
  for (std::size_t k = 0; k < fine.size(); k += 100) coarse.push(fine.time(k), fine.row(k));
  auto v = [](std::span<const double> x) { return std::pow(x[0], 4.0); };
  const double reference = additive_functional(fine, v).final_value;
  const double estimate = additive_functional(coarse, v).final_value;
  CHECK(std::abs(estimate - reference) / reference < 0.005);
}

TEST_CASE("time change inversion") {
  const TimeGrid grid = make_grid(3.0, 0.1);
  const Path p = constant_path({1.0}, grid);
  const auto one = additive_functional(p, constant_field(1.0));
  const auto two = additive_functional(p, constant_field(2.0));
  for (double t : {0.0, 0.35, 1.0, 2.9}) CHECK(*invert_time_change(one, t) == doctest::Approx(t).epsilon(1e-14));
  CHECK(*invert_time_change(two, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_FALSE(invert_time_change(two, 1.6).has_value());
  CHECK_THROWS_AS(invert_time_change(one, -0.1), InvalidArgument);

  const Path x = bes3_path(0.8, 2.0, 1e-3, 32);
  auto v = [](std::span<const double> y) { return y[0] * y[0] * y[0] * y[0]; };
  const auto a = additive_functional(x, v);
  for (std::size_t k = 0; k < a.live_points; k += 97) CHECK(*invert_time_change(a, a.values[k]) == a.times[k]);
  std::mt19937_64 g(33);
  std::uniform_real_distribution<double> u(0.0, a.final_value);
  double prev_s = -1.0, prev_gamma = -1.0;
  std::vector<double> s(100);
  for (auto& si : s) si = u(g);
  std::sort(s.begin(), s.end());
  for (double si : s) {
    const double gamma = *invert_time_change(a, si);
    CHECK(std::abs(a_at(a, gamma) - si) < 1e-12 * std::max(1.0, si));
    if (si > prev_s) CHECK(gamma > prev_gamma);
    prev_s = si;
    prev_gamma = gamma;
  }
}

TEST_CASE("involute_path examples") {
  const auto bm = get_family("bm", {{"n", {3}}});
  const TimeGrid grid = make_grid(1.0, 0.01);
  const Path flat = constant_path({2.0, 0.0, 0.0}, grid);
  // v = |x|^4 = 16, so A_inf over [0, 1] is 1/16.
  const Path y = involute_path(flat, bm, make_grid(0.1, 0.005));
  CHECK(y.live_size() > 0);
  for (std::size_t k = 0; k < y.live_size(); ++k) {
    CHECK(y.row(k)[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(y.time(k) <= 1.0 / 16.0 + 1e-12);
  }
  CHECK(y.closed());

  RngStream rng(34, 0);
  const double unit[3] = {0.6, 0.0, 0.8};
  const Path x = sample_path(bm, bm.make_state({unit[0], unit[1], unit[2]}), make_grid(1.0, 1e-3), rng);
  const Path yb = involute_path(x, bm, make_grid(0.05, 1e-3));
  for (std::size_t i = 0; i < 3; ++i) CHECK(yb.row(0)[i] == doctest::Approx(unit[i]).epsilon(1e-15));

  const Path b = bes3_path(2.5, 1.0, 1e-3, 35);
  const Path yb3 = involute_path(b, get_family("bes", {{"nu", {0.5}}}), make_grid(0.01, 1e-4));
  CHECK(yb3.row(0)[0] == doctest::Approx(0.4).epsilon(1e-15));
  for (std::size_t k = 0; k < yb3.live_size(); ++k) CHECK(yb3.row(k)[0] > 0.0);
}

TEST_CASE("h_weight examples") {
  const TimeGrid grid = make_grid(1.0, 0.1);
  const Path p = constant_path({0.3}, grid);
  CHECK(h_weight(p, constant_field(1.0), 0.55) == 1.0);
  CHECK_THROWS_AS(h_weight(p, constant_field(0.0), 0.5), InvalidArgument);

  Path killed(StateKind::Vector, 1, 1);
  const double x[1] = {1.0};
  killed.push(0.0, x);
  killed.kill(0.5, ExitCause::Origin);
  CHECK(h_weight(killed, constant_field(1.0), 0.5) == 0.0);
  CHECK(h_weight(killed, constant_field(1.0), 0.7) == 0.0);

  // BES(3) reweighted by 1/x is |BM| killed at 0: mean weight = P(BM from 1 avoids 0 on [0, 1]).
  const auto bes3 = get_family("bes", {{"nu", {0.5}}});
  const double times[1] = {1.0};
  const auto s = sample_marginals(bes3, bes3.make_state({1.0}), times, 100000, 1e-3, RngStream(36, 0));
  std::vector<double> w;
  for (std::size_t i = 0; i < s[0].size(); ++i) w.push_back(s[0].weights()[i] / s[0].row(i)[0]);
  const auto m = mean_estimate(w);
  const double target = 2.0 * oracle::normal_cdf(1.0) - 1.0;
  CHECK(std::abs(m.mean - target) < 4.0 * m.se);
}

TEST_CASE("doob_drift_sampler with constant h is the plain Euler scheme") {
  const auto w = get_family("wishart", {{"m", {2}}, {"delta", {2.5}}});
  REQUIRE(w.sampler() == SamplerKind::Euler);
  const TimeGrid grid = make_grid(0.5, 1e-3);
  const State x0 = w.make_state({1.0, 0.2, 0.8});
  RngStream a(37, 0), b(37, 0);
  const Path doob = doob_drift_sampler(w, constant_field(2.5), x0, grid, a);
  EulerStepper plain(w.model_ptr(), {}, false, true);
  std::vector<double> x(x0.data().begin(), x0.data().end());
  plain.reset(x, b);
  for (std::size_t k = 1; k < doob.live_size(); ++k) {
    REQUIRE(plain.advance(grid[k] - grid[k - 1], b, x));
    for (std::size_t i = 0; i < 3; ++i) CHECK(doob.row(k)[i] == x[i]);
  }
  CHECK(doob.live_size() == grid.size());

  RngStream c(38, 0);
  CHECK_THROWS_AS(doob_drift_sampler(get_family("stable", {{"alpha", {1.0}}, {"n", {2}}}), constant_field(1.0),
                                     State::vector({1.0, 0.0}), grid, c),
                  Unsupported);
}

TEST_CASE("doob_drift_sampler: BES(3) conditioned by 1/x is BM killed at 0") {
  const auto bes3 = get_family("bes", {{"nu", {0.5}}});
  const TimeGrid grid = make_grid(0.5, 1e-3);
  const RngStream base(39, 0);
  auto h = [](std::span<const double> x) { return 1.0 / x[0]; };
  std::vector<double> ends;
  for (std::size_t i = 0; i < 100000; ++i) {
    RngStream rng = base.substream(i);
    const Path p = doob_drift_sampler(bes3, h, bes3.make_state({2.0}), grid, rng);
    if (p.live_size() == p.size()) ends.push_back(p.row(p.size() - 1)[0]);
  }
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto f = [](double y) { return oracle::killed_bm_density(0.5, 2.0, y); };
  const double mass = GK::integrate(f, 0.0, 20.0, 10, 1e-13);
  auto cdf = [&](double y) { return y <= 0.0 ? 0.0 : GK::integrate(f, 0.0, y, 10, 1e-13) / mass; };
  CHECK(oracle::ks_distance(ends, cdf) < 0.015);
  CHECK(std::abs(static_cast<double>(ends.size()) / 100000.0 - mass) < 0.003);
}

TEST_CASE("doob_drift_sampler: BM conditioned by the Vandermonde product is Dyson") {
  const auto bm = get_family("bm", {{"n", {3}}});
  const auto dyson = get_family("dyson", {{"n", {3}}});
  const std::vector<double> start = {-1.0, 0.2, 1.0};
  auto vandermonde = [](std::span<const double> x) {
    double p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = i + 1; j < x.size(); ++j) p *= x[j] - x[i];
    return p;
  };
  auto grad = [](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      out[i] = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (j != i) out[i] += 1.0 / (x[i] - x[j]);
    }
  };
  const TimeGrid grid = make_grid(0.5, 1e-4);
  const RngStream base(40, 0);
  WeightedSample doob(3);
  for (std::size_t i = 0; i < 5000; ++i) {
    RngStream rng = base.substream(i);
    const Path p = doob_drift_sampler(bm, vandermonde, bm.make_state(start), grid, rng, grad);
    if (p.live_size() == p.size()) doob.add(p.row(p.size() - 1), 1.0);
  }
  CHECK(doob.size() > 4900);
  const double times[1] = {0.5};
  const auto exact = sample_marginals(dyson, dyson.make_state(start), times, 5000, 1e-3, RngStream(41, 0));
  EnergyOptions opts;
  opts.seed = 42;
  opts.max_points_per_side = 1000;
  CHECK(energy_distance(doob, exact[0], 499, opts).p_value > 0.01);
}

TEST_CASE("kelvin_conditioning_h examples") {
  const auto fb = get_family("free-besq", {{"n", {2}}, {"delta", {3.0}}});
  const auto h1 = kelvin_conditioning_h(fb, constant_field(1.0));
  const auto vand = [](std::span<const double> x) { return x[1] - x[0]; };
  const auto ht = kelvin_conditioning_h(fb, vand);
  const double x[2] = {1.0, 2.0};
  CHECK(ht(x) == doctest::Approx(std::pow(3.0, -4.0)).epsilon(1e-14));
  const auto nc = get_family("noncolliding-besq", {{"n", {2}}, {"delta", {3.0}}});
  std::mt19937_64 g(43);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int k = 0; k < 100; ++k) {
    double y[2] = {u(g), u(g)};
    if (y[0] > y[1]) std::swap(y[0], y[1]);
    CHECK(h1(y) == doctest::Approx(fb.model().h(y)).epsilon(1e-14));
    CHECK(ht(y) == doctest::Approx(std::pow(y[0] + y[1], 1.0 - 3.0 - 2.0)).epsilon(1e-12));
    CHECK(ht(y) == doctest::Approx(nc.model().h(y)).epsilon(1e-12));
  }
}

TEST_CASE("WeightedSample merge is associative and commutative") {
  auto make = [](std::uint64_t seed, std::size_t n) {
    WeightedSample s(2);
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u;
    for (std::size_t i = 0; i < n; ++i) {
      const double x[2] = {u(g), u(g)};
      s.add(x, u(g) < 0.2 ? 0.0 : u(g));
    }
    return s;
  };
  const auto a = make(1, 30), b = make(2, 20), c = make(3, 10);
  auto rows = [](const WeightedSample& s) {
    std::vector<std::array<double, 3>> r;
    for (std::size_t i = 0; i < s.size(); ++i) r.push_back({s.row(i)[0], s.row(i)[1], s.weights()[i]});
    std::sort(r.begin(), r.end());
    return r;
  };
  WeightedSample ab = a;
  ab.merge(b);
  WeightedSample ba = b;
  ba.merge(a);
  CHECK(rows(ab) == rows(ba));
  WeightedSample left = ab;
  left.merge(c);
  WeightedSample bc = b;
  bc.merge(c);
  WeightedSample right = a;
  right.merge(bc);
  CHECK(rows(left) == rows(right));
  CHECK(left.total_weight() == doctest::Approx(a.total_weight() + b.total_weight() + c.total_weight()));
  CHECK(left.support().size() < left.size());
  WeightedSample other(3);
  CHECK_THROWS_AS(left.merge(other), InvalidArgument);
}

TEST_CASE("mean h-weight is at most one for every family") {
  struct Case {
    Characteristics family;
    std::vector<double> x0;
  };
  const std::vector<Case> cases = {
      {get_family("fspbes", {{"nu", {0.5, 1.0}}, {"sigma", {1.0, 1.5}}, {"alpha", {1.5}}}), {0.8, 1.3}},
      {get_family("bes", {{"nu", {1.5}}}), {1.5}},
      {get_family("bm", {{"n", {3}}}), {1.0, 0.0, 0.0}},
      {get_family("stable", {{"alpha", {1.0}}, {"n", {2}}}), {1.0, 0.5}},
      {get_family("goe", {{"m", {2}}}), {1.0, 0.5, -0.5}},
      {get_family("wishart", {{"m", {2}}, {"delta", {3.0}}}), {1.0, 0.0, 1.0}},
      {get_family("dyson", {{"n", {2}}}), {-1.0, 1.0}},
      {get_family("free-besq", {{"n", {2}}, {"delta", {3.0}}}), {0.5, 1.5}},
      {get_family("noncolliding-besq", {{"n", {2}}, {"delta", {2.0}}}), {0.1, 0.3}},
      {get_family("hyperbolic-bessel", {}), {0.7}},
  };
  const double times[2] = {0.5, 1.0};
  for (const auto& c : cases) {
    INFO(c.family.name());
    const State x0 = c.family.make_state(c.x0);
    const double h0 = c.family.excessive_h(x0);
    const auto s = sample_marginals(c.family, x0, times, 20000, 1e-3, RngStream(44, 0));
    for (const auto& sample : s) {
      std::vector<double> w;
      for (std::size_t i = 0; i < sample.size(); ++i)
        w.push_back(sample.weights()[i] > 0.0 ? c.family.model().h(sample.row(i)) / h0 : 0.0);
      const auto m = mean_estimate(w);
      CHECK(m.mean <= 1.0 + 3.0 * m.se);
    }
  }
}

TEST_CASE("involuting twice with the inverse speed returns the path") {
  const auto bes3 = get_family("bes", {{"nu", {0.5}}});
  const Path x = bes3_path(1.2, 1.0, 1e-4, 45);
  REQUIRE(x.live_size() == x.size());
  const ScalarField v = bes3.v_field();
  const auto a = additive_functional(x, v);
  const Path y = involute_path(x, bes3, v, TimeGrid::uniform(a.final_value, a.final_value / 20000.0));
  // Characteristics of I(X) in its own coordinates: speed y -> 1 / v(I y).
  auto model = bes3.model_ptr();
  auto inverse_speed = [model](std::span<const double> s) {
    std::vector<double> is(s.size());
    model->involution(s, is);
    return 1.0 / model->v(is);
  };
  const double reach = additive_functional(y, inverse_speed).final_value;
  const Path z = involute_path(y, bes3, inverse_speed, TimeGrid::uniform(0.9 * reach, 1e-3));
  double modulus = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) modulus = std::max(modulus, std::abs(x.row(k)[0] - x.row(k - 1)[0]));
  double worst = 0.0;
  std::vector<double> xs(1);
  for (std::size_t k = 0; k < z.live_size(); ++k) {
    interpolate_path(x, z.time(k), Interpolation::Linear, xs);
    worst = std::max(worst, std::abs(z.row(k)[0] - xs[0]));
  }
  CHECK(z.live_size() > 100);
  CHECK(worst <= 2.0 * modulus);
}

TEST_CASE("weighted estimator and Doob sampler agree for BES(5) with h = x^-3") {
  const auto bes5 = get_family("bes", {{"delta", {5.0}}});
  const State x0 = bes5.make_state({1.5});
  auto h = [](std::span<const double> x) { return std::pow(x[0], -3.0); };
  const double times[1] = {1.0};
  const std::size_t N = 100000;
  const auto plain = sample_marginals(bes5, x0, times, N, 1e-3, RngStream(46, 0));
  WeightedSample weighted(1);
  std::vector<double> mass_a;
  for (std::size_t i = 0; i < N; ++i) {
    const double w = plain[0].weights()[i] > 0.0 ? h(plain[0].row(i)) / h(x0.data()) : 0.0;
    weighted.add(plain[0].row(i), w);
    mass_a.push_back(w);
  }
  const TimeGrid grid = make_grid(1.0, 1e-3);
  const RngStream base(47, 0);
  WeightedSample doob(1);
  std::vector<double> mass_b;
  for (std::size_t i = 0; i < 20000; ++i) {
    RngStream rng = base.substream(i);
    const Path p = doob_drift_sampler(bes5, h, x0, grid, rng);
    const bool alive = p.live_size() == p.size();
    if (alive) doob.add(p.row(p.size() - 1), 1.0);
    mass_b.push_back(alive ? 1.0 : 0.0);
  }
  EnergyOptions opts;
  opts.seed = 48;
  opts.max_points_per_side = 1000;
  CHECK(energy_distance(weighted.support(), doob, 499, opts).p_value > 0.01);
  CHECK(two_mean_test(mass_a, mass_b).p_value > 0.01);
}
