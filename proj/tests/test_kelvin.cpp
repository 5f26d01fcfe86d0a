#include <doctest.h>

#include <cmath>
#include <random>

#include "inversio/errors.hpp"
#include "inversio/kelvin.hpp"
#include "inversio/stats.hpp"
#include "inversio/verify.hpp"

using namespace inversio;

namespace {

ScalarField constant_field(double c) {
  return [c](std::span<const double>) { return c; };
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("Kelvin transform is an involution with K1 = h and Kh = 1") {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0.2, 4.0);
  std::normal_distribution<double> z;
  const auto bm = get_family("bm", {{"n", {3}}});
  const auto fb = get_family("free-besq", {{"n", {2}}, {"delta", {3.0}}});
  auto f = [](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::sin(static_cast<double>(i + 1) * x[i]);
    return 2.0 + s;
  };
  for (const auto* family : {&bm, &fb}) {
    const auto kkf = kelvin_transform(*family, kelvin_transform(*family, f));
    const auto k1 = kelvin_transform(*family, constant_field(1.0));
    const auto kh = kelvin_transform(*family, family->h_field());
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> x(family->n());
      for (auto& v : x) v = family == &bm ? z(g) : u(g);
      CHECK(rel(kkf(x), f(x)) < 1e-10);
      CHECK(rel(k1(x), family->model().h(x)) < 1e-14);
      CHECK(std::abs(kh(x) - 1.0) < 1e-12);
    }
  }
  const double x[3] = {0.0, 3.0, 4.0};
  CHECK(kelvin_transform(bm, constant_field(1.0))(x) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("dual Kelvin transform") {
  const auto bm = get_family("bm", {{"n", {3}}});
  WeightedSample point(3);
  const double x[3] = {2.0, 0.0, 0.0};
  point.add(x, 1.0);
  const auto image = dual_kelvin(point, bm);
  CHECK(image.row(0)[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(image.weights()[0] == doctest::Approx(0.5).epsilon(1e-15));

  WeightedSample mu(3);
  RngStream rng(2, 0);
  for (int i = 0; i < 500; ++i) {
    const double p[3] = {rng.normal(), rng.normal(), rng.normal()};
    mu.add(p, rng.uniform());
  }
  auto f = [](std::span<const double> p) { return std::exp(-p[0] * p[0]) + p[1] * p[2]; };
  const auto kf = kelvin_transform(bm, f);
  const auto nu = dual_kelvin(mu, bm);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    lhs += kf(mu.row(i)) * mu.weights()[i];
    rhs += f(nu.row(i)) * nu.weights()[i];
  }
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));

  const auto back = dual_kelvin(nu, bm);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    CHECK(rel(back.weights()[i], mu.weights()[i]) < 1e-10);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(back.row(i)[k] - mu.row(i)[k]) < 1e-10 * (1.0 + std::abs(mu.row(i)[k])));
  }
}

TEST_CASE("generator residual vanishes on Kelvin transforms of harmonic functions") {
  struct Case {
    Characteristics family;
    std::vector<ScalarField> dictionary;
    std::vector<std::vector<double>> points;
  };
  auto power = [](double p) { return ScalarField([p](std::span<const double> x) { return std::pow(x[0], p); }); };
  auto h0 = [](std::span<const double> x) { return (1.0 / std::tanh(x[0]) - 1.0) / std::sqrt(2.0); };
  const std::vector<ScalarField> polys2 = {
      constant_field(1.0), [](std::span<const double> x) { return x[0]; },
      [](std::span<const double> x) { return x[0] * x[1]; },
      [](std::span<const double> x) { return x[0] * x[0] - x[1] * x[1]; }};
  std::vector<ScalarField> polys3 = polys2;
  polys3.push_back([](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] - 2.0 * x[2] * x[2]; });
  polys3.push_back([](std::span<const double> x) { return x[1] * x[2]; });
  const std::vector<Case> cases = {
      {get_family("bes", {{"delta", {3.0}}}), {constant_field(1.0), power(-1.0)}, {{0.5}, {1.0}, {3.0}}},
      {get_family("bes", {{"delta", {5.0}}}), {constant_field(1.0), power(-3.0)}, {{0.5}, {1.0}, {3.0}}},
      {get_family("bm", {{"n", {2}}}), polys2, {{0.5, 0.2}, {-1.0, 1.5}, {2.0, -0.3}}},
      {get_family("bm", {{"n", {3}}}), polys3, {{0.5, 0.2, -0.4}, {-1.0, 1.5, 0.3}, {0.1, 0.0, 2.0}}},
      {get_family("hyperbolic-bessel", {}), {constant_field(1.0), h0}, {{0.3}, {1.0}, {2.0}}},
  };
  for (const auto& c : cases) {
    INFO(c.family.name());
    for (const auto& f : c.dictionary) {
      const auto kf = kelvin_transform(c.family, f);
      for (const auto& p : c.points) CHECK(std::abs(generator_residual(c.family, kf, c.family.make_state(p))) < 1e-6);
    }
  }
  // The plain harmonic functions themselves (the generator is right).
  const auto bes3 = get_family("bes", {{"delta", {3.0}}});
  CHECK(std::abs(generator_residual(bes3, power(-1.0), bes3.make_state({0.7}))) < 1e-6);
  CHECK(std::abs(generator_residual(bes3, power(2.0), bes3.make_state({0.7})) - 3.0) < 1e-6);
}

TEST_CASE("hyperbolic BM: the radial candidate is not a Kelvin transform") {
  const auto hb = get_family("hyperbolic-bm", {});
  auto poisson = [](std::span<const double> x) {
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const double d2 = x[0] * x[0] + x[1] * x[1] + (x[2] - 1.0) * (x[2] - 1.0);
    const double p = (1.0 - r2) / d2;
    return p * p;
  };
  const State x = hb.make_state({0.0, 0.0, 0.5});
  CHECK(std::abs(generator_residual(hb, poisson, x)) < 1e-6);
  CHECK(std::abs(generator_residual(hb, kelvin_transform(hb, poisson), x)) >= 1e-2);
  // Radial functions are fine: h itself is harmonic.
  CHECK(std::abs(generator_residual(hb, hb.h_field(), x)) < 1e-6);
}

TEST_CASE("generator residual errors") {
  const auto st = get_family("stable", {{"alpha", {1.0}}, {"n", {2}}});
  CHECK_THROWS_AS(generator_residual(st, constant_field(1.0), st.make_state({1.0, 0.0})), Unsupported);
  const auto bes3 = get_family("bes", {{"delta", {3.0}}});
  CHECK_THROWS_AS(generator_residual(bes3, constant_field(1.0), State::vector({-1.0})), DomainError);
}

TEST_CASE("regions and their images") {
  const auto bm = get_family("bm", {{"n", {3}}});
  const auto d = RegionSpec::annulus(0.5, 2.0);
  const auto id = d.involuted(bm.model());
  CHECK(id.kind() == RegionKind::RadialAnnulus);
  CHECK(id.inner() == doctest::Approx(0.5));
  CHECK(id.outer() == doctest::Approx(2.0));
  const auto e = RegionSpec::annulus(1.0, 4.0).involuted(bm.model());
  CHECK(e.inner() == doctest::Approx(0.25));
  CHECK(e.outer() == doctest::Approx(1.0));
  CHECK_THROWS_AS(RegionSpec::annulus(2.0, 1.0), InvalidArgument);

  std::mt19937_64 g(3);
  std::normal_distribution<double> z;
  const auto wishart = get_family("wishart", {{"m", {2}}, {"delta", {3.0}}});
  const auto dw = RegionSpec::annulus(0.7, 1.6);
  const auto idw = dw.involuted(wishart.model());
  for (int k = 0; k < 1000; ++k) {
    const double s = std::exp(z(g));
    std::vector<double> x = {s * z(g), s * z(g), s * z(g)};
    std::vector<double> ix(3);
    bm.model().involution(x, ix);
    CHECK(d.contains(bm.model(), x) == id.contains(bm.model(), ix));
    CHECK(RegionSpec::annulus(1.0, 4.0).contains(bm.model(), x) == e.contains(bm.model(), ix));
    const double a = std::abs(z(g)) * s, b = std::abs(z(g)) * s, c = 0.5 * z(g) * std::sqrt(a * b);
    const std::vector<double> w = {a, c, b};
    wishart.model().involution(w, ix);
    CHECK(dw.contains(wishart.model(), w) == idw.contains(wishart.model(), ix));
  }
  const auto chamber = RegionSpec::half_order(false);
  CHECK(chamber.involuted(bm.model()).kind() == RegionKind::HalfOrder);
  const double inside[3] = {-1.0, 0.5, 2.0}, outside[3] = {1.0, 0.5, 2.0};
  CHECK(chamber.contains(bm.model(), inside));
  CHECK_FALSE(chamber.contains(bm.model(), outside));
}

TEST_CASE("exit_sample: gambler's ruin and the BES(3) scale function") {
  const auto bm1 = get_family("bm", {{"n", {1}}});
  const auto box = RegionSpec::box({0.0}, {1.0});
  const std::size_t N = 20000;
  const auto s = exit_sample(bm1, bm1.make_state({0.3}), box, TimeGrid::uniform(5.0, 1e-4), RngStream(4, 0), N);
  std::vector<double> right;
  for (std::size_t i = 0; i < N; ++i) right.push_back(s.exits.weights()[i] > 0.0 && s.exits.row(i)[0] >= 1.0 ? 1.0 : 0.0);
  auto m = mean_estimate(right);
  CHECK(std::abs(m.mean - 0.3) < 3.0 * m.se);
  CHECK(s.unfinished == 0);

  const auto bes3 = get_family("bes", {{"delta", {3.0}}});
  const double a = 0.5, b = 2.0, x = 1.0;
  const auto e = exit_sample(bes3, bes3.make_state({x}), RegionSpec::annulus(a, b), TimeGrid::uniform(20.0, 1e-3),
                             RngStream(5, 0), N);
  std::vector<double> outer;
  for (std::size_t i = 0; i < N; ++i) outer.push_back(e.exits.weights()[i] > 0.0 && e.exits.row(i)[0] > 1.5 ? 1.0 : 0.0);
  m = mean_estimate(outer);
  const double target = (1.0 / a - 1.0 / x) / (1.0 / a - 1.0 / b);
  CHECK(std::abs(m.mean - target) < 3.0 * m.se);
  for (std::size_t i = 0; i < N; ++i) {
    if (e.exits.weights()[i] > 0.0) {
      const double r = e.exits.row(i)[0];
      CHECK((std::abs(r - a) < 1e-9 || std::abs(r - b) < 1e-9));
    }
  }

  const auto short_grid = exit_sample(bes3, bes3.make_state({x}), RegionSpec::annulus(a, b),
                                      TimeGrid::uniform(0.01, 1e-3), RngStream(6, 0), 1000);
  CHECK(short_grid.unfinished > 10);
  CHECK_FALSE(short_grid.warnings.empty());
  for (std::size_t i = 0; i < 1000; ++i)
    if (!std::isfinite(short_grid.tau[i])) CHECK(short_grid.exits.weights()[i] == 0.0);

  CHECK_THROWS_AS(exit_sample(bes3, bes3.make_state({3.0}), RegionSpec::annulus(a, b), TimeGrid::uniform(1.0, 1e-3),
                              RngStream(7, 0), 10),
                  InvalidArgument);
}

TEST_CASE("exit identity for BM(R^3) on an annulus") {
  const auto bm = get_family("bm", {{"n", {3}}});
  const auto r = exit_identity_check(bm, constant_field(1.0), bm.make_state({0.6, 0.0, 0.8}),
                                     RegionSpec::annulus(0.5, 2.0), TimeGrid::uniform(50.0, 1e-3), RngStream(8, 0),
                                     20000);
  CHECK(r.kind == ReportKind::Residual);
  CHECK(r.pass);
  CHECK(r.value < 0.02);
}

TEST_CASE("Kelvin transforms of superharmonic functions stay superharmonic") {
  const auto bes5 = get_family("bes", {{"delta", {5.0}}});
  auto f = [](std::span<const double> x) { return std::min(1.0, std::pow(x[0], -3.0)); };
  const auto kf = kelvin_transform(bes5, f);
  for (int k = 0; k < 10; ++k) {
    const double x = 0.4 + 0.3 * k;
    const auto e = exit_sample(bes5, bes5.make_state({x}), RegionSpec::annulus(0.8 * x, 1.25 * x),
                               TimeGrid::uniform(10.0, 1e-3), RngStream(9, static_cast<std::uint64_t>(k)), 5000);
    std::vector<double> values;
    for (std::size_t i = 0; i < e.exits.size(); ++i)
      if (e.exits.weights()[i] > 0.0) values.push_back(kf(e.exits.row(i)));
    const auto m = mean_estimate(values);
    const double here[1] = {x};
    CHECK(m.mean <= kf(here) + 3.0 * m.se + 1e-12);
  }
}

TEST_CASE("Kelvin transforms of excessive functions stay excessive") {
  const double times[2] = {0.1, 1.0};
  struct Case {
    Characteristics family;
    std::vector<double> x0;
  };
  const std::vector<Case> cases = {
      {get_family("bes", {{"delta", {3.0}}}), {1.0}},
      {get_family("bm", {{"n", {3}}}), {0.5, 0.5, 0.0}},
      {get_family("wishart", {{"m", {2}}, {"delta", {3.0}}}), {1.0, 0.2, 0.7}},
      {get_family("dyson", {{"n", {2}}}), {-1.0, 0.5}},
  };
  for (const auto& c : cases) {
    INFO(c.family.name());
    for (const auto& H : {constant_field(1.0), c.family.h_field()}) {
      const auto r = verify_excessive(c.family, kelvin_transform(c.family, H), c.family.make_state(c.x0), times, 10000,
                                      1e-3, 10);
      INFO(r.name << " value " << r.value << " statistic " << r.statistic);
      for (const auto& d : r.details) INFO(d.name << " " << d.statistic << " " << d.value);
      for (const auto& n : r.notes) INFO(n);
      CHECK(r.pass);
    }
  }
}

TEST_CASE("potential kernel of BES(5) against its Green function") {
  const auto bes5 = get_family("bes", {{"delta", {5.0}}});
  // Scale s(x) = -x^-3 / 3, speed density 2 y^4: G(x, y) = 2 y^4 max(x, y)^-3 / 3.
  auto green = [](double x, double y) { return 2.0 * std::pow(y, 4.0) * std::pow(std::max(x, y), -3.0) / 3.0; };
  const auto u = potential_kernel(bes5, bes5.make_state({1.0}), bes5.make_state({2.0}));
  CHECK(green(1.0, 2.0) == doctest::Approx(4.0 / 3.0));
  CHECK(rel(u.value, green(1.0, 2.0)) < 0.01);
  CHECK(u.tail <= 1e-3 * u.value);
  CHECK(u.exponent == doctest::Approx(2.5).epsilon(0.02));

  const auto longer = potential_kernel(bes5, bes5.make_state({1.0}), bes5.make_state({2.0}), 2.0 * u.t_max);
  CHECK(rel(longer.value, u.value) < 1e-3);

  for (auto [x, y] : {std::pair{0.5, 0.5}, std::pair{2.0, 0.7}, std::pair{1.3, 3.1}}) {
    const auto p = potential_kernel(bes5, bes5.make_state({x}), bes5.make_state({y}));
    CHECK(rel(p.value, green(x, y)) < 0.01);
  }
}

TEST_CASE("potential relation residuals") {
  const auto bes5 = get_family("bes", {{"delta", {5.0}}});
  CHECK(potential_relation_residual(bes5, bes5.make_state({1.0}), bes5.make_state({2.0})) < 0.01);
  CHECK(potential_relation_residual(bes5, bes5.make_state({1.5}), bes5.make_state({1.5})) < 0.01);

  const auto fsp = get_family("fspbes", {{"nu", {1.0, 1.0}}, {"sigma", {1.0, 1.0}}, {"alpha", {2.0}}});
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.3, 2.0);
  for (int k = 0; k < 5; ++k) {
    const State x = fsp.make_state({u(g), u(g)});
    const State y = fsp.make_state({u(g), u(g)});
    CHECK(potential_relation_residual(fsp, x, y) < 0.02);
  }
}

TEST_CASE("potential kernel errors") {
  const auto besq2 = get_family("besq", {{"delta", {2.0}}});
  CHECK_THROWS_AS(potential_kernel(besq2, besq2.make_state({1.0}), besq2.make_state({2.0})), TailError);
  const auto st = get_family("stable", {{"alpha", {1.0}}, {"n", {2}}});
  CHECK_THROWS_AS(potential_kernel(st, st.make_state({1.0, 0.0}), st.make_state({0.0, 1.0})), Unsupported);
  const auto bes1 = get_family("bes", {{"delta", {1.5}}});
  CHECK_THROWS_AS(potential_kernel(bes1, bes1.make_state({1.0}), bes1.make_state({2.0})), Unsupported);
}
