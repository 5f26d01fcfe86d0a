#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "inversio/characteristics.hpp"
#include "inversio/errors.hpp"
#include "oracles.hpp"

using namespace inversio;

namespace {

using Gen = std::function<std::vector<double>(std::mt19937_64&)>;

struct Case {
  Characteristics family;
  Gen point;
};

double log_uniform(std::mt19937_64& g, double lo, double hi) {
  return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(g));
}

Gen positive(std::size_t n) {
  return [n](std::mt19937_64& g) {
    std::vector<double> x(n);
    for (auto& v : x) v = log_uniform(g, 0.05, 20.0);
    return x;
  };
}

Gen gaussian(std::size_t n) {
  return [n](std::mt19937_64& g) {
    std::normal_distribution<double> z;
    const double r = log_uniform(g, 0.1, 10.0);
    std::vector<double> x(n);
    double s = 0.0;
    for (auto& v : x) {
      v = z(g);
      s += v * v;
    }
    for (auto& v : x) v *= r / std::sqrt(s);
    return x;
  };
}

Gen sorted(Gen base) {
  return [base](std::mt19937_64& g) {
    auto x = base(g);
    std::sort(x.begin(), x.end());
    return x;
  };
}

Gen positive_definite(std::size_t m) {
  return [m](std::mt19937_64& g) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) a(i, j) = z(g);
    const Eigen::MatrixXd s = a * a.transpose() + 0.05 * Eigen::MatrixXd::Identity(m, m);
    const double scale = log_uniform(g, 0.1, 10.0) / s.trace();
    std::vector<double> x;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) x.push_back(scale * s(i, j));
    return x;
  };
}

std::vector<Case> all_cases() {
  std::vector<Case> c;
  c.push_back({get_family("fspbes", {{"nu", {0.5, 1.0}}, {"sigma", {1.0, 1.5}}, {"alpha", {1.5}}}), positive(2)});
  c.push_back({get_family("fspbes", {{"nu", {-0.5, 0.0, 2.0}}, {"alpha", {1.0}}}), positive(3)});
  c.push_back({get_family("bes", {{"nu", {1.5}}}), positive(1)});
  c.push_back({get_family("besq", {{"delta", {3.0}}}), positive(1)});
  c.push_back({get_family("bm", {{"n", {3}}}), gaussian(3)});
  c.push_back({get_family("bm", {{"n", {2}}}), gaussian(2)});
  c.push_back({get_family("stable", {{"alpha", {1.2}}, {"n", {2}}}), gaussian(2)});
  c.push_back({get_family("stable", {{"alpha", {0.6}}, {"n", {1}}}), gaussian(1)});
  c.push_back({get_family("goe", {{"m", {2}}}), gaussian(3)});
  c.push_back({get_family("goe", {{"m", {3}}}), gaussian(6)});
  c.push_back({get_family("wishart", {{"m", {2}}, {"delta", {3.0}}}), positive_definite(2)});
  c.push_back({get_family("wishart", {{"m", {3}}, {"delta", {4.5}}}), positive_definite(3)});
  c.push_back({get_family("dyson", {{"n", {3}}}), sorted(gaussian(3))});
  c.push_back({get_family("free-besq", {{"n", {2}}, {"delta", {3.0}}}), positive(2)});
  c.push_back({get_family("noncolliding-besq", {{"n", {3}}, {"delta", {1.5}}}), sorted(positive(3))});
  c.push_back({get_family("hyperbolic-bessel", {}), [](std::mt19937_64& g) {
                 return std::vector<double>{log_uniform(g, 0.05, 3.0)};
               }});
  return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("characteristics identities at random interior points") {
  std::mt19937_64 g(1);
  for (const auto& c : all_cases()) {
    INFO(c.family.name());
    double worst_ii = 0.0, worst_h = 0.0, worst_v = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const State x = c.family.make_state(c.point(g));
      REQUIRE(c.family.in_domain(x));
      const State ix = c.family.involution(x);
      REQUIRE(c.family.in_domain(ix));
      const State iix = c.family.involution(ix);
      double scale = 0.0, diff = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        scale = std::max(scale, std::abs(x[i]));
        diff = std::max(diff, std::abs(iix[i] - x[i]));
      }
      worst_ii = std::max(worst_ii, diff / scale);
      worst_h = std::max(worst_h, std::abs(c.family.excessive_h(x) * c.family.excessive_h(ix) - 1.0));
      worst_v = std::max(worst_v, std::abs(c.family.speed_v(x) * c.family.speed_v(ix) - 1.0));
    }
    CHECK(worst_ii < 1e-10);
    CHECK(worst_h < 1e-10);
    CHECK(worst_v < 1e-10);
  }
}

TEST_CASE("homogeneity of rho and theta") {
  std::mt19937_64 g(2);
  for (const auto& c : all_cases()) {
    if (!c.family.is_tip()) continue;
    INFO(c.family.name());
    const double alpha = *c.family.alpha();
    const double beta = *c.family.beta();
    for (int k = 0; k < 200; ++k) {
      const auto raw = c.point(g);
      const State x = c.family.make_state(raw);
      for (double lambda : {0.5, 2.0, 7.0}) {
        auto scaled = raw;
        for (auto& v : scaled) v *= lambda;
        const State lx = c.family.make_state(scaled);
        CHECK(rel(c.family.rho(lx), std::pow(lambda, 2.0 / alpha) * c.family.rho(x)) < 1e-10);
        if (c.family.has_theta()) {
          const auto& m = c.family.model();
          const double lhs = m.log_theta(lx.data());
          const double rhs = beta * std::log(lambda) + m.log_theta(x.data());
          CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
        }
      }
    }
  }
}

TEST_CASE("h and v follow from rho, alpha, beta and the Jacobian") {
  std::mt19937_64 g(3);
  for (const auto& c : all_cases()) {
    if (!c.family.is_tip()) continue;
    INFO(c.family.name());
    const double alpha = *c.family.alpha();
    const double beta = *c.family.beta();
    const double n = static_cast<double>(c.family.n());
    for (int k = 0; k < 1000; ++k) {
      const State x = c.family.make_state(c.point(g));
      const double rho = c.family.rho(x);
      CHECK(rel(c.family.excessive_h(x), std::pow(rho, 1.0 - 0.5 * (beta + n) * alpha)) < 1e-10);
      CHECK(rel(c.family.speed_v(x), std::pow(rho, 2.0 - n * alpha) / c.family.jacobian_I(x)) < 1e-10);
    }
  }
}

TEST_CASE("Jacobian of I against finite differences") {
  std::mt19937_64 g(4);
  for (const auto& c : all_cases()) {
    INFO(c.family.name());
    const std::size_t d = c.family.n();
    const auto& m = c.family.model();
    for (int k = 0; k < 100; ++k) {
      const auto x = c.point(g);
      double norm = 0.0;
      for (double v : x) norm = std::max(norm, std::abs(v));
      // Keep the stencil inside the domain: the step scales with the point.
      double step = 1e-5 * norm;
      if (c.family.id() == "dyson" || c.family.id() == "noncolliding-besq") {
        for (std::size_t i = 1; i < d; ++i) step = std::min(step, 1e-3 * (x[i] - x[i - 1]));
      }
      if (c.family.id() == "wishart" || d == 1 || c.family.id() == "fspbes" || c.family.id() == "free-besq") {
        for (double v : x) step = std::min(step, 1e-3 * std::abs(v) + (c.family.id() == "wishart" ? 1e-3 * norm : 0.0));
      }
      Eigen::MatrixXd jac(d, d);
      std::vector<double> plus(d), minus(d), xp(x), xm(x);
      for (std::size_t j = 0; j < d; ++j) {
        xp = x;
        xm = x;
        xp[j] += step;
        xm[j] -= step;
        m.involution(xp, plus);
        m.involution(xm, minus);
        for (std::size_t i = 0; i < d; ++i) jac(i, j) = (plus[i] - minus[i]) / (2.0 * step);
      }
      CHECK(rel(std::abs(jac.determinant()), m.jacobian(x)) < 1e-6);
    }
  }
}

TEST_CASE("h examples") {
  const auto w = get_family("wishart", {{"m", {2}}, {"delta", {3.0}}});
  CHECK(w.excessive_h(w.make_state({1.5, 0.2, 0.5})) == doctest::Approx(0.25).epsilon(1e-14));

  const auto dyson = get_family("dyson", {{"n", {2}}});
  const State x = dyson.make_state({-0.3, 1.7});
  CHECK(dyson.excessive_h(x) == doctest::Approx(1.0 / (0.09 + 2.89)).epsilon(1e-14));

  const auto besq2 = get_family("fspbes", {{"nu", {0.0}}, {"sigma", {1.0}}, {"alpha", {2.0}}});
  CHECK(*besq2.beta() == 0.0);
  for (double y : {0.01, 1.0, 50.0}) CHECK(besq2.excessive_h(besq2.make_state({y})) == 1.0);
  CHECK(besq2.model().transient() == false);
}

TEST_CASE("densities against closed forms") {
  const auto bes3 = get_family("bes", {{"nu", {0.5}}});
  for (double y : {0.1, 0.8, 1.5, 3.0}) {
    const double near_zero = bes3.density(1.0, bes3.make_state({1e-7}), bes3.make_state({y}));
    CHECK(rel(near_zero, std::sqrt(2.0 / std::numbers::pi) * y * y * std::exp(-0.5 * y * y)) < 1e-6);
    const double at_one = bes3.density(0.7, bes3.make_state({1.0}), bes3.make_state({y}));
    CHECK(rel(at_one, oracle::bes3_density(0.7, 1.0, y)) < 1e-10);
  }

  // 1-d BESQ(delta) = t chi^2_delta(x / t): density of y = t u at u.
  const auto besq = get_family("besq", {{"delta", {3.0}}});
  for (double y : {0.2, 1.0, 4.0}) {
    const double t = 0.6, x = 1.3;
    const double eps = 1e-5 * y;
    const double fd = (oracle::noncentral_chi2_cdf((y + eps) / t, 3.0, x / t) -
                       oracle::noncentral_chi2_cdf((y - eps) / t, 3.0, x / t)) /
                      (2.0 * eps);
    CHECK(rel(besq.density(t, besq.make_state({x}), besq.make_state({y})), fd) < 1e-6);
  }

  const auto dyson = get_family("dyson", {{"n", {2}}});
  auto q = [](double a, double b) { return oracle::normal_pdf(a - b); };
  const State x = dyson.make_state({-1.0, 1.0});
  CHECK(rel(dyson.density(1.0, x, x), q(-1, -1) * q(1, 1) - q(-1, 1) * q(1, -1)) < 1e-12);
  const State y = dyson.make_state({-0.2, 2.1});
  const double h_ratio = (2.1 + 0.2) / 2.0;
  CHECK(rel(dyson.density(1.0, x, y), h_ratio * (q(-1, -0.2) * q(1, 2.1) - q(-1, 2.1) * q(1, -0.2))) < 1e-12);

  CHECK_THROWS_AS(density(get_family("wishart", {{"m", {2}}, {"delta", {3.0}}}), 1.0,
                          State::sym_matrix(2, {1, 0, 1}), State::sym_matrix(2, {1, 0, 1})),
                  Unsupported);
  CHECK_THROWS_AS(density(get_family("stable", {{"alpha", {1.0}}, {"n", {2}}}), 1.0, State::vector({1, 0}),
                          State::vector({1, 0})),
                  Unsupported);
}

TEST_CASE("densities integrate to at most one") {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (const auto& c : {get_family("bes", {{"nu", {0.5}}}), get_family("besq", {{"delta", {1.0}}}),
                        get_family("fspbes", {{"nu", {0.2}}, {"alpha", {1.7}}, {"sigma", {0.8}}})}) {
    INFO(c.name());
    const State x = c.make_state({0.9});
    auto f = [&](double y) { return c.density(0.8, x, c.make_state({y})); };
    const double mass = GK::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-10);
    CHECK(mass <= 1.0 + 1e-3);
    CHECK(mass > 0.99);
  }
  const auto dyson = get_family("dyson", {{"n", {2}}});
  const State x = dyson.make_state({-0.5, 0.8});
  auto inner = [&](double y1) {
    auto f = [&](double y2) { return dyson.density(0.5, x, dyson.make_state({y1, y2})); };
    return GK::integrate(f, y1, 12.0, 10, 1e-10);
  };
  const double mass = GK::integrate(inner, -12.0, 12.0, 10, 1e-9);
  CHECK(mass <= 1.0 + 1e-3);
  CHECK(mass > 0.99);
}

double min_gap(std::span<const double> x) {
  double g = INFINITY;
  for (std::size_t i = 1; i < x.size(); ++i) g = std::min(g, x[i] - x[i - 1]);
  return g;
}

TEST_CASE("self-duality residuals") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> t_dist(0.05, 3.0);
  const auto fsp = get_family("fspbes", {{"nu", {0.5, -0.3}}, {"sigma", {1.0, 2.0}}, {"alpha", {1.5}}});
  const auto dyson = get_family("dyson", {{"n", {3}}});
  const auto nc = get_family("noncolliding-besq", {{"n", {2}}, {"delta", {2.5}}});
  // Ordered families: the determinant cancels when gap(x) gap(y) / t is tiny,
  // so well-separated pairs are held to 1e-10 and near collisions to 1e-6.
  double worst_near = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = t_dist(g);
    const State x = fsp.make_state(positive(2)(g));
    const State y = fsp.make_state(positive(2)(g));
    CHECK(self_duality_residual(fsp, t, x, y) < 1e-10);
    for (const auto* fam : {&dyson, &nc}) {
      const Gen gen = fam == &dyson ? sorted(gaussian(3)) : sorted(positive(2));
      const State a = fam->make_state(gen(g));
      const State b = fam->make_state(gen(g));
      const double r = self_duality_residual(*fam, t, a, b);
      if (min_gap(a.data()) * min_gap(b.data()) / t > 1e-3) {
        CHECK(r < 1e-10);
      } else {
        worst_near = std::max(worst_near, r);
      }
    }
  }
  CHECK(worst_near < 1e-6);
  const State x = fsp.make_state({0.4, 2.0});
  CHECK(self_duality_residual(fsp, 1.0, x, x) == 0.0);
  const State d = dyson.make_state({-1.0, 0.1, 0.3});
  CHECK(self_duality_residual(dyson, 0.7, d, d) == 0.0);
  CHECK_THROWS_AS(self_duality_residual(get_family("stable", {{"alpha", {1.0}}, {"n", {2}}}), 1.0,
                                        State::vector({1, 0}), State::vector({0, 1})),
                  Unsupported);
}

TEST_CASE("radial process and Bessel dimension") {
  const auto w = get_family("wishart", {{"m", {2}}, {"delta", {3.0}}});
  CHECK(radial_process_value(w, w.make_state({1.0, 0.3, 3.0})) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(bessel_dimension(w) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(bessel_dimension(get_family("wishart", {{"m", {3}}, {"delta", {4.5}}})) == doctest::Approx(13.5).epsilon(1e-14));

  const auto dyson = get_family("dyson", {{"n", {3}}});
  CHECK(radial_process_value(dyson, dyson.make_state({-2.0, 0.0, 2.0})) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-14));
  CHECK(bessel_dimension(dyson) == doctest::Approx(9.0).epsilon(1e-14));

  for (double alpha : {1.0, 1.5}) {
    const auto fsp = get_family("fspbes", {{"nu", {0.5, 1.0}}, {"alpha", {alpha}}});
    CHECK(bessel_dimension(fsp) == doctest::Approx(7.0).epsilon(1e-14));
  }
  CHECK(bessel_dimension(get_family("bm", {{"n", {3}}})) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK_THROWS_AS(bessel_dimension(get_family("hyperbolic-bessel", {})), Unsupported);
  CHECK_THROWS_AS(radial_process_value(w, State::cemetery()), InvalidArgument);
}

TEST_CASE("parameter errors name the constraint") {
  auto message = [](auto&& f) {
    try {
      f();
    } catch (const InvalidArgument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message([] { get_family("stable", {{"alpha", {2.5}}, {"n", {3}}}); }).find("alpha") != std::string::npos);
  CHECK(message([] { get_family("stable", {{"alpha", {1.5}}, {"n", {1}}}); }).find("alpha") != std::string::npos);
  CHECK(message([] { get_family("goe", {{"m", {0}}}); }).find("m") != std::string::npos);
  CHECK(message([] { get_family("wishart", {{"m", {2}}, {"delta", {0.5}}}); }).find("delta") != std::string::npos);
  CHECK(message([] { get_family("fspbes", {{"nu", {-1.5}}}); }).find("nu") != std::string::npos);
  CHECK(message([] { get_family("bm", {{"n", {3}}, {"sigma", {1}}}); }).find("sigma") != std::string::npos);
  CHECK(message([] { get_family("nope", {}); }).find("nope") != std::string::npos);
  CHECK_THROWS_AS(get_family("bm", {{"n", {3}}}).make_state({1.0, 2.0}), InvalidArgument);
}
