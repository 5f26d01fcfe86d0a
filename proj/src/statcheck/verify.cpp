#include "inversio/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "inversio/errors.hpp"
#include "inversio/parallel.hpp"
#include "inversio/samplers.hpp"
#include "inversio/special.hpp"

namespace inversio {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_time(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

std::uint64_t test_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(seed ^ splitmix64(a * 0x9E3779B97F4A7C15ULL + b));
}

void require_times(std::span<const double> times) {
  if (times.empty()) throw InvalidArgument("at least one time is required");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0) || !std::isfinite(times[k])) throw InvalidArgument("times must be positive and finite");
    if (k > 0 && !(times[k] > times[k - 1])) throw InvalidArgument("times must increase strictly");
  }
}

void require_start(const Characteristics& family, const State& x0) {
  if (x0.size() != family.n()) throw InvalidArgument("x0 has the wrong dimension for " + family.name());
  if (!family.in_domain(x0)) throw DomainError("x0 is outside the domain of " + family.name());
}

void require_sampler(const Characteristics& family) {
  if (family.sampler() == SamplerKind::None)
    throw Unsupported("family " + family.name() + " has no sampler");
}

// Sub-tests comparing two weighted samples; returns them with the Bonferroni
// p-value of the family of tests.
struct Comparison {
  std::vector<SubTest> tests;
  double p_value = 1.0;
  double statistic = 0.0;
};

Comparison compare_samples(const WeightedSample& a, const WeightedSample& b, const ProcessModel& model,
                           const ShapeOptions& options, std::uint64_t seed, std::vector<std::string>& notes) {
  Comparison out;
  const auto mass = two_mean_test(a.weights(), b.weights());
  out.tests.push_back({"mass", mass.statistic, mass.p_value});
  // With constant weights on both sides the mass test has nothing to test and
  // stays out of the Bonferroni count.
  auto constant = [](std::span<const double> w) {
    return std::all_of(w.begin(), w.end(), [&](double x) { return x == w.front(); });
  };
  const bool mass_degenerate = constant(a.weights()) && constant(b.weights());

  const WeightedSample sa = a.support();
  const WeightedSample sb = b.support();
  if (sa.size() < 2 || sb.size() < 2) {
    notes.push_back("shape tests skipped: fewer than two surviving paths on one side");
  } else {
    const std::size_t dim = sa.dim();
    const PermutationOptions perm{options.permutations, 0};
    for (std::size_t k = 0; k < dim; ++k) {
      PermutationOptions p = perm;
      p.seed = test_seed(seed, 1, k);
      const auto ks = ks_statistic(sa.coordinate(k), sb.coordinate(k), p);
      out.tests.push_back({"ks[" + std::to_string(k) + "]", ks.statistic, ks.p_value});
    }
    if (dim > 1) {
      auto radial = [&](const WeightedSample& s) {
        WeightedSample r(1);
        r.reserve(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
          const double value = model.radial(s.row(i));
          r.add({&value, 1}, s.weights()[i]);
        }
        return r;
      };
      PermutationOptions p = perm;
      p.seed = test_seed(seed, 2, 0);
      const auto ks = ks_statistic(radial(sa), radial(sb), p);
      out.tests.push_back({"ks[radial]", ks.statistic, ks.p_value});
    }
    EnergyOptions e;
    e.permutations = options.energy_permutations;
    e.seed = test_seed(seed, 3, 0);
    e.cap = options.metric_cap;
    e.max_points_per_side = options.energy_points;
    const auto ed = energy_distance(sa, sb, options.energy_permutations, e);
    out.tests.push_back({"energy", ed.statistic, ed.p_value});
  }

  double p_min = 1.0;
  for (const auto& t : out.tests) {
    if (t.value <= p_min) {
      p_min = t.value;
      out.statistic = t.statistic;
    }
  }
  const std::size_t k = out.tests.size() - (mass_degenerate ? 1 : 0);
  out.p_value = std::min(1.0, p_min * static_cast<double>(std::max<std::size_t>(k, 1)));
  return out;
}

double default_cap(const Characteristics& family, const ShapeOptions& options) {
  if (options.metric_cap > 0.0) return options.metric_cap;
  return family.sampler() == SamplerKind::Jump ? 1.0 : 0.0;
}

}  // namespace

std::vector<WeightedSample> sample_marginals(const Characteristics& family, const State& x0,
                                             std::span<const double> times, std::size_t N, double dt,
                                             const RngStream& base) {
  require_start(family, x0);
  require_sampler(family);
  require_times(times);
  if (family.sampler() == SamplerKind::Euler && !(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const ProcessModel& m = family.model();
  const std::size_t dim = m.dim();
  const std::size_t nt = times.size();
  std::vector<double> values(N * nt * dim, 0.0);
  std::vector<double> weights(N * nt, 0.0);

  parallel_for(N, [&](std::size_t begin, std::size_t end) {
    auto stepper = m.make_stepper();
    std::vector<double> x(dim);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng = base.substream(i);
      std::copy(x0.data().begin(), x0.data().end(), x.begin());
      stepper->reset(x, rng);
      double t = 0.0;
      for (std::size_t k = 0; k < nt; ++k) {
        bool alive = true;
        if (family.sampler() == SamplerKind::Euler) {
          const auto steps = static_cast<std::size_t>(std::ceil((times[k] - t) / dt - 1e-9));
          const double h = (times[k] - t) / static_cast<double>(std::max<std::size_t>(steps, 1));
          for (std::size_t s = 0; s < steps && alive; ++s) alive = stepper->advance(h, rng, x) && !m.absorbed(x);
        } else {
          alive = stepper->advance(times[k] - t, rng, x) && !m.absorbed(x);
        }
        if (!alive) break;
        t = times[k];
        std::copy(x.begin(), x.end(), values.begin() + static_cast<std::ptrdiff_t>((k * N + i) * dim));
        weights[k * N + i] = 1.0;
      }
    }
  });

  std::vector<WeightedSample> out;
  out.reserve(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    WeightedSample s(dim);
    s.reserve(N);
    for (std::size_t i = 0; i < N; ++i)
      s.add({values.data() + (k * N + i) * dim, dim}, weights[k * N + i]);
    s.origin = {std::vector<double>(x0.data().begin(), x0.data().end()), times[k], family.name(), base.seed()};
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TestReport> verify_ip(const Characteristics& family, const State& x0, std::span<const double> times,
                                  std::size_t N, double dt, std::uint64_t seed, const IpOptions& options) {
  const auto start = Clock::now();
  require_start(family, x0);
  require_sampler(family);
  require_times(times);
  if (N < 2) throw InvalidArgument("N must be at least 2");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const State ix0 = family.involution(x0);
  if (!family.in_domain(ix0)) throw DomainError("I(x0) is outside the domain");

  const ProcessModel& m = family.model();
  const std::size_t dim = m.dim();
  const std::size_t nt = times.size();
  const ScalarField h = options.h_override ? options.h_override : family.h_field();
  const ScalarField v = family.v_field();
  const double h_ix0 = h(ix0.data());
  if (!(h_ix0 > 0.0) || !std::isfinite(h_ix0)) throw NumericalDomainError("h(I x0) is not positive and finite");

  ClockPolicy policy;
  policy.clock_step = dt;
  policy.max_relative_step = options.max_relative_step;
  policy.horizon = times.back();
  policy.tail_tolerance = options.tail_tolerance;
  const Quadrature quad = default_quadrature(family);
  const Interpolation mode = m.interpolation();

  // Side A: Y_t = I(X_{gamma_t}) from x0 with weight h(I x0) / h(Y_t).
  std::vector<double> ya(N * nt * dim, 0.0);
  std::vector<double> wa(N * nt, 0.0);
  const RngStream stream_a(seed, 1);
  parallel_for(N, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(dim);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng = stream_a.substream(i);
      const Path path = sample_clocked_path(family, x0, policy, rng);
      const AdditiveFunctional a = additive_functional(path, v, quad);
      for (std::size_t k = 0; k < nt; ++k) {
        const auto gamma = invert_time_change(a, times[k]);
        if (!gamma) break;
        interpolate_path(path, *gamma, mode, x);
        std::span<double> y(ya.data() + (k * N + i) * dim, dim);
        m.involution(x, y);
        const double hy = h(y);
        const double w = h_ix0 / hy;
        wa[k * N + i] = (hy > 0.0 && std::isfinite(w)) ? w : 0.0;
      }
    }
  });

  // Side B: plain paths from I(x0).
  const auto side_b = sample_marginals(family, ix0, times, N, dt, RngStream(seed, 2));

  ShapeOptions shape = options;
  shape.metric_cap = default_cap(family, options);
  const double elapsed_sampling = seconds_since(start);

  std::vector<TestReport> reports;
  for (std::size_t k = 0; k < nt; ++k) {
    const auto t_start = Clock::now();
    WeightedSample side_a(dim);
    side_a.reserve(N);
    for (std::size_t i = 0; i < N; ++i) side_a.add({ya.data() + (k * N + i) * dim, dim}, wa[k * N + i]);

    TestReport r;
    r.name = (options.label.empty() ? "ip/" + family.name() : options.label) + "/t=" + format_time(times[k]);
    r.kind = ReportKind::PValue;
    r.threshold = options.threshold;
    r.n = N;
    r.dt = dt;
    r.seed = seed;
    if (!m.transient()) r.notes.push_back("family is not transient; A may stay finite only up to the horizon");
    const auto cmp = compare_samples(side_a, side_b[k], m, shape, test_seed(seed, 10, k), r.notes);
    r.details = cmp.tests;
    r.statistic = cmp.statistic;
    r.value = cmp.p_value;
    r.decide();
    r.runtime_s = elapsed_sampling / static_cast<double>(nt) + seconds_since(t_start);
    reports.push_back(std::move(r));
  }
  return reports;
}

TestReport verify_ip_self(const Characteristics& family, const State& x0, double t, std::size_t N, double dt,
                          std::uint64_t seed, const ShapeOptions& options) {
  const auto start = Clock::now();
  if (N < 2) throw InvalidArgument("N must be at least 2");
  const double times[1] = {t};
  const auto a = sample_marginals(family, x0, times, N, dt, RngStream(seed, 1));
  const auto b = sample_marginals(family, x0, times, N, dt, RngStream(seed, 2));
  ShapeOptions shape = options;
  shape.metric_cap = default_cap(family, options);

  TestReport r;
  r.name = "ip-self/" + family.name() + "/t=" + format_time(t);
  r.kind = ReportKind::PValue;
  r.threshold = options.threshold;
  r.n = N;
  r.dt = dt;
  r.seed = seed;
  const auto cmp = compare_samples(a[0], b[0], family.model(), shape, test_seed(seed, 10, 0), r.notes);
  r.details = cmp.tests;
  r.statistic = cmp.statistic;
  r.value = cmp.p_value;
  r.decide();
  r.runtime_s = seconds_since(start);
  return r;
}

TestReport verify_excessive(const Characteristics& family, const ScalarField& g, const State& x0,
                            std::span<const double> times, std::size_t N, double dt, std::uint64_t seed,
                            const ExcessiveOptions& options) {
  const auto start = Clock::now();
  if (!g) throw InvalidArgument("g is empty");
  if (N < 2) throw InvalidArgument("N must be at least 2");
  const double g0 = g(x0.data());
  if (!(g0 > 0.0) || !std::isfinite(g0)) throw InvalidArgument("g(x0) must be positive and finite");
  const auto samples = sample_marginals(family, x0, times, N, dt, RngStream(seed, 3));

  TestReport r;
  r.name = options.label.empty() ? "excessive/" + family.name() : options.label;
  r.kind = ReportKind::PValue;
  r.threshold = options.threshold;
  r.n = N;
  r.dt = dt;
  r.seed = seed;

  std::vector<MeanEstimate> means;
  double p_min = 1.0;
  double z_max = -std::numeric_limits<double>::infinity();
  std::vector<double> values(N);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    for (std::size_t i = 0; i < N; ++i) {
      const double w = s.weights()[i];
      const double gx = w > 0.0 ? g(s.row(i)) : 0.0;
      if (std::isnan(gx) || gx < 0.0) throw NumericalDomainError("g is not a nonnegative function");
      values[i] = gx;
    }
    const auto est = mean_estimate(values);
    means.push_back(est);
    double z;
    double p;
    // Rounding floor: g = K h is 1 only up to a few ulps, with an SE to match.
    const double excess = est.mean - g0 * (1.0 + 1e-12);
    if (excess <= 0.0) {
      z = est.se > 0.0 && std::isfinite(est.se) ? (est.mean - g0) / std::max(est.se, 1e-12 * g0) : 0.0;
      p = normal_sf(z);
    } else if (est.se > 0.0 && std::isfinite(est.se)) {
      z = excess / est.se;
      p = normal_sf(z);
    } else {
      z = std::numeric_limits<double>::infinity();
      p = 0.0;
    }
    r.details.push_back({"t=" + format_time(times[k]), z, p});
    p_min = std::min(p_min, p);
    z_max = std::max(z_max, z);
  }
  r.statistic = z_max;
  r.value = std::min(1.0, p_min * static_cast<double>(samples.size()));
  r.decide();

  // As t decreases the means should rise toward g(x0).
  bool monotone = true;
  for (std::size_t k = 1; k < means.size(); ++k) {
    const double slack = 3.0 * std::hypot(means[k].se, means[k - 1].se) + 1e-12 * g0;
    if (means[k - 1].mean < means[k].mean - slack) monotone = false;
  }
  if (!monotone) {
    r.notes.push_back("means do not approach g(x0) monotonically as t decreases");
    r.pass = false;
  }
  r.details.push_back({"monotone", 0.0, monotone ? 1.0 : 0.0});
  r.runtime_s = seconds_since(start);
  return r;
}

TestReport verify_radial_bessel(const Characteristics& family, const State& x0, double t, std::size_t N,
                                double dt, std::uint64_t seed, const ShapeOptions& options) {
  const auto start = Clock::now();
  if (!family.is_tip()) throw Unsupported("family " + family.name() + " is not a t.i.p. family");
  if (N < 2) throw InvalidArgument("N must be at least 2");
  const double d = bessel_dimension(family);
  const double times[1] = {t};
  const auto sample = sample_marginals(family, x0, times, N, dt, RngStream(seed, 4));
  const double rho0 = family.rho(x0);

  std::vector<double> ra;
  ra.reserve(N);
  const auto& s = sample[0];
  for (std::size_t i = 0; i < N; ++i)
    if (s.weights()[i] > 0.0) ra.push_back(std::sqrt(family.model().rho(s.row(i))));
  std::vector<double> rb(N);
  const RngStream exact(seed, 5);
  for (std::size_t i = 0; i < N; ++i) {
    RngStream rng = exact.substream(i);
    rb[i] = std::sqrt(sample_besq_exact(d, rho0, t, rng));
  }
  const std::vector<double> wa(ra.size(), 1.0);
  const std::vector<double> wb(rb.size(), 1.0);

  TestReport r;
  r.name = "radial-bessel/" + family.name() + "/t=" + format_time(t);
  r.kind = ReportKind::PValue;
  r.threshold = options.threshold;
  r.n = N;
  r.dt = dt;
  r.seed = seed;
  if (ra.size() < 2) {
    r.value = 0.0;
    r.notes.push_back("fewer than two surviving paths");
  } else {
    const auto ks = ks_statistic(ra, wa, rb, wb, {options.permutations, test_seed(seed, 20, 0)});
    r.statistic = ks.statistic;
    r.value = ks.p_value;
    r.details.push_back({"ks", ks.statistic, ks.p_value});
  }
  r.decide();
  r.runtime_s = seconds_since(start);
  return r;
}

Bijection identity_bijection(std::size_t) {
  auto copy = [](std::span<const double> x, std::span<double> out) { std::copy(x.begin(), x.end(), out.begin()); };
  return {"identity", copy, copy};
}

Bijection flat_to_symmetric(std::size_t m) {
  const double r2 = std::sqrt(2.0);
  // Flat layout: diagonal first, then the strict upper triangle row by row.
  auto forward = [m, r2](std::span<const double> x, std::span<double> out) {
    std::size_t off = m;
    for (std::size_t i = 0; i < m; ++i) {
      out[sym_index(m, i, i)] = x[i];
      for (std::size_t j = i + 1; j < m; ++j) out[sym_index(m, i, j)] = x[off++] / r2;
    }
  };
  auto inverse = [m, r2](std::span<const double> y, std::span<double> out) {
    std::size_t off = m;
    for (std::size_t i = 0; i < m; ++i) {
      out[i] = y[sym_index(m, i, i)];
      for (std::size_t j = i + 1; j < m; ++j) out[off++] = y[sym_index(m, i, j)] * r2;
    }
  };
  return {"flat-to-symmetric", forward, inverse};
}

Bijection coordinate_squares(std::size_t) {
  auto forward = [](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * x[i];
  };
  auto inverse = [](std::span<const double> y, std::span<double> out) {
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::sqrt(y[i]);
  };
  return {"squares", forward, inverse};
}

TestReport verify_conjugation(const Characteristics& family_a, const Characteristics& family_b,
                              const Bijection& phi, const State& x0, double t, std::size_t N, std::uint64_t seed,
                              const ConjugationOptions& options) {
  const auto start = Clock::now();
  if (family_a.n() != family_b.n())
    throw InvalidArgument("conjugation needs families of equal dimension (" + std::to_string(family_a.n()) +
                          " vs " + std::to_string(family_b.n()) + ")");
  if (N < 2) throw InvalidArgument("N must be at least 2");
  const std::size_t dim = family_a.n();
  const ProcessModel& ma = family_a.model();
  const ProcessModel& mb = family_b.model();

  std::vector<double> y0(dim);
  phi.forward(x0.data(), y0);
  const State y0_state = family_b.make_state(y0);
  const double times[1] = {t};
  const double dt = 1e-3;
  const auto sa = sample_marginals(family_a, x0, times, N, dt, RngStream(seed, 6));
  const auto sb = sample_marginals(family_b, y0_state, times, N, dt, RngStream(seed, 7));

  WeightedSample mapped(dim);
  mapped.reserve(N);
  std::vector<double> y(dim);
  for (std::size_t i = 0; i < N; ++i) {
    phi.forward(sa[0].row(i), y);
    mapped.add(y, sa[0].weights()[i]);
  }

  // Characteristics on x0 and the first surviving A points.
  double residual = 0.0;
  std::vector<double> ia(dim), iy(dim), mapped_i(dim);
  auto check = [&](std::span<const double> x) {
    phi.forward(x, y);
    ma.involution(x, ia);
    phi.forward(ia, mapped_i);
    mb.involution(y, iy);
    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      diff = std::max(diff, std::abs(mapped_i[k] - iy[k]));
      norm = std::max(norm, std::abs(iy[k]));
    }
    residual = std::max(residual, diff / std::max(norm, 1e-300));
    const double hb = mb.h(y);
    const double vb = mb.v(y);
    residual = std::max(residual, std::abs(ma.h(x) - hb) / std::abs(hb));
    residual = std::max(residual, std::abs(ma.v(x) - vb) / std::abs(vb));
  };
  check(x0.data());
  std::size_t used = 0;
  for (std::size_t i = 0; i < N && used < options.characteristic_points; ++i) {
    if (sa[0].weights()[i] <= 0.0) continue;
    check(sa[0].row(i));
    ++used;
  }

  TestReport r;
  r.name = "conjugation/" + family_a.name() + "->" + family_b.name() + "/t=" + format_time(t);
  r.kind = ReportKind::PValue;
  r.threshold = options.threshold;
  r.n = N;
  r.dt = dt;
  r.seed = seed;
  ShapeOptions shape = options;
  shape.metric_cap = default_cap(family_b, options);
  const auto cmp = compare_samples(mapped, sb[0], mb, shape, test_seed(seed, 30, 0), r.notes);
  r.details = cmp.tests;
  r.details.push_back({"characteristics", residual, residual});
  r.statistic = residual;
  r.value = cmp.p_value;
  r.decide();
  if (!(residual <= options.characteristic_tolerance)) {
    r.pass = false;
    r.notes.push_back("characteristics do not match under the bijection");
  }
  r.runtime_s = seconds_since(start);
  return r;
}

}  // namespace inversio
