#include "inversio/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "inversio/errors.hpp"
#include "inversio/parallel.hpp"
#include "inversio/rng.hpp"
#include "inversio/simd/kernels.hpp"
#include "inversio/special.hpp"

namespace inversio {

namespace {

template <class T>
void shuffle(std::vector<T>& v, RngStream& rng) {
  std::shuffle(v.begin(), v.end(), rng.engine());
}

struct Pooled {
  std::vector<double> w;
  std::vector<unsigned char> group_end;
  std::vector<unsigned char> labels;
};

double ks_scan(const Pooled& p, const std::vector<unsigned char>& labels) {
  double wa = 0.0, wb = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? wa : wb) += p.w[i];
  if (!(wa > 0.0) || !(wb > 0.0)) return 0.0;
  const double ia = 1.0 / wa, ib = 1.0 / wb;
  double ca = 0.0, cb = 0.0, best = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      ca += p.w[i] * ia;
    } else {
      cb += p.w[i] * ib;
    }
    if (p.group_end[i]) best = std::max(best, std::abs(ca - cb));
  }
  return best;
}

double p_from_counts(std::size_t exceed, std::size_t total) {
  return (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(total));
}

void check_mass(std::span<const double> w, const char* side) {
  double s = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string("invalid weight in sample ") + side);
    s += v;
  }
  if (!(s > 0.0)) throw InvalidArgument(std::string("sample ") + side + " has zero mass");
}

}  // namespace

TestOutcome ks_statistic(std::span<const double> xa, std::span<const double> wa, std::span<const double> xb,
                         std::span<const double> wb, const PermutationOptions& options) {
  if (xa.size() != wa.size() || xb.size() != wb.size()) throw InvalidArgument("values and weights differ in length");
  check_mass(wa, "a");
  check_mass(wb, "b");
  const std::size_t n = xa.size() + xb.size();
  std::vector<double> v(n), w(n);
  std::vector<unsigned char> lab(n);
  for (std::size_t i = 0; i < xa.size(); ++i) {
    v[i] = xa[i];
    w[i] = wa[i];
    lab[i] = 1;
  }
  for (std::size_t i = 0; i < xb.size(); ++i) {
    v[xa.size() + i] = xb[i];
    w[xa.size() + i] = wb[i];
    lab[xa.size() + i] = 0;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  Pooled p;
  p.w.resize(n);
  p.labels.resize(n);
  p.group_end.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    p.w[k] = w[order[k]];
    p.labels[k] = lab[order[k]];
  }
  for (std::size_t k = 0; k < n; ++k) p.group_end[k] = k + 1 == n || v[order[k + 1]] != v[order[k]];

  TestOutcome out;
  out.statistic = ks_scan(p, p.labels);
  const std::size_t perms = options.permutations;
  if (perms == 0) return out;
  std::vector<unsigned char> exceed(perms, 0);
  const double tol = 1e-12;
  parallel_for(perms, [&](std::size_t begin, std::size_t end) {
    std::vector<unsigned char> labels;
    for (std::size_t k = begin; k < end; ++k) {
      RngStream rng(options.seed, 0x4B53000000000000ULL + k);
      labels = p.labels;
      shuffle(labels, rng);
      exceed[k] = ks_scan(p, labels) >= out.statistic - tol;
    }
  });
  out.p_value = p_from_counts(static_cast<std::size_t>(std::count(exceed.begin(), exceed.end(), 1)), perms);
  return out;
}

TestOutcome ks_statistic(const WeightedSample& a, const WeightedSample& b, const PermutationOptions& options) {
  if (a.dim() != 1 || b.dim() != 1) throw InvalidArgument("KS needs one-dimensional samples");
  return ks_statistic(a.values(), a.weights(), b.values(), b.weights(), options);
}

WeightedSample subsample(const WeightedSample& s, std::size_t cap, std::uint64_t seed, std::uint64_t stream) {
  if (cap == 0 || s.size() <= cap) return s;
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  RngStream rng(seed, stream);
  shuffle(idx, rng);
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  WeightedSample out(s.dim());
  out.reserve(cap);
  for (std::size_t i : idx) out.add(s.row(i), s.weights()[i]);
  out.origin = s.origin;
  return out;
}

TestOutcome energy_distance(const WeightedSample& a_in, const WeightedSample& b_in, std::size_t boot,
                            const EnergyOptions& options) {
  if (a_in.dim() != b_in.dim()) throw InvalidArgument("energy distance needs samples of equal dimension");
  check_mass(a_in.weights(), "a");
  check_mass(b_in.weights(), "b");
  const WeightedSample a = subsample(a_in, options.max_points_per_side, options.seed, 0x5355424100ULL);
  const WeightedSample b = subsample(b_in, options.max_points_per_side, options.seed, 0x5355424200ULL);
  if (!(a.total_weight() > 0.0) || !(b.total_weight() > 0.0)) {
    throw InvalidArgument("subsample lost all mass; pass positive-weight points only");
  }
  const std::size_t dim = a.dim();
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<double> points;
  points.reserve(n * dim);
  points.insert(points.end(), a.values().begin(), a.values().end());
  points.insert(points.end(), b.values().begin(), b.values().end());
  std::vector<double> w(n);
  std::vector<unsigned char> lab(n);
  for (std::size_t i = 0; i < na; ++i) {
    w[i] = a.weights()[i];
    lab[i] = 1;
  }
  for (std::size_t i = 0; i < nb; ++i) w[na + i] = b.weights()[i];

  std::vector<float> dist(n * n);
  simd::distance_matrix(points, dim, options.cap, dist);

  auto fill_u = [&](const std::vector<unsigned char>& labels, double* u) {
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) (labels[i] ? sa : sb) += w[i];
    const double ia = sa > 0.0 ? 1.0 / sa : 0.0, ib = sb > 0.0 ? -1.0 / sb : 0.0;
    for (std::size_t i = 0; i < n; ++i) u[i] = w[i] * (labels[i] ? ia : ib);
  };

  TestOutcome out;
  {
    std::vector<double> u(n);
    fill_u(lab, u.data());
    double q = 0.0;
    simd::quadratic_forms(dist, n, u, 1, {&q, 1});
    out.statistic = -q;
  }
  if (boot == 0) return out;
  constexpr std::size_t kBlock = 4;
  const std::size_t blocks = (boot + kBlock - 1) / kBlock;
  std::vector<double> stats(boot);
  parallel_for(blocks, [&](std::size_t begin, std::size_t end) {
    std::vector<double> u(kBlock * n);
    std::vector<unsigned char> labels;
    double q[kBlock];
    for (std::size_t blk = begin; blk < end; ++blk) {
      const std::size_t first = blk * kBlock;
      const std::size_t count = std::min(kBlock, boot - first);
      for (std::size_t c = 0; c < count; ++c) {
        RngStream rng(options.seed, 0x45440000000000ULL + first + c);
        labels = lab;
        shuffle(labels, rng);
        fill_u(labels, u.data() + c * n);
      }
      simd::quadratic_forms(dist, n, {u.data(), count * n}, count, {q, count});
      for (std::size_t c = 0; c < count; ++c) stats[first + c] = -q[c];
    }
  });
  const double tol = 1e-12 * std::max(1.0, std::abs(out.statistic));
  std::size_t exceed = 0;
  for (double s : stats) exceed += s >= out.statistic - tol;
  out.p_value = p_from_counts(exceed, boot);
  return out;
}

MeanEstimate mean_estimate(std::span<const double> values) {
  MeanEstimate e;
  const auto n = static_cast<double>(values.size());
  if (values.empty()) return e;
  double s1 = 0.0, s2 = 0.0;
  const std::vector<double> ones(values.size(), 1.0);
  simd::weighted_moments(values, ones, s1, s2);
  e.mean = s1 / n;
  if (values.size() > 1) {
    // Second pass about the mean to avoid cancellation.
    std::vector<double> centred(values.begin(), values.end());
    for (double& c : centred) c -= e.mean;
    simd::weighted_moments(centred, ones, s1, s2);
    e.se = std::sqrt(std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0)) / n);
  }
  return e;
}

TestOutcome two_mean_test(std::span<const double> a, std::span<const double> b) {
  const auto ea = mean_estimate(a), eb = mean_estimate(b);
  const double se = std::hypot(ea.se, eb.se);
  TestOutcome out;
  const double diff = ea.mean - eb.mean;
  if (se == 0.0) {
    out.statistic = 0.0;
    out.p_value = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(ea.mean)) ? 1.0 : 0.0;
    return out;
  }
  out.statistic = diff / se;
  out.p_value = normal_two_sided_p(out.statistic);
  return out;
}

}  // namespace inversio
