#include "inversio/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "inversio/characteristics.hpp"
#include "inversio/cli.hpp"
#include "inversio/errors.hpp"
#include "inversio/kelvin.hpp"
#include "inversio/verify.hpp"

namespace inversio {

namespace {

using Clock = std::chrono::steady_clock;
using Progress = std::function<void(const std::string&)>;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

// Accumulates the checks of one criterion.
class Criterion {
 public:
  Criterion(int id, std::string title, const Progress& progress)
      : start_(Clock::now()), progress_(progress) {
    result_.id = id;
    result_.title = std::move(title);
    result_.pass = true;
  }

  void check(const std::string& what, bool ok, const std::string& detail) {
    result_.pass = result_.pass && ok;
    ++checks_;
    if (!ok) failed_.push_back(what + " (" + detail + ")");
    if (progress_) progress_((ok ? "pass " : "FAIL ") + what + ": " + detail);
  }

  void report(const TestReport& r, bool expect_pass = true) {
    const std::string detail = (r.kind == ReportKind::PValue ? "p=" : "residual=") + fmt("%.3g", r.value) +
                               " threshold=" + fmt("%.3g", r.threshold);
    check(r.name, r.pass == expect_pass, detail);
  }

  void note(std::string text) { summary_ = std::move(text); }

  CriterionResult finish() {
    result_.runtime_s = seconds_since(start_);
    std::ostringstream d;
    d << checks_ - failed_.size() << "/" << checks_ << " checks";
    if (!summary_.empty()) d << ", " << summary_;
    for (const auto& f : failed_) d << "; failed " << f;
    result_.detail = d.str();
    return result_;
  }

 private:
  CriterionResult result_;
  Clock::time_point start_;
  const Progress& progress_;
  std::size_t checks_ = 0;
  std::vector<std::string> failed_;
  std::string summary_;
};

struct Sizes {
  std::size_t ip = 100000;
  std::size_t exit = 100000;
  std::size_t excessive = 20000;
  std::size_t radial = 100000;
  std::size_t conjugation = 100000;
  // Kept in quick mode: a rate near 0.03 needs 100 seeds to be resolved.
  std::size_t calibration = 2000;
  std::size_t calibration_seeds = 100;
};

Sizes sizes(bool quick) {
  Sizes s;
  if (quick) {
    s.ip = s.exit = s.radial = s.conjugation = 10000;
    s.excessive = 5000;
  }
  return s;
}

ExperimentConfig make_config(std::string family, FamilyParams params, std::string test, std::vector<double> x0) {
  ExperimentConfig c;
  c.family = std::move(family);
  c.params = std::move(params);
  c.test = std::move(test);
  c.x0 = std::move(x0);
  c.seed = 20240601;
  return c;
}

// One instance of every family the IP matrix covers, with a start point.
struct Instance {
  std::string family;
  FamilyParams params;
  std::vector<double> x0;
  double dt = 1e-3;
};

std::vector<Instance> ip_instances() {
  return {
      {"bm", {{"n", {3}}}, {1.0, 0.0, 0.0}},
      {"bes", {{"nu", {0.5}}}, {1.0}},
      {"bes", {{"delta", {5.0}}}, {1.5}},
      {"fspbes", {{"nu", {0.5, 1.0}}, {"sigma", {1.0, 1.5}}, {"alpha", {1.5}}}, {0.8, 1.3}},
      {"stable", {{"alpha", {1.5}}, {"n", {2}}}, {1.0, 0.5}, 1e-4},
      {"goe", {{"m", {2}}}, {1.0, 0.5, -0.5}},
      {"wishart", {{"m", {2}}, {"delta", {3.0}}}, {1.0, 0.0, 1.0}},
      {"dyson", {{"n", {2}}}, {-1.0, 1.0}},
      {"free-besq", {{"n", {2}}, {"delta", {3.0}}}, {0.5, 1.5}},
      {"noncolliding-besq", {{"n", {2}}, {"delta", {3.0}}}, {0.1, 0.3}},
      {"hyperbolic-bessel", {}, {0.7}},
  };
}

// Every registered id gets an instance; a new id without one fails loudly.
Instance identity_instance(const std::string& id) {
  static const std::map<std::string, Instance> table = {
      {"fspbes", {"fspbes", {{"nu", {-0.5, 0.0, 2.0}}, {"sigma", {1.0, 2.0, 0.5}}, {"alpha", {1.5}}}, {0.8, 1.3, 0.4}}},
      {"bes", {"bes", {{"nu", {1.5}}}, {1.0}}},
      {"besq", {"besq", {{"delta", {3.0}}}, {1.0}}},
      {"bm", {"bm", {{"n", {3}}}, {1.0, 0.0, 0.0}}},
      {"stable", {"stable", {{"alpha", {1.2}}, {"n", {2}}}, {1.0, 0.5}}},
      {"goe", {"goe", {{"m", {3}}}, {1.0, 0.2, -0.3, 0.5, 0.1, -1.0}}},
      {"wishart", {"wishart", {{"m", {3}}, {"delta", {4.0}}}, {1.0, 0.1, 0.0, 1.0, 0.2, 1.0}}},
      {"dyson", {"dyson", {{"n", {3}}}, {-1.0, 0.2, 1.0}}},
      {"free-besq", {"free-besq", {{"n", {2}}, {"delta", {3.0}}}, {0.5, 1.5}}},
      {"noncolliding-besq", {"noncolliding-besq", {{"n", {3}}, {"delta", {3.0}}}, {0.2, 0.6, 1.2}}},
      {"hyperbolic-bessel", {"hyperbolic-bessel", {}, {0.7}}},
      {"hyperbolic-bm", {"hyperbolic-bm", {{"n", {3}}}, {0.1, 0.2, 0.3}}},
  };
  const auto it = table.find(id);
  if (it == table.end()) throw Error("no acceptance instance for family '" + id + "'");
  return it->second;
}

// Points spread over the state space: marginals of the family at short and
// long times, or uniform points of the ball for families without a sampler.
std::vector<State> spread_points(const Characteristics& family, const State& x0, std::size_t count,
                                 std::uint64_t seed) {
  std::vector<State> out;
  if (family.sampler() == SamplerKind::None) {
    RngStream rng(seed, 1);
    const std::size_t n = family.n();
    std::vector<double> p(n);
    while (out.size() < count) {
      double r2 = 0.0;
      for (auto& v : p) {
        v = 2.0 * rng.uniform() - 1.0;
        r2 += v * v;
      }
      if (r2 < 1.0 && r2 > 1e-6) out.push_back(family.make_state(p));
    }
    return out;
  }
  const double times[2] = {0.2, 5.0};
  const double dt = family.sampler() == SamplerKind::Euler ? 1e-2 : 1e-3;
  const auto marg = sample_marginals(family, x0, times, count / 2 + 1, dt, RngStream(seed, 2));
  for (const auto& m : marg)
    for (std::size_t i = 0; i < m.size() && out.size() < count; ++i)
      if (m.weights()[i] > 0.0) out.push_back(State::like(x0, m.row(i)));
  return out;
}

CriterionResult identities(const Progress& progress) {
  Criterion c(1, "characteristic identities", progress);
  for (const auto& info : list_families()) {
    const Instance inst = identity_instance(info.id);
    const Characteristics family = get_family(inst.family, inst.params);
    const State x0 = family.make_state(inst.x0);
    const auto pts = spread_points(family, x0, 10000, 101);
    double worst_ii = 0.0, worst_h = 0.0, worst_v = 0.0;
    for (const auto& x : pts) {
      const State ix = family.involution(x);
      const State iix = family.involution(ix);
      double scale = 0.0, diff = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        scale = std::max(scale, std::abs(x[i]));
        diff = std::max(diff, std::abs(iix[i] - x[i]));
      }
      worst_ii = std::max(worst_ii, diff / scale);
      worst_h = std::max(worst_h, std::abs(family.excessive_h(x) * family.excessive_h(ix) - 1.0));
      worst_v = std::max(worst_v, std::abs(family.speed_v(x) * family.speed_v(ix) - 1.0));
    }
    const double worst = std::max({worst_ii, worst_h, worst_v});
    c.check(family.name(), pts.size() == 10000 && worst <= 1e-10,
            std::to_string(pts.size()) + " points, max relative error " + fmt("%.2g", worst));
  }
  return c.finish();
}

CriterionResult inversion_property(const Sizes& s, const Progress& progress) {
  Criterion c(2, "inversion property in law", progress);
  const double times[1] = {0.5};
  for (const auto& inst : ip_instances()) {
    const Characteristics family = get_family(inst.family, inst.params);
    IpOptions o;
    if (family.id() == "stable") o.metric_cap = 1.0;
    for (const auto& r : verify_ip(family, family.make_state(inst.x0), times, s.ip, inst.dt, 20240601, o))
      c.report(r);
  }
  // Negative control: h^1.5 in place of h on BES(3).
  const Characteristics bes3 = get_family("bes", {{"nu", {0.5}}});
  IpOptions o;
  const auto h = bes3.h_field();
  o.h_override = [h](std::span<const double> x) { return std::pow(h(x), 1.5); };
  o.label = "ip/" + bes3.name() + "/h^1.5 (negative control)";
  for (const auto& r : verify_ip(bes3, bes3.make_state({1.0}), times, s.ip, 1e-3, 20240601, o))
    c.check(r.name, r.value < 0.01, "p=" + fmt("%.3g", r.value) + ", expected < 0.01");
  return c.finish();
}

CriterionResult kelvin_exit(const Sizes& s, const Progress& progress) {
  Criterion c(3, "Kelvin exit identity", progress);
  struct Case {
    std::string family;
    FamilyParams params;
    std::vector<double> x0;
    std::vector<double> annulus;
  };
  const std::vector<Case> cases = {
      {"bm", {{"n", {3}}}, {1.0, 0.0, 0.0}, {0.5, 2.0}},
      {"bm", {{"n", {3}}}, {0.6, 0.3, 0.0}, {0.8, 3.0}},
      {"bes", {{"nu", {0.5}}}, {1.0}, {0.5, 2.0}},
      {"bes", {{"nu", {0.5}}}, {1.0}, {0.8, 3.0}},
  };
  for (const auto& k : cases) {
    for (const std::string f : {"one", "outer"}) {
      auto cfg = make_config(k.family, k.params, "kelvin-exit", k.x0);
      cfg.function = f;
      cfg.annulus = k.annulus;
      cfg.t_end = 50.0;
      cfg.N = s.exit;
      for (auto r : run_experiment(cfg)) {
        // Judged against max(3 SE, 2%) alone, without the step-halving allowance.
        double base = r.threshold;
        for (const auto& d : r.details)
          if (d.name == "base_tolerance") base = d.value;
        r.name += "/annulus(" + fmt("%g", k.annulus[0]) + "," + fmt("%g", k.annulus[1]) + ")";
        c.check(r.name, r.value <= base, "gap=" + fmt("%.3g", r.value) + " tolerance=" + fmt("%.3g", base));
      }
    }
  }
  return c.finish();
}

CriterionResult excessivity(const Sizes& s, const Progress& progress) {
  Criterion c(4, "excessivity", progress);
  for (const auto& inst : ip_instances()) {
    for (const std::string f : {"h", "kelvin-one", "kelvin-h"}) {
      auto cfg = make_config(inst.family, inst.params, "excessive", inst.x0);
      cfg.function = f;
      cfg.times = {0.05, 0.2, 1.0};
      cfg.N = s.excessive;
      cfg.dt = inst.dt;
      for (const auto& r : run_experiment(cfg)) c.report(r);
    }
  }
  auto neg = make_config("bes", {{"nu", {0.5}}}, "excessive", {1.0});
  neg.function = "identity";
  neg.times = {0.1, 1.0};
  neg.N = s.excessive;
  for (auto r : run_experiment(neg)) {
    r.name += " (negative control)";
    c.report(r, false);
  }
  return c.finish();
}

CriterionResult generator_kelvin(const Progress& progress) {
  Criterion c(5, "generator-level Kelvin transform", progress);
  struct Case {
    std::string family;
    FamilyParams params;
    std::vector<std::string> functions;
    std::vector<std::vector<double>> points;
  };
  const std::vector<Case> cases = {
      {"bes", {{"nu", {0.5}}}, {"one", "h"}, {{0.3}, {1.0}, {2.7}}},
      {"bes", {{"delta", {5.0}}}, {"one", "h"}, {{0.5}, {1.0}, {2.7}}},
      {"bm", {{"n", {2}}}, {"one", "linear", "product", "saddle"}, {{0.4, 0.3}, {1.2, -0.7}, {-2.0, 1.5}}},
      {"bm", {{"n", {3}}}, {"one", "linear", "product", "saddle"}, {{0.4, 0.3, 0.2}, {1.2, -0.7, 0.5}, {-2.0, 1.5, 1.0}}},
      {"hyperbolic-bessel", {}, {"one", "h"}, {{0.3}, {0.7}, {1.5}}},
  };
  for (const auto& k : cases) {
    for (const auto& f : k.functions) {
      double worst = 0.0;
      std::string name;
      for (const auto& x : k.points) {
        auto cfg = make_config(k.family, k.params, "generator", x);
        cfg.function = f;
        for (const auto& r : run_experiment(cfg)) {
          worst = std::max(worst, r.value);
          name = r.name;
        }
      }
      c.check(name, worst <= 1e-6, "max |L(Kf)| over 3 points " + fmt("%.2g", worst));
    }
  }
  // Hyperbolic BM: f harmonic, h (f o I) not.
  auto neg = make_config("hyperbolic-bm", {{"n", {3}}}, "generator", {0.0, 0.0, 0.5});
  neg.function = "poisson";
  neg.expect = "defect";
  for (auto r : run_experiment(neg)) {
    r.name += " at (0,0,0.5)";
    c.check(r.name, r.value >= 1e-2, "|L(Kf)|=" + fmt("%.3g", r.value) + ", expected >= 0.01");
  }
  return c.finish();
}

CriterionResult potentials(const Progress& progress) {
  Criterion c(6, "potential relation", progress);
  struct Case {
    std::string family;
    FamilyParams params;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
  };
  const std::vector<Case> cases = {
      {"bes",
       {{"delta", {5.0}}},
       {{{1.0}, {2.0}}, {{0.5}, {0.8}}, {{2.0}, {0.7}}, {{1.3}, {3.1}}, {{0.4}, {2.5}}}},
      {"fspbes",
       {{"nu", {1.0, 1.0}}, {"sigma", {1.0, 1.0}}, {"alpha", {2.0}}},
       {{{0.7, 1.2}, {1.5, 0.4}},
        {{1.0, 1.0}, {0.6, 0.9}},
        {{0.3, 2.0}, {1.1, 1.4}},
        {{2.2, 0.5}, {0.8, 0.8}},
        {{1.5, 1.5}, {0.4, 2.6}}}},
  };
  for (const auto& k : cases) {
    const Characteristics family = get_family(k.family, k.params);
    for (const auto& [x, y] : k.pairs) {
      const double r = potential_relation_residual(family, family.make_state(x), family.make_state(y));
      std::string name = "potential/" + family.name() + "/x=" + fmt("%g", x[0]) + (x.size() > 1 ? "," : "") +
                         (x.size() > 1 ? fmt("%g", x[1]) : "");
      c.check(name, r <= 0.02, "relative residual " + fmt("%.3g", r));
    }
  }
  // Green function of BES(5) from its scale s(x) = -x^-3 / 3 and speed
  // density m(y) = 2 y^4: U(x, y) = (s(inf) - s(max(x, y))) m(y).
  const Characteristics bes5 = get_family("bes", {{"delta", {5.0}}});
  for (const auto& [x, y] : std::vector<std::pair<double, double>>{{1.0, 2.0}, {2.0, 0.7}, {0.5, 0.5}}) {
    const double oracle = 2.0 * std::pow(y, 4) / (3.0 * std::pow(std::max(x, y), 3));
    const double value = potential_kernel(bes5, bes5.make_state({x}), bes5.make_state({y})).value;
    const double rel = std::abs(value - oracle) / oracle;
    c.check("green/" + bes5.name() + "/(" + fmt("%g", x) + "," + fmt("%g", y) + ")", rel <= 0.01,
            "U=" + fmt("%.6g", value) + " oracle=" + fmt("%.6g", oracle));
  }
  return c.finish();
}

CriterionResult radial_bessel(const Sizes& s, const Progress& progress) {
  Criterion c(7, "radial Bessel condition", progress);
  const std::vector<Instance> cases = {
      {"wishart", {{"m", {2}}, {"delta", {3.0}}}, {1.0, 0.2, 0.5}},
      {"dyson", {{"n", {2}}}, {-1.0, 1.0}},
      {"fspbes", {{"nu", {0.5, 1.0}}, {"sigma", {1.0, 1.5}}, {"alpha", {1.5}}}, {0.8, 1.3}},
  };
  for (const auto& inst : cases) {
    auto cfg = make_config(inst.family, inst.params, "radial-bessel", inst.x0);
    cfg.times = {0.7};
    cfg.N = s.radial;
    for (const auto& r : run_experiment(cfg)) c.report(r);
  }
  return c.finish();
}

double min_gap(const State& x) {
  double g = INFINITY;
  for (std::size_t i = 1; i < x.size(); ++i) g = std::min(g, x[i] - x[i - 1]);
  return g;
}

CriterionResult self_duality(const Progress& progress) {
  Criterion c(8, "self-duality", progress);
  const std::vector<Instance> cases = {
      {"fspbes", {{"nu", {0.5, 1.0}}, {"sigma", {1.0, 1.5}}, {"alpha", {1.5}}}, {0.8, 1.3}},
      {"dyson", {{"n", {2}}}, {-1.0, 1.0}},
      {"dyson", {{"n", {3}}}, {-1.0, 0.2, 1.0}},
  };
  std::size_t skipped = 0;
  for (const auto& inst : cases) {
    const Characteristics family = get_family(inst.family, inst.params);
    const State x0 = family.make_state(inst.x0);
    const bool ordered = family.id() == "dyson";
    RngStream rng(20240601, 8);
    const double times[2] = {0.5, 2.0};
    const auto pts = sample_marginals(family, x0, times, 4000, 1e-3, rng.substream(1));
    double worst = 0.0, worst_near = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < pts[0].size() && used < 1000; ++i) {
      const double t = 0.05 * std::pow(100.0, rng.uniform());
      if (pts[0].weights()[i] <= 0.0 || pts[1].weights()[i] <= 0.0) continue;
      const State x = State::like(x0, pts[0].row(i));
      const State y = State::like(x0, pts[1].row(i));
      const double r = self_duality_residual(family, t, x, y);
      // Ordered families: the determinant cancels near collisions.
      if (ordered && min_gap(x) * min_gap(y) / t <= 1e-3) {
        worst_near = std::max(worst_near, r);
        ++skipped;
        continue;
      }
      worst = std::max(worst, r);
      ++used;
    }
    std::string detail = std::to_string(used) + " points, max residual " + fmt("%.2g", worst);
    if (ordered) detail += ", near-collision max " + fmt("%.2g", worst_near);
    c.check("self-duality/" + family.name(), used == 1000 && worst <= 1e-10, detail);
  }
  c.note(std::to_string(skipped) + " near-collision triples (gap(x) gap(y) / t <= 1e-3) reported apart");
  return c.finish();
}

CriterionResult conjugations(const Sizes& s, const Progress& progress) {
  Criterion c(9, "conjugation", progress);
  auto goe = make_config("bm", {{"n", {3}}}, "conjugation", {1.0, -0.5, 0.7});
  goe.target = "goe";
  goe.target_params = {{"m", {2}}};
  auto besq = make_config("fspbes", {{"nu", {0.5, 0.5}}, {"alpha", {1.0}}}, "conjugation", {0.8, 1.1});
  besq.target = "free-besq";
  besq.target_params = {{"n", {2}}, {"delta", {3.0}}};
  for (auto cfg : {goe, besq}) {
    cfg.times = {0.6};
    cfg.N = s.conjugation;
    for (const auto& r : run_experiment(cfg)) c.report(r);
  }
  return c.finish();
}

CriterionResult calibration(const Sizes& s, double elapsed_before, const Progress& progress) {
  Criterion c(10, "calibration under the null", progress);
  const Characteristics family = get_family("bm", {{"n", {2}}});
  const State x0 = family.make_state({1.0, 0.5});
  std::size_t rejected = 0;
  for (std::size_t k = 0; k < s.calibration_seeds; ++k) {
    const auto r = verify_ip_self(family, x0, 0.5, s.calibration, 1e-3, 1000 + k);
    if (r.value < 0.05) ++rejected;
  }
  const double rate = static_cast<double>(rejected) / static_cast<double>(s.calibration_seeds);
  c.check("false rejections at 0.05 over " + std::to_string(s.calibration_seeds) + " seeds",
          rate >= 0.01 && rate <= 0.12, "rate " + fmt("%.2f", rate) + ", expected in [0.01, 0.12]");
  const double total = elapsed_before + c.finish().runtime_s;
  c.check("suite runtime", total <= 3600.0, fmt("%.0f s", total) + ", expected <= 3600 s");
  return c.finish();
}

}  // namespace

std::vector<CriterionResult> run_acceptance(bool quick, const Progress& progress) {
  const Sizes s = sizes(quick);
  const auto start = Clock::now();
  std::vector<CriterionResult> out;
  out.push_back(identities(progress));
  out.push_back(inversion_property(s, progress));
  out.push_back(kelvin_exit(s, progress));
  out.push_back(excessivity(s, progress));
  out.push_back(generator_kelvin(progress));
  out.push_back(potentials(progress));
  out.push_back(radial_bessel(s, progress));
  out.push_back(self_duality(progress));
  out.push_back(conjugations(s, progress));
  out.push_back(calibration(s, seconds_since(start), progress));
  return out;
}

void print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results) {
  for (const auto& r : results) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%7.1fs", r.runtime_s);
    out << "criterion " << r.id << " " << (r.pass ? "PASS" : "FAIL") << " " << buf << "  " << r.title << ": "
        << r.detail << "\n";
  }
}

}  // namespace inversio
