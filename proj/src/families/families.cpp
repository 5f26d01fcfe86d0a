#include <algorithm>
#include <cmath>
#include <cstdio>

#include "common.hpp"
#include "inversio/errors.hpp"

namespace inversio {

namespace detail {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string format_list(std::span<const double> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += format_number(v[i]);
  }
  return s + "]";
}

}  // namespace detail

namespace {

std::size_t count_param(const FamilyParams& p, const std::string& key) {
  const double v = p.scalar(key);
  if (!(v >= 1.0) || v != std::floor(v) || v > 64.0) {
    throw InvalidArgument(key + " must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

struct Entry {
  const char* id;
  std::vector<std::string> params;
  const char* summary;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"fspbes", {"nu", "sigma", "alpha"}, "free scaled power Bessel process: X_i = R_i^alpha, R_i Bessel(nu_i) at speed sigma_i^2"},
      {"bes", {"nu", "delta"}, "Bessel process (fspbes with n = 1, alpha = 1, sigma = 1); give nu or delta = 2 nu + 2"},
      {"besq", {"delta"}, "squared Bessel process (fspbes with n = 1, alpha = 2)"},
      {"bm", {"n"}, "Brownian motion in R^n, spherical inversion"},
      {"stable", {"alpha", "n"}, "isotropic alpha-stable process in R^n, alpha < n"},
      {"goe", {"m"}, "Gaussian orthogonal ensemble matrix process (symmetric m x m)"},
      {"wishart", {"m", "delta"}, "Wishart process on positive semidefinite m x m matrices"},
      {"dyson", {"n"}, "Dyson Brownian motion (beta = 2) on the ordered chamber"},
      {"free-besq", {"n", "delta"}, "n independent BESQ(delta) processes"},
      {"noncolliding-besq", {"n", "delta"}, "n BESQ(delta) processes conditioned never to collide (Euler sampler)"},
      {"hyperbolic-bessel", {"n"}, "radial part of hyperbolic Brownian motion, n = 3"},
      {"hyperbolic-bm", {"n"}, "hyperbolic Brownian motion on the 3-ball with the lifted radial inversion (generator only)"},
  };
  return entries;
}

const Entry& find_entry(std::string_view id) {
  for (const auto& e : registry()) {
    if (id == e.id) return e;
  }
  throw InvalidArgument("unknown family '" + std::string(id) + "'");
}

}  // namespace

std::vector<FamilyInfo> list_families() {
  std::vector<FamilyInfo> out;
  for (const auto& e : registry()) {
    std::string params;
    for (const auto& p : e.params) params += (params.empty() ? "" : ", ") + p;
    out.push_back({e.id, params, e.summary});
  }
  return out;
}

std::vector<std::string> family_parameter_names(std::string_view id) { return find_entry(id).params; }

Characteristics get_family(std::string_view id, const FamilyParams& params) {
  const Entry& entry = find_entry(id);
  for (const auto& [key, value] : params.values()) {
    if (std::find(entry.params.begin(), entry.params.end(), key) == entry.params.end()) {
      throw InvalidArgument("family '" + std::string(id) + "' has no parameter '" + key + "'");
    }
    for (double v : value) {
      if (!std::isfinite(v)) throw InvalidArgument(key + " must be finite");
    }
  }
  using namespace detail;
  if (id == "fspbes") {
    return Characteristics(make_fspbes(params.list("nu"), params.has("sigma") ? params.list("sigma") : std::vector<double>{},
                                       params.scalar_or("alpha", 1.0), "fspbes"));
  }
  if (id == "bes") {
    double nu;
    if (params.has("nu") && params.has("delta")) throw InvalidArgument("give either nu or delta, not both");
    if (params.has("delta")) {
      const double delta = params.scalar("delta");
      if (!(delta > 0.0)) throw InvalidArgument("delta must be > 0");
      nu = 0.5 * delta - 1.0;
    } else {
      nu = params.scalar("nu");
    }
    return Characteristics(make_fspbes({nu}, {1.0}, 1.0, "bes"));
  }
  if (id == "besq") {
    const double delta = params.scalar("delta");
    if (!(delta > 0.0)) throw InvalidArgument("delta must be > 0");
    return Characteristics(make_fspbes({0.5 * delta - 1.0}, {1.0}, 2.0, "besq"));
  }
  if (id == "bm") return Characteristics(make_bm(count_param(params, "n")));
  if (id == "stable") {
    return Characteristics(make_stable(params.scalar("alpha"), count_param(params, "n")));
  }
  if (id == "goe") return Characteristics(make_goe(count_param(params, "m")));
  if (id == "wishart") return Characteristics(make_wishart(count_param(params, "m"), params.scalar("delta")));
  if (id == "dyson") return Characteristics(make_dyson(count_param(params, "n")));
  if (id == "free-besq") return Characteristics(make_free_besq(count_param(params, "n"), params.scalar("delta")));
  if (id == "noncolliding-besq") {
    return Characteristics(make_noncolliding_besq(count_param(params, "n"), params.scalar("delta")));
  }
  if (params.has("n") && params.scalar("n") != 3.0) throw InvalidArgument("n must be 3 for hyperbolic families");
  if (id == "hyperbolic-bessel") return Characteristics(make_hyperbolic_bessel());
  return Characteristics(make_hyperbolic_ball());
}

double density(const Characteristics& family, double t, const State& x, const State& y) {
  if (!family.has_density()) throw Unsupported(family.name() + " has no closed-form density");
  return family.density(t, x, y);
}

double self_duality_residual(const Characteristics& family, double t, const State& x, const State& y) {
  if (!family.has_density() || !family.has_theta()) {
    throw Unsupported(family.name() + " has no density/theta pair");
  }
  const ProcessModel& m = family.model();
  const double a = m.log_density(t, x.data(), y.data()) + m.log_theta(x.data());
  const double b = m.log_density(t, y.data(), x.data()) + m.log_theta(y.data());
  if (a == b) return 0.0;
  if (!std::isfinite(a) && !std::isfinite(b)) return 0.0;
  // |e^a - e^b| / max(e^a, e^b)
  return -std::expm1(-std::abs(a - b));
}

double radial_process_value(const Characteristics& family, const State& s) {
  if (s.is_cemetery()) throw InvalidArgument("radial value of the cemetery");
  return std::sqrt(family.rho(s));
}

double bessel_dimension(const Characteristics& family) {
  const auto tip = family.model().tip();
  if (!tip) throw Unsupported(family.name() + " is not a t.i.p. family");
  return (tip->beta + static_cast<double>(family.n())) * tip->alpha;
}

}  // namespace inversio
