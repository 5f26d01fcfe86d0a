#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inversio/model.hpp"
#include "inversio/state.hpp"

namespace inversio {

// The IP characteristics (I, h, v) of one family together with its t.i.p.
// data, sampler and optional density. Immutable and cheap to copy.
class Characteristics {
 public:
  explicit Characteristics(std::shared_ptr<const ProcessModel> model);

  const ProcessModel& model() const noexcept { return *model_; }
  std::shared_ptr<const ProcessModel> model_ptr() const noexcept { return model_; }

  std::string id() const { return model_->id(); }
  std::string name() const { return model_->name(); }
  std::size_t n() const { return model_->dim(); }
  std::optional<double> alpha() const;
  std::optional<double> beta() const;
  bool is_tip() const { return model_->tip().has_value(); }
  SamplerKind sampler() const { return model_->sampler_kind(); }

  // Builds a state of this family's layout from raw entries.
  State make_state(std::vector<double> data) const;
  bool in_domain(const State& s) const;

  double rho(const State& s) const;
  State involution(const State& s) const;
  double excessive_h(const State& s) const;
  double speed_v(const State& s) const;
  double jacobian_I(const State& s) const;

  ScalarField h_field() const;
  ScalarField v_field() const;

  bool has_density() const { return model_->has_density(); }
  double density(double t, const State& x, const State& y) const;
  bool has_theta() const { return model_->has_theta(); }
  double theta(const State& y) const;
  bool has_generator() const { return model_->has_generator(); }

 private:
  std::shared_ptr<const ProcessModel> model_;
};

// Named real-valued parameters; scalars are one-element lists.
class FamilyParams {
 public:
  FamilyParams() = default;
  FamilyParams(std::initializer_list<std::pair<const std::string, std::vector<double>>> init)
      : values_(init) {}

  void set(const std::string& key, std::vector<double> value) { values_[key] = std::move(value); }
  void set(const std::string& key, double value) { values_[key] = {value}; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  double scalar(const std::string& key) const;
  double scalar_or(const std::string& key, double fallback) const;
  const std::vector<double>& list(const std::string& key) const;
  const std::map<std::string, std::vector<double>>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::vector<double>> values_;
};

struct FamilyInfo {
  std::string id;
  std::string parameters;
  std::string summary;
};

Characteristics get_family(std::string_view id, const FamilyParams& params);
std::vector<FamilyInfo> list_families();
// Parameter names accepted by a family id (used by config validation).
std::vector<std::string> family_parameter_names(std::string_view id);

double density(const Characteristics& family, double t, const State& x, const State& y);
double self_duality_residual(const Characteristics& family, double t, const State& x, const State& y);
double radial_process_value(const Characteristics& family, const State& s);
// Dimension (beta + n) * alpha of the Bessel process sqrt(rho(X)).
double bessel_dimension(const Characteristics& family);

}  // namespace inversio
