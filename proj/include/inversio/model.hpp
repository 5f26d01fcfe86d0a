#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inversio/rng.hpp"
#include "inversio/state.hpp"

namespace inversio {

// Real function on raw state data. Callers handle the cemetery (value 0).
using ScalarField = std::function<double(std::span<const double>)>;
// out = F(x), out has the state dimension.
using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

enum class SamplerKind { Exact, Euler, Jump, None };
enum class Interpolation { Linear, Previous };

struct TipData {
  double alpha;
  double beta;
};

constexpr double kAbsorptionEpsilon = 1e-8;

class Stepper {
 public:
  virtual ~Stepper() = default;
  // Binds the stepper to a starting state (hidden variables are drawn here).
  virtual void reset(std::span<const double> x0, RngStream& rng) = 0;
  // Moves x forward by dt; false when the transition leaves the state space.
  virtual bool advance(double dt, RngStream& rng, std::span<double> x) = 0;
};

class ProcessModel : public std::enable_shared_from_this<ProcessModel> {
 public:
  virtual ~ProcessModel() = default;

  virtual std::string id() const = 0;
  virtual std::string name() const = 0;
  virtual StateKind kind() const { return StateKind::Vector; }
  virtual std::size_t order() const { return dim(); }
  virtual std::size_t dim() const = 0;

  virtual std::optional<TipData> tip() const { return std::nullopt; }
  virtual double rho(std::span<const double> x) const;
  // Radial coordinate used by annular regions: sqrt(rho) by default.
  virtual double radial(std::span<const double> x) const;
  // radial(I x) as a function of radial(x).
  virtual double radial_involution(double r) const { return 1.0 / r; }
  // Moves x along its ray so that radial(out) = r.
  virtual void scale_to_radial(std::span<const double> x, double r, std::span<double> out) const;

  virtual void involution(std::span<const double> x, std::span<double> out) const = 0;
  virtual double h(std::span<const double> x) const = 0;
  virtual double v(std::span<const double> x) const = 0;
  virtual double jacobian(std::span<const double> x) const = 0;
  virtual bool in_domain(std::span<const double> x) const = 0;
  virtual bool absorbed(std::span<const double> x) const;
  virtual bool transient() const { return true; }
  virtual std::vector<std::string> flags() const { return {}; }

  virtual SamplerKind sampler_kind() const = 0;
  virtual std::unique_ptr<Stepper> make_stepper() const;
  virtual Interpolation interpolation() const { return Interpolation::Linear; }
  // Time scale of the motion near x; caps explicit steps.
  virtual double clock_scale(std::span<const double> x) const;
  // Euler substep as a fraction of clock_scale.
  virtual double euler_relative_step() const { return 1e-3; }

  virtual bool has_density() const { return false; }
  virtual double log_density(double t, std::span<const double> x, std::span<const double> y) const;
  virtual bool has_theta() const { return false; }
  virtual double log_theta(std::span<const double> y) const;

  // Diffusion generator L f = b . grad f + 1/2 tr(a Hess f) in state coordinates.
  virtual bool has_generator() const { return false; }
  virtual void drift(std::span<const double> x, std::span<double> out) const;
  // Row-major dim x dim matrix a(x).
  virtual void diffusion(std::span<const double> x, std::span<double> out) const;
  virtual std::size_t noise_dim() const { return dim(); }
  // out = sigma(x) * noise with sigma sigma^T = a.
  virtual void disperse(std::span<const double> x, std::span<const double> noise,
                        std::span<double> out) const;
  // Projection applied after each Euler step.
  virtual void project(std::span<double>) const {}
};

// Euler-Maruyama transitions of a model's generator. Steps longer than
// euler_relative_step * clock_scale are split when `substep` is set. With
// `kill_on_exit` a raw step outside the domain kills instead of being projected.
class EulerStepper : public Stepper {
 public:
  EulerStepper(std::shared_ptr<const ProcessModel> model, VectorField extra_drift = {},
               bool substep = true, bool kill_on_exit = false);
  void reset(std::span<const double> x0, RngStream& rng) override;
  bool advance(double dt, RngStream& rng, std::span<double> x) override;

 private:
  std::shared_ptr<const ProcessModel> model_;
  VectorField extra_drift_;
  bool substep_;
  bool kill_on_exit_;
  std::vector<double> drift_, extra_, noise_, kick_;
};

}  // namespace inversio
