#include <Eigen/Dense>
#include <cmath>

#include "common.hpp"
#include "inversio/errors.hpp"

namespace inversio::detail {

namespace {

Eigen::MatrixXd unpack(std::size_t m, std::span<const double> u) {
  Eigen::MatrixXd a(m, m);
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j, ++k) {
      a(i, j) = u[k];
      a(j, i) = u[k];
    }
  }
  return a;
}

void pack(const Eigen::MatrixXd& a, std::span<double> u) {
  const auto m = static_cast<std::size_t>(a.rows());
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j, ++k) u[k] = 0.5 * (a(i, j) + a(j, i));
  }
}

double trace(std::size_t m, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += u[sym_index(m, i, i)];
  return s;
}

double min_eigenvalue(std::size_t m, std::span<const double> u) {
  if (m == 1) return u[0];
  if (m == 2) {
    const double a = u[0], b = u[1], c = u[2];
    return 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(unpack(m, u), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// X = N^T N with N a delta x m Brownian matrix (integer delta).
class WishartExactStepper : public Stepper {
 public:
  WishartExactStepper(std::size_t m, std::size_t delta) : m_(m), delta_(delta), n_(delta * m, 0.0) {}

  void reset(std::span<const double> x0, RngStream&) override {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(unpack(m_, x0));
    const auto& lam = es.eigenvalues();
    const auto& vec = es.eigenvectors();
    std::fill(n_.begin(), n_.end(), 0.0);
    const double tr = lam.sum();
    // Rows sqrt(lambda_k) u_k^T for the largest eigenvalues; the rest must vanish.
    for (std::size_t r = 0; r < m_; ++r) {
      const auto k = static_cast<Eigen::Index>(m_ - 1 - r);
      const double l = std::max(lam(k), 0.0);
      if (r >= delta_) {
        if (l > 1e-12 * tr) throw DomainError("Wishart start has rank above delta");
        continue;
      }
      for (std::size_t j = 0; j < m_; ++j) n_[r * m_ + j] = std::sqrt(l) * vec(static_cast<Eigen::Index>(j), k);
    }
  }

  bool advance(double dt, RngStream& rng, std::span<double> x) override {
    const double s = std::sqrt(dt);
    for (double& e : n_) e += s * rng.normal();
    std::size_t k = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = i; j < m_; ++j, ++k) {
        double acc = 0.0;
        for (std::size_t r = 0; r < delta_; ++r) acc += n_[r * m_ + i] * n_[r * m_ + j];
        x[k] = acc;
      }
    }
    return true;
  }

 private:
  std::size_t m_, delta_;
  std::vector<double> n_;
};

class WishartModel : public ProcessModel {
 public:
  WishartModel(std::size_t m, double delta) : m_(m), delta_(delta) {}

  std::string id() const override { return "wishart"; }
  std::string name() const override {
    return "wishart(m=" + std::to_string(m_) + ", delta=" + format_number(delta_) + ")";
  }
  StateKind kind() const override { return StateKind::SymMatrix; }
  std::size_t order() const override { return m_; }
  std::size_t dim() const override { return sym_size(m_); }
  std::optional<TipData> tip() const override {
    const double m = static_cast<double>(m_);
    return TipData{2.0, 0.5 * m * (delta_ - m - 1.0)};
  }
  double rho(std::span<const double> x) const override { return trace(m_, x); }
  void involution(std::span<const double> x, std::span<double> out) const override {
    const double tr = trace(m_, x);
    scale_into(x, 1.0 / (tr * tr), out);
  }
  double h(std::span<const double> x) const override {
    return std::pow(trace(m_, x), 1.0 - 0.5 * delta_ * static_cast<double>(m_));
  }
  double v(std::span<const double> x) const override {
    const double tr = trace(m_, x);
    return tr * tr;
  }
  double jacobian(std::span<const double> x) const override {
    const double m = static_cast<double>(m_);
    return std::pow(trace(m_, x), -m * (m + 1.0));
  }
  bool in_domain(std::span<const double> x) const override {
    if (x.size() != dim() || !all_finite(x)) return false;
    const double tr = trace(m_, x);
    return tr > 0.0 && min_eigenvalue(m_, x) >= -1e-12 * tr;
  }
  bool transient() const override { return static_cast<double>(m_) * delta_ > 2.0; }
  std::vector<std::string> flags() const override {
    if (!transient()) return {"non-transient"};
    return {};
  }

  bool integer_delta() const { return delta_ == std::floor(delta_); }
  SamplerKind sampler_kind() const override {
    return integer_delta() ? SamplerKind::Exact : SamplerKind::Euler;
  }
  std::unique_ptr<Stepper> make_stepper() const override {
    if (integer_delta()) return std::make_unique<WishartExactStepper>(m_, static_cast<std::size_t>(delta_));
    return std::make_unique<EulerStepper>(shared_from_this());
  }

  bool has_generator() const override { return true; }
  void drift(std::span<const double>, std::span<double> out) const override {
    std::size_t k = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = i; j < m_; ++j, ++k) out[k] = i == j ? delta_ : 0.0;
    }
  }
  // d<X_ij, X_kl> = X_ik d_jl + X_il d_jk + X_jk d_il + X_jl d_ik.
  void diffusion(std::span<const double> x, std::span<double> out) const override {
    const Eigen::MatrixXd a = unpack(m_, x);
    const std::size_t n = dim();
    auto kd = [](std::size_t p, std::size_t q) { return p == q ? 1.0 : 0.0; };
    std::size_t r = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = i; j < m_; ++j, ++r) {
        std::size_t c = 0;
        for (std::size_t k = 0; k < m_; ++k) {
          for (std::size_t l = k; l < m_; ++l, ++c) {
            const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
            const auto K = static_cast<Eigen::Index>(k), L = static_cast<Eigen::Index>(l);
            out[r * n + c] = a(I, K) * kd(j, l) + a(I, L) * kd(j, k) + a(J, K) * kd(i, l) + a(J, L) * kd(i, k);
          }
        }
      }
    }
  }
  std::size_t noise_dim() const override { return m_ * m_; }
  // sqrt(X) W + W^T sqrt(X) for an m x m Gaussian matrix W.
  void disperse(std::span<const double> x, std::span<const double> noise, std::span<double> out) const override {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(unpack(m_, x));
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd s = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    const auto mm = static_cast<Eigen::Index>(m_);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(noise.data(), mm, mm);
    const Eigen::MatrixXd kick = s * w + w.transpose() * s;
    pack(kick, out);
  }
  void project(std::span<double> x) const override {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(unpack(m_, x));
    if (es.eigenvalues()(0) >= 0.0) return;
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    pack(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose(), x);
  }

 private:
  std::size_t m_;
  double delta_;
};

}  // namespace

std::shared_ptr<const ProcessModel> make_wishart(std::size_t m, double delta) {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be > 0");
  const double md = static_cast<double>(m);
  const bool integer_low = delta == std::floor(delta) && delta >= 1.0 && delta <= md - 2.0;
  if (!integer_low && delta < md - 1.0) {
    throw InvalidArgument("delta must lie in {1, ..., m-2} or [m-1, inf)");
  }
  return std::make_shared<WishartModel>(m, delta);
}

}  // namespace inversio::detail
