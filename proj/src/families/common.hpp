#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "inversio/characteristics.hpp"
#include "inversio/model.hpp"

namespace inversio::detail {

inline double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Frobenius norm squared of a symmetric matrix stored as its upper triangle.
inline double frobenius_squared(std::size_t m, std::span<const double> u) {
  double s = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j, ++k) s += (i == j ? 1.0 : 2.0) * u[k] * u[k];
  }
  return s;
}

inline double sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

inline bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline bool strictly_increasing(std::span<const double> x) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) return false;
  }
  return true;
}

// log of prod_{i<j} (x_j - x_i) on the ordered chamber.
inline double log_vandermonde(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) s += std::log(x[j] - x[i]);
  }
  return s;
}

// log BESQ(delta) transition density q_t(x, y), y > 0.
double besq_log_density(double delta, double t, double x, double y);

// log det[exp(L_ij)] for an n x n matrix of logs (row-major), assuming the
// determinant is positive.
double log_det_exp(std::span<const double> logs, std::size_t n);

// x -> x * s^(-2) for the sum/trace-based involutions.
inline void scale_into(std::span<const double> x, double factor, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = factor * x[i];
}

std::string format_number(double v);
std::string format_list(std::span<const double> v);

std::shared_ptr<const ProcessModel> make_fspbes(std::vector<double> nu, std::vector<double> sigma,
                                                double alpha, std::string id);
std::shared_ptr<const ProcessModel> make_free_besq(std::size_t n, double delta);
std::shared_ptr<const ProcessModel> make_bm(std::size_t n);
std::shared_ptr<const ProcessModel> make_stable(double alpha, std::size_t n);
std::shared_ptr<const ProcessModel> make_goe(std::size_t m);
std::shared_ptr<const ProcessModel> make_wishart(std::size_t m, double delta);
std::shared_ptr<const ProcessModel> make_dyson(std::size_t n);
std::shared_ptr<const ProcessModel> make_noncolliding_besq(std::size_t n, double delta);
std::shared_ptr<const ProcessModel> make_hyperbolic_bessel();
std::shared_ptr<const ProcessModel> make_hyperbolic_ball();

}  // namespace inversio::detail
