#include <cmath>

#include "inversio/simd/kernels.hpp"

namespace inversio::simd::scalar {

void distance_matrix(std::span<const double> points, std::size_t dim, double cap, std::span<float> out) {
  const std::size_t n = points.size() / dim;
  for (std::size_t i = 0; i < n; ++i) {
    const double* pi = points.data() + i * dim;
    for (std::size_t j = 0; j < n; ++j) {
      const double* pj = points.data() + j * dim;
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = pi[d] - pj[d];
        s += diff * diff;
      }
      double r = std::sqrt(s);
      if (cap > 0.0 && r > cap) r = cap;
      out[i * n + j] = static_cast<float>(r);
    }
  }
}

void quadratic_forms(std::span<const float> matrix, std::size_t n, std::span<const double> vectors,
                     std::size_t count, std::span<double> out) {
  for (std::size_t k = 0; k < count; ++k) {
    const double* u = vectors.data() + k * n;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const float* row = matrix.data() + i * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += static_cast<double>(row[j]) * u[j];
      total += u[i] * acc;
    }
    out[k] = total;
  }
}

void weighted_moments(std::span<const double> x, std::span<const double> w, double& s1, double& s2) {
  s1 = 0.0;
  s2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wx = w[i] * x[i];
    s1 += wx;
    s2 += wx * x[i];
  }
}

}  // namespace inversio::simd::scalar
