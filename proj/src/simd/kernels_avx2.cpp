#include <immintrin.h>

#include <cmath>
#include <vector>

#include "inversio/simd/kernels.hpp"

namespace inversio::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

void distance_matrix(std::span<const double> points, std::size_t dim, double cap, std::span<float> out) {
  const std::size_t n = points.size() / dim;
  // Coordinates in structure-of-arrays layout so 4 columns load at once.
  std::vector<double> soa(dim * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t d = 0; d < dim; ++d) soa[d * n + j] = points[j * dim + d];
  }
  const bool capped = cap > 0.0;
  const __m256d vcap = _mm256_set1_pd(capped ? cap : 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* pi = points.data() + i * dim;
    float* row = out.data() + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d s = _mm256_setzero_pd();
      for (std::size_t d = 0; d < dim; ++d) {
        const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(soa.data() + d * n + j), _mm256_set1_pd(pi[d]));
        s = _mm256_fmadd_pd(diff, diff, s);
      }
      __m256d r = _mm256_sqrt_pd(s);
      if (capped) r = _mm256_min_pd(r, vcap);
      _mm_storeu_ps(row + j, _mm256_cvtpd_ps(r));
    }
    for (; j < n; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = soa[d * n + j] - pi[d];
        s += diff * diff;
      }
      double r = std::sqrt(s);
      if (capped && r > cap) r = cap;
      row[j] = static_cast<float>(r);
    }
  }
}

namespace {

// Row dot products for one vector; returns u^T D u.
double quadratic_form_one(const float* matrix, std::size_t n, const double* u) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const float* row = matrix + i * n;
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const __m256d d = _mm256_cvtps_pd(_mm_loadu_ps(row + j));
      acc = _mm256_fmadd_pd(d, _mm256_loadu_pd(u + j), acc);
    }
    double a = hsum(acc);
    for (; j < n; ++j) a += static_cast<double>(row[j]) * u[j];
    total += u[i] * a;
  }
  return total;
}

}  // namespace

void quadratic_forms(std::span<const float> matrix, std::size_t n, std::span<const double> vectors,
                     std::size_t count, std::span<double> out) {
  std::size_t k = 0;
  // Four vectors share each pass over the matrix rows.
  for (; k + 4 <= count; k += 4) {
    const double* u0 = vectors.data() + (k + 0) * n;
    const double* u1 = vectors.data() + (k + 1) * n;
    const double* u2 = vectors.data() + (k + 2) * n;
    const double* u3 = vectors.data() + (k + 3) * n;
    double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const float* row = matrix.data() + i * n;
      __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
      __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        const __m256d d = _mm256_cvtps_pd(_mm_loadu_ps(row + j));
        a0 = _mm256_fmadd_pd(d, _mm256_loadu_pd(u0 + j), a0);
        a1 = _mm256_fmadd_pd(d, _mm256_loadu_pd(u1 + j), a1);
        a2 = _mm256_fmadd_pd(d, _mm256_loadu_pd(u2 + j), a2);
        a3 = _mm256_fmadd_pd(d, _mm256_loadu_pd(u3 + j), a3);
      }
      double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
      for (; j < n; ++j) {
        const double d = row[j];
        s0 += d * u0[j];
        s1 += d * u1[j];
        s2 += d * u2[j];
        s3 += d * u3[j];
      }
      t0 += u0[i] * s0;
      t1 += u1[i] * s1;
      t2 += u2[i] * s2;
      t3 += u3[i] * s3;
    }
    out[k] = t0;
    out[k + 1] = t1;
    out[k + 2] = t2;
    out[k + 3] = t3;
  }
  for (; k < count; ++k) out[k] = quadratic_form_one(matrix.data(), n, vectors.data() + k * n);
}

void weighted_moments(std::span<const double> x, std::span<const double> w, double& s1, double& s2) {
  const std::size_t n = x.size();
  __m256d a1 = _mm256_setzero_pd(), a2 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x.data() + i);
    const __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w.data() + i), xv);
    a1 = _mm256_add_pd(a1, wx);
    a2 = _mm256_fmadd_pd(wx, xv, a2);
  }
  s1 = hsum(a1);
  s2 = hsum(a2);
  for (; i < n; ++i) {
    const double wx = w[i] * x[i];
    s1 += wx;
    s2 += wx * x[i];
  }
}

}  // namespace inversio::simd::avx2
