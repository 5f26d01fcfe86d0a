#pragma once

#include <cstddef>
#include <span>

namespace inversio::simd {

enum class Isa { Scalar, Avx2 };

// Instruction set used by the dispatching entry points. AVX2+FMA when the CPU
// supports it, unless INVERSIO_SIMD=scalar is set.
Isa active_isa();
// Overrides the detected instruction set (tests only; ignored if unsupported).
void force_isa(Isa isa);
bool isa_available(Isa isa);
const char* isa_name(Isa isa);

// out[i * n + j] = min(|p_i - p_j|, cap) for n points stored row-major with
// `dim` coordinates each. cap <= 0 means no cap.
void distance_matrix(std::span<const double> points, std::size_t dim, double cap, std::span<float> out);

// out[k] = u_k^T D u_k for `count` vectors u_k of length n stored row-major.
void quadratic_forms(std::span<const float> matrix, std::size_t n, std::span<const double> vectors,
                     std::size_t count, std::span<double> out);

// (sum w_i x_i, sum w_i x_i^2)
void weighted_moments(std::span<const double> x, std::span<const double> w, double& s1, double& s2);

namespace scalar {
void distance_matrix(std::span<const double> points, std::size_t dim, double cap, std::span<float> out);
void quadratic_forms(std::span<const float> matrix, std::size_t n, std::span<const double> vectors,
                     std::size_t count, std::span<double> out);
void weighted_moments(std::span<const double> x, std::span<const double> w, double& s1, double& s2);
}  // namespace scalar

namespace avx2 {
void distance_matrix(std::span<const double> points, std::size_t dim, double cap, std::span<float> out);
void quadratic_forms(std::span<const float> matrix, std::size_t n, std::span<const double> vectors,
                     std::size_t count, std::span<double> out);
void weighted_moments(std::span<const double> x, std::span<const double> w, double& s1, double& s2);
}  // namespace avx2

}  // namespace inversio::simd
