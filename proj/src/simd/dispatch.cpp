#include <atomic>
#include <cstdlib>
#include <string_view>

#include "inversio/simd/kernels.hpp"

namespace inversio::simd {

namespace {

bool cpu_has_avx2() {
#if defined(INVERSIO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("INVERSIO_SIMD"); env && std::string_view(env) == "scalar") {
    return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

void force_isa(Isa isa) {
  if (isa_available(isa)) current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

#if defined(INVERSIO_HAVE_AVX2)
#define INVERSIO_DISPATCH(fn, ...)                                   \
  do {                                                               \
    if (active_isa() == Isa::Avx2) return avx2::fn(__VA_ARGS__);     \
    return scalar::fn(__VA_ARGS__);                                  \
  } while (0)
#else
#define INVERSIO_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void distance_matrix(std::span<const double> points, std::size_t dim, double cap, std::span<float> out) {
  INVERSIO_DISPATCH(distance_matrix, points, dim, cap, out);
}

void quadratic_forms(std::span<const float> matrix, std::size_t n, std::span<const double> vectors,
                     std::size_t count, std::span<double> out) {
  INVERSIO_DISPATCH(quadratic_forms, matrix, n, vectors, count, out);
}

void weighted_moments(std::span<const double> x, std::span<const double> w, double& s1, double& s2) {
  INVERSIO_DISPATCH(weighted_moments, x, w, s1, s2);
}

}  // namespace inversio::simd
