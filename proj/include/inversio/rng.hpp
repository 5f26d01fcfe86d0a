#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace inversio {

// Deterministic random stream keyed by (seed, stream_id).
//
// Every Monte Carlo path owns its own stream, so results do not depend on how
// paths are distributed over worker threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Independent child stream; children of distinct indices never collide with
  // each other or with the parent in practice (64-bit mixing).
  RngStream substream(std::uint64_t index) const;

  double normal();
  void normals(std::span<double> out);
  // Uniform on the open interval (0, 1).
  double uniform();
  double exponential();
  double gamma(double shape);
  std::uint64_t poisson(double mean);
  std::uint64_t uniform_index(std::uint64_t n);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace inversio
