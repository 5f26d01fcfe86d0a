#include "inversio/rng.hpp"

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace inversio {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream_id) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream_id + 0x632BE59BD9B4E019ULL));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(mix_key(seed, stream_id)) {}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(seed_, splitmix64(stream_id_ * 0xD1342543DE82EF95ULL + index + 1));
}

double RngStream::normal() { return boost::random::normal_distribution<double>()(engine_); }

void RngStream::normals(std::span<double> out) {
  boost::random::normal_distribution<double> dist;
  for (double& z : out) z = dist(engine_);
}

double RngStream::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() {
  return boost::random::exponential_distribution<double>()(engine_);
}

double RngStream::gamma(double shape) {
  return boost::random::gamma_distribution<double>(shape)(engine_);
}

std::uint64_t RngStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  return static_cast<std::uint64_t>(boost::random::poisson_distribution<long long, double>(mean)(engine_));
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  return boost::random::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

}  // namespace inversio
