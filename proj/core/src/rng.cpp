#include "tsc/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tsc::rng {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Stream::Stream(std::uint64_t master_seed, std::string_view name) {
  // Decorrelate (seed, name) pairs before using the state as a generator.
  std::uint64_t s = master_seed ^ fnv1a64(name);
  splitmix64(s);
  splitmix64(s);
  state_ = s;
}

std::uint64_t Stream::next_u64() { return splitmix64(state_); }

double Stream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Stream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 is kept away from zero so log() stays finite.
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

double Stream::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

std::size_t Stream::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("rng::Stream::index: n must be positive");
  return static_cast<std::size_t>(next_u64() % n);
}

}  // namespace tsc::rng
