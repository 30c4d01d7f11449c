#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tsc::rng {

// Mixes a 64-bit state into a well-distributed output (splitmix64).
std::uint64_t splitmix64(std::uint64_t& state);

// FNV-1a over the bytes of a string, used to derive stream seeds from names.
std::uint64_t fnv1a64(std::string_view text);

// One named random stream. A master seed plus a stream name define the whole
// sequence, so adding or removing one consumer never perturbs the others.
// All draws are built from raw 64-bit outputs of a fixed-width generator;
// distribution code is self-contained to keep runs reproducible.
class Stream {
 public:
  Stream(std::uint64_t master_seed, std::string_view name);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; the spare draw is cached.
  double normal();
  double normal(double mean, double stddev);

  // Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tsc::rng
