#pragma once

#include <cstdint>
#include <random>

namespace casclab {

// Deterministic Gaussian stream. Box-Muller over mt19937_64 uniforms so
// draws do not depend on the standard library's normal_distribution
// implementation; a given seed reproduces the same bytes everywhere.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform_();
    } while (u1 <= 0.0);
    const double u2 = uniform_();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double uniform() { return uniform_(); }

 private:
  double uniform_() {
    // 53-bit mantissa uniform in [0,1).
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stable per-item sub-seed so Monte Carlo draws can run in parallel while
// each index sees its own reproducible stream (SplitMix64 mix).
inline std::uint64_t subseed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace casclab
