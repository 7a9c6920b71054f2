#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace maxprob {

// Seeded generator shared by every stochastic routine. The engine is
// MT19937-64, whose output sequence is fixed by the C++ standard and by the
// reference implementation, so draws are reproducible across platforms and
// languages. Uniform reals use the top 53 bits: (x >> 11) * 2^-53.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Index in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * n); }

  // Standard normal via Box-Muller; spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace maxprob
