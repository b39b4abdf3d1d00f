#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace bmp {

// Seeded generator with distribution code that does not depend on the
// standard library implementation, so identical seeds give identical
// streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  // Uniform in {0, ..., n-1}; n must be positive.
  std::size_t index(std::size_t n);
  int integer(int lo, int hi_inclusive);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// Stateless seed derivation (splitmix64 finalizer), for per-item streams that
// are independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace bmp
