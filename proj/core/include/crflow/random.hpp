#pragma once

#include <cstdint>
#include <random>

namespace crflow {

// mt19937_64 is specified bit-exactly by the standard; the distributions are
// not, so doubles are formed directly from the top 53 bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace crflow
