#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace cgail {

// std::mt19937_64 has a fully specified output sequence; the distribution
// adaptors in <random> do not, so sampling goes through these helpers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Inverse-CDF draw from a probability row. Rounding slack in the cumulative
  // sum goes to the last index with positive mass.
  template <typename Row>
  int Categorical(const Row& probs) {
    const double u = Uniform();
    double acc = 0.0;
    int last_positive = 0;
    const int n = static_cast<int>(probs.size());
    for (int i = 0; i < n; ++i) {
      if (probs(i) <= 0.0) continue;
      last_positive = i;
      acc += probs(i);
      if (u < acc) return i;
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cgail
