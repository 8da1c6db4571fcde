#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "gsvgd/types.hpp"

namespace gsvgd {

/// Seeded random stream. Streams are keyed by (seed, key...) through a
/// SplitMix64 mix so that e.g. repetition r of an experiment gets the same
/// numbers no matter how many other repetitions run or in what order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  /// Independent stream for `seed` and an ordered list of stream keys.
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix(seed);
    for (std::uint64_t k : keys) h = mix(h ^ (k + 0x9e3779b97f4a7c15ULL));
    return Rng(h, RawTag{});
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next() { return engine_(); }

  /// rows x cols matrix of i.i.d. standard normals, filled column-major.
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal();
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  struct RawTag {};
  Rng(std::uint64_t state, RawTag) : engine_(state) {}

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace gsvgd
