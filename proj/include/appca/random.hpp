#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace appca {

/// Counter-based generator: every draw is a pure function of (key, counter),
/// so any entry of a generated matrix can be produced independently of the
/// others and results do not depend on evaluation order or thread count.
///
///   key      = splitmix64_mix(seed ^ (stream * 0xD1B54A32D192ED03))
///   bits(c)  = splitmix64_mix(key + (c + 1) * 0x9E3779B97F4A7C15)
///   uniform  = (bits >> 11) * 2^-53, mapped to (0, 1] as 1 - uniform for logs
///
/// Standard normals use the Box-Muller transform on the pair of uniforms at
/// counters (2k, 2k+1), giving normals 2k (cosine branch) and 2k+1 (sine).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t bits(std::uint64_t counter) const noexcept;
  /// Uniform on [0, 1).
  double uniform(std::uint64_t counter) const noexcept;
  /// Standard normal variate number `index` of this stream.
  double normal(std::uint64_t index) const noexcept;
  /// Fills `out` column-major with normals index 0, 1, 2, ...
  void fill_normal(Eigen::MatrixXd& out) const;
  /// Uniform integer in [0, bound) by rejection-free multiply-shift (bound > 0).
  std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const noexcept;

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// Seeded Fisher-Yates permutation of {0..n-1}.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed,
                                            std::uint64_t stream);

}  // namespace appca
