#include "appca/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace appca {

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64_mix(seed ^ (stream * 0xD1B54A32D192ED03ULL))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const noexcept {
  return splitmix64_mix(key_ + (counter + 1) * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t index) const noexcept {
  const std::uint64_t pair = index >> 1;
  const double u1 = 1.0 - uniform(2 * pair);  // (0, 1]
  const double u2 = uniform(2 * pair + 1);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (index & 1) ? radius * std::sin(angle) : radius * std::cos(angle);
}

void CounterRng::fill_normal(Eigen::MatrixXd& out) const {
  const std::uint64_t total = static_cast<std::uint64_t>(out.size());
  double* data = out.data();
  std::uint64_t i = 0;
  for (; i + 1 < total; i += 2) {
    const std::uint64_t pair = i >> 1;
    const double u1 = 1.0 - uniform(2 * pair);
    const double u2 = uniform(2 * pair + 1);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    data[i] = radius * std::cos(angle);
    data[i + 1] = radius * std::sin(angle);
  }
  if (i < total) data[i] = normal(i);
}

std::uint64_t CounterRng::below(std::uint64_t counter, std::uint64_t bound) const noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits(counter)) * bound) >> 64);
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed,
                                            std::uint64_t stream) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const CounterRng rng(seed, stream);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace appca
