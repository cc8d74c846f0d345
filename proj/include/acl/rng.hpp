#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace acl {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based random stream: every draw is a pure function of
/// (key, counter), so a chain's noise does not depend on which worker
/// runs it or in what order.
class CounterStream {
 public:
  constexpr CounterStream(std::initializer_list<std::uint64_t> ids) noexcept {
    std::uint64_t k = 0x6a09e667f3bcc909ULL;
    for (auto id : ids) k = mix64(k ^ mix64(id));
    key_ = k;
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(key_ ^ mix64(counter + 0x3c6ef372fe94f82bULL));
  }

  /// Uniform in (0, 1).
  double uniform(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Two independent standard normals from counters 2c and 2c+1 (Box-Muller).
  void normal_pair(std::uint64_t c, double& z0, double& z1) const noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform(2 * c)));
    const double phi = 2.0 * std::numbers::pi * uniform(2 * c + 1);
    z0 = r * std::cos(phi);
    z1 = r * std::sin(phi);
  }

  /// Fill out[0..n) with standard normals starting at normal index `first`
  /// (first must be even for pairs to line up).
  template <typename It>
  void normals(std::uint64_t first, std::size_t n, It out) const noexcept {
    std::uint64_t c = first / 2;
    std::size_t i = 0;
    while (i < n) {
      double z0, z1;
      normal_pair(c++, z0, z1);
      *out++ = z0;
      if (++i < n) {
        *out++ = z1;
        ++i;
      }
    }
  }

 private:
  std::uint64_t key_ = 0;
};

}  // namespace acl
