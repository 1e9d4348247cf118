#pragma once

// Seeded random streams.
//
// Every random object in the library is drawn from a StreamRng keyed by a
// SeedSpec (master seed, stream index). The key is hashed into the
// generator state with splitmix64, so a stream's draws depend only on its
// key and never on which thread consumes it or in what order. Child streams
// (per trial, per Monte Carlo chunk) are derived with SeedSpec::child().
//
// Normals use a 128-layer ziggurat (Marsaglia & Tsang, Doornik's layout)
// fed by xoshiro256++.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <Eigen/Core>

namespace lassogeom {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = a ^ (b * 0xd1b54a32d192ed03ULL);
  splitmix64(s);
  return splitmix64(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

struct SeedSpec {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  /// Independent sub-stream; identical (parent, index) always gives the same child.
  constexpr SeedSpec child(std::uint64_t index) const noexcept {
    return SeedSpec{master, detail::mix64(stream + 0x632be59bd9b4e019ULL, index)};
  }

  friend constexpr bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

namespace detail {
struct ZigguratTables;
}

/// xoshiro256++ seeded from a SeedSpec. Satisfies UniformRandomBitGenerator.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(SeedSpec seed) noexcept {
    std::uint64_t x = detail::mix64(seed.master, seed.stream);
    for (auto& w : s_) w = detail::splitmix64(x);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform01() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept {
    // Lemire's multiply-shift with rejection.
    __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<__uint128_t>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double normal() noexcept;
  double normal_from(const detail::ZigguratTables& z) noexcept;


 private:
  double normal_slow(const detail::ZigguratTables& z, double u, int i) noexcept;

  std::array<std::uint64_t, 4> s_{};
};

namespace detail {

struct ZigguratTables {
  static constexpr int kLayers = 128;
  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;
  std::array<double, kLayers + 1> x{};
  std::array<double, kLayers> ratio{};

  ZigguratTables() {
    double f = std::exp(-0.5 * kR * kR);
    x[0] = kV / f;
    x[1] = kR;
    x[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) {
      x[i] = std::sqrt(-2.0 * std::log(kV / x[i - 1] + f));
      f = std::exp(-0.5 * x[i] * x[i]);
    }
    for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

inline double StreamRng::normal_from(const detail::ZigguratTables& z) noexcept {
  const std::uint64_t bits = (*this)();
  // 53 high bits -> u in (-1, 1); 7 low bits -> layer.
  const double u = 2.0 * ((static_cast<double>(static_cast<std::int64_t>(bits >> 11)) + 0.5) * 0x1.0p-53) - 1.0;
  const int i = static_cast<int>(bits & 0x7F);
  if (std::fabs(u) < z.ratio[i]) [[likely]]
    return u * z.x[i];
  return normal_slow(z, u, i);
}

inline double StreamRng::normal_slow(const detail::ZigguratTables& z, double u, int i) noexcept {
  for (;;) {
    if (i == 0) {
      double xt = 0.0;
      double yt = 0.0;
      do {
        xt = std::log(uniform01()) / detail::ZigguratTables::kR;
        yt = std::log(uniform01());
      } while (-2.0 * yt < xt * xt);
      return u < 0.0 ? xt - detail::ZigguratTables::kR : detail::ZigguratTables::kR - xt;
    }
    const double xv = u * z.x[i];
    const double f0 = std::exp(-0.5 * (z.x[i] * z.x[i] - xv * xv));
    const double f1 = std::exp(-0.5 * (z.x[i + 1] * z.x[i + 1] - xv * xv));
    if (f1 + uniform01() * (f0 - f1) < 1.0) return xv;
    const std::uint64_t bits = (*this)();
    u = 2.0 * ((static_cast<double>(static_cast<std::int64_t>(bits >> 11)) + 0.5) * 0x1.0p-53) - 1.0;
    i = static_cast<int>(bits & 0x7F);
    if (std::fabs(u) < z.ratio[i]) return u * z.x[i];
  }
}

inline double StreamRng::normal() noexcept { return normal_from(detail::ziggurat()); }

inline void fill_normal(StreamRng& rng, Eigen::Ref<Eigen::VectorXd> out) {
  const auto& z = detail::ziggurat();
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = rng.normal_from(z);
}

}  // namespace lassogeom
