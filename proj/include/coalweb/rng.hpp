#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace coalweb {

inline constexpr std::string_view kGeneratorName = "splitmix64";

// splitmix64 finalizer; also used to derive independent child streams.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child stream seed for (parent, index). Trials use derive_stream(master, trial),
// walkers derive_stream(trial_seed, walker), site clocks derive_stream(trial_seed, site_key).
constexpr std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t index) {
  return mix64(parent ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

// Maps a signed lattice site onto the unsigned stream index space.
constexpr std::uint64_t site_key(std::int64_t site) {
  return (static_cast<std::uint64_t>(site) << 1) ^ static_cast<std::uint64_t>(site >> 63);
}

// Satisfies UniformRandomBitGenerator so it also plugs into <random>.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Exponential with the given rate.
  double exponential(double rate = 1.0) { return -std::log1p(-uniform()) / rate; }

  constexpr std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Standard normals by the polar method. Keeps the spare value, so one instance
// must be tied to one logical stream (one Brownian path, one trial).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * rng_.uniform() - 1.0;
      v = 2.0 * rng_.uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  SplitMix64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace coalweb
