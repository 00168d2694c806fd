#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "coalweb/increments.hpp"
#include "coalweb/path.hpp"
#include "coalweb/walks.hpp"

namespace coalweb {

// {0,1} opinions on [x_lo, x_hi); everything left of the window holds 1 and
// everything right of it holds 0.
class VoterState {
 public:
  VoterState(std::int64_t x_lo, std::int64_t x_hi, std::vector<std::uint8_t> values, double time = 0.0);

  // 1 on x <= 0, 0 on x > 0.
  static VoterState heaviside(std::int64_t x_lo, std::int64_t x_hi);

  std::int64_t x_lo() const { return x_lo_; }
  std::int64_t x_hi() const { return x_hi_; }
  double time() const { return time_; }
  const std::vector<std::uint8_t>& values() const { return values_; }

  int value_at(std::int64_t x) const;
  std::int64_t leftmost_zero() const;
  std::int64_t rightmost_one() const;

  friend bool operator==(const VoterState&, const VoterState&) = default;

 private:
  friend VoterState step_voter(const VoterState&, const std::vector<int>&);
  friend VoterState step_voter(const VoterState&, std::int64_t, int, double);

  std::int64_t x_lo_;
  std::int64_t x_hi_;
  std::vector<std::uint8_t> values_;
  double time_;
};

// Discrete round: every window site x adopts the previous opinion at
// x + increments[x - x_lo].
VoterState step_voter(const VoterState& state, const std::vector<int>& increments);
// Continuous ring at one site and time.
VoterState step_voter(const VoterState& state, std::int64_t site, int y, double time);

struct RingEvent {
  double time = 0.0;
  std::int64_t site = 0;
  int y = 0;
};

struct SpaceTimeSite {
  std::int64_t x = 0;
  double t = 0.0;
};

// One increment field driving both the forward voter and the backward walks.
// Discrete: Y(x, n) drawn in order n = 1, 2, ... from derive_stream(seed,
// site_key(x)). Continuous: the site clocks of SiteClocks(law, seed, 0).
class CoupledRealization {
 public:
  CoupledRealization(const IncrementDistribution& law, TimeKind kind, std::int64_t x_lo, std::int64_t x_hi,
                     double horizon, VoterState initial, std::uint64_t seed);

  TimeKind kind() const { return kind_; }
  double horizon() const { return horizon_; }
  const VoterState& initial() const { return initial_; }
  std::int64_t x_lo() const { return x_lo_; }
  std::int64_t x_hi() const { return x_hi_; }

  VoterState forward(double t) const;
  // Position at time 0 of the backward walk from (x, t); it freezes once it
  // leaves the window, where the opinion never changes.
  std::int64_t backward(std::int64_t x, double t) const;

 private:
  TimeKind kind_;
  std::int64_t x_lo_, x_hi_;
  double horizon_;
  VoterState initial_;
  std::vector<std::vector<int>> field_;  // field_[n - 1][x - x_lo]
  std::vector<RingEvent> rings_;         // by time
  std::unordered_map<std::int64_t, std::vector<RingEvent>> site_rings_;
};

// [some (x, t) in A has opinion 1] == [some backward endpoint from A has
// initial opinion 1].
bool dual_check(const CoupledRealization& coupled, const std::vector<SpaceTimeSite>& a);

struct InterfaceSample {
  double t = 0.0;
  std::int64_t l = 1;  // leftmost 0
  std::int64_t r = 0;  // rightmost 1
};

struct InterfaceTrace {
  TimeKind kind = TimeKind::continuous;
  double sigma = 1.0;
  double horizon = 0.0;
  std::vector<InterfaceSample> samples;  // at the requested times
  std::vector<InterfaceSample> jumps;    // every change of (l, r), from t = 0
  std::vector<std::uint8_t> alpha;       // opinions on [l, r] at the horizon
};

// Heaviside start. Only sites within max|Y| of [l, r] can change, so the
// state is kept as the word on [l, r]; in continuous time the rings of that
// active stretch are sampled as one superposed Poisson stream.
InterfaceTrace interface_trace(const IncrementDistribution& law, TimeKind kind, double horizon,
                               std::vector<double> sample_times, std::uint64_t seed, bool record_jumps = false);

struct BoundaryPaths {
  Path l;
  Path r;
  double sup_gap = 0.0;  // sup over [0, T] of |l - r| after rescaling
};

// Linear interpolation of l and r through the jump points, rescaled by
// (delta^2 t, delta x / sigma).
BoundaryPaths boundary_paths(const InterfaceTrace& trace, double delta, double t_max = 1.0);

}  // namespace coalweb
