#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coalweb/increments.hpp"
#include "coalweb/path.hpp"
#include "coalweb/rng.hpp"

namespace coalweb {

enum class Boundary { torus, buffered_open };
enum class TimeKind { discrete, continuous };

std::string to_string(Boundary b);
std::string to_string(TimeKind k);
Boundary parse_boundary(const std::string& s);
TimeKind parse_time_kind(const std::string& s);

// Sites [x_lo, x_hi) and times [t_lo, t_hi]. Under torus, positions live in
// [x_lo, x_hi) mod width. Under buffered_open, walkers move on the band
// [x_lo - buffer, x_hi + buffer) and freeze when they jump out of it.
struct SpaceTimeWindow {
  std::int64_t x_lo = 0;
  std::int64_t x_hi = 3;
  double t_lo = 0.0;
  double t_hi = 1.0;
  Boundary boundary = Boundary::torus;
  std::int64_t buffer = 0;

  std::int64_t width() const { return x_hi - x_lo; }
  std::int64_t band_lo() const { return boundary == Boundary::torus ? x_lo : x_lo - buffer; }
  std::int64_t band_hi() const { return boundary == Boundary::torus ? x_hi : x_hi + buffer; }
  bool in_band(std::int64_t site) const { return site >= band_lo() && site < band_hi(); }
  std::int64_t wrap(std::int64_t site) const;
  void validate(TimeKind kind) const;

  friend bool operator==(const SpaceTimeWindow&, const SpaceTimeWindow&) = default;
};

// Buffer rule for path-level experiments: ceil(6 sigma sqrt(duration)).
std::int64_t default_buffer(const IncrementDistribution& law, double duration);

struct Origin {
  std::int64_t site = 0;
  double time = 0.0;
  // Continuous time only: the walker takes a clock ring falling exactly at
  // its birth time (the jump-point variant without the constant segment).
  bool takes_birth_ring = false;

  friend bool operator==(const Origin&, const Origin&) = default;
};

struct WalkEvent {
  double time = 0.0;
  std::int64_t site = 0;

  friend bool operator==(const WalkEvent&, const WalkEvent&) = default;
};

struct MergeRecord {
  double time = 0.0;
  std::size_t absorber = 0;

  friend bool operator==(const MergeRecord&, const MergeRecord&) = default;
};

// A simulated family. events[w] starts with the birth (time, site) and lists
// every later move of w until it merges or the horizon is reached; after a
// merge w follows its absorber.
struct CoalescingSystem {
  SpaceTimeWindow window;
  TimeKind time_kind = TimeKind::discrete;
  IncrementDistribution law;
  std::vector<Origin> origins;
  std::uint64_t seed = 0;
  std::vector<std::vector<WalkEvent>> events;
  std::vector<std::optional<MergeRecord>> merges;
  std::vector<char> frozen;

  std::size_t size() const { return origins.size(); }
  bool any_frozen() const;
  // Final representative after following all merges.
  std::size_t root(std::size_t walker) const;
  // Position at time t >= birth (right-continuous), following merges.
  std::int64_t position(std::size_t walker, double t) const;
  // Distinct sites occupied at time t by walkers born at or before t.
  std::vector<std::int64_t> occupied(double t) const;
  // Checks the structural invariants; returns a description of the first
  // violation, empty when all hold.
  std::string verify() const;

  friend bool operator==(const CoalescingSystem& a, const CoalescingSystem& b);
};

// Synchronous discrete-time engine. Walker w draws from
// derive_stream(seed, w), one draw per step while alive.
class DiscreteEngine {
 public:
  DiscreteEngine(const SpaceTimeWindow& window, const IncrementDistribution& law,
                 std::vector<Origin> origins, std::uint64_t seed, bool record);

  double time() const { return static_cast<double>(now_); }
  bool done() const { return now_ >= end_; }
  void advance();
  void run() {
    while (!done()) advance();
  }

  const std::vector<std::size_t>& alive() const { return alive_; }
  std::int64_t site_of(std::size_t walker) const { return site_[walker]; }
  bool frozen(std::size_t walker) const { return frozen_[walker] != 0; }
  // True if some frozen walker was born inside [x_lo, x_hi).
  bool frozen_from_window() const;

  CoalescingSystem finish() &&;

 private:
  void births();
  void merge_into(std::size_t loser, std::size_t winner);

  SpaceTimeWindow window_;
  IncrementDistribution law_;
  std::vector<Origin> origins_;
  std::vector<std::size_t> birth_order_;
  std::size_t next_birth_ = 0;
  std::uint64_t seed_;
  bool record_;
  std::int64_t now_;
  std::int64_t end_;
  std::vector<SplitMix64> rng_;
  std::vector<std::int64_t> site_;
  std::vector<char> frozen_;
  std::vector<char> born_;
  std::vector<std::size_t> alive_;
  std::vector<std::int64_t> owner_;
  std::vector<std::int64_t> stamp_;
  std::vector<std::vector<WalkEvent>> events_;
  std::vector<std::optional<MergeRecord>> merges_;
};

CoalescingSystem simulate_discrete(const SpaceTimeWindow& window, const IncrementDistribution& law,
                                   const std::vector<Origin>& origins, std::uint64_t seed);

// Rate-1 Poisson clock at every site; the clock of site x is driven by
// derive_stream(seed, site_key(x)) and every ring consumes an exponential gap
// followed by one increment draw. A walker jumps when its site rings.
class SiteClocks {
 public:
  struct Ring {
    double time;
    int y;
  };

  SiteClocks(const IncrementDistribution& law, std::uint64_t seed, double t_start)
      : law_(&law), seed_(seed), t_start_(t_start) {}

  // First ring of the site strictly after t (or at/after t when inclusive).
  Ring next_after(std::int64_t site, double t, bool inclusive = false);
  // All rings of the site in [t_a, t_b).
  std::vector<Ring> rings_in(std::int64_t site, double t_a, double t_b);

 private:
  struct Clock {
    SplitMix64 rng;
    std::vector<Ring> rings;
  };
  Clock& clock(std::int64_t site);
  void extend(Clock& c, double t);

  const IncrementDistribution* law_;
  std::uint64_t seed_;
  double t_start_;
  std::unordered_map<std::int64_t, Clock> clocks_;
};

CoalescingSystem simulate_continuous(const SpaceTimeWindow& window, const IncrementDistribution& law,
                                     const std::vector<Origin>& origins, std::uint64_t seed);

// Every ring at a site of [x_lo, x_hi) during [t_lo, t_hi) as two origins:
// one waiting for the next ring, one taking the ring at birth.
std::vector<Origin> jump_point_origins(const SpaceTimeWindow& window, const IncrementDistribution& law,
                                       std::uint64_t seed);

std::vector<Origin> full_band_origins(const SpaceTimeWindow& window, double time);

// Step view (pi) or interpolated view (kappa) of every walker, merged walkers
// following their absorber. Paths end at window.t_hi. In continuous time the
// interpolated view is constant from birth to the first jump time and then
// linear between consecutive jump points, so at each jump time it equals the
// step view's left limit.
PathSet paths_of(const CoalescingSystem& system, PathKind view);

struct ScaledPathSet {
  double delta = 1.0;
  double sigma = 1.0;
  PathSet paths;
};

// (t, x) -> (delta^2 t, delta x / sigma) on every breakpoint.
ScaledPathSet rescale(const PathSet& paths, double delta, double sigma);
ScaledPathSet rescale(const CoalescingSystem& system, PathKind view, double delta);

struct DensityEstimate {
  double p = 0.0;
  double se = 0.0;
  std::size_t trials = 0;
};

// Torus width needed for density(): 10 sigma sqrt(t), or the light-cone bound
// 4 m t + 1 (m the largest |step|) under which the torus is exact.
bool density_width_ok(const IncrementDistribution& law, std::int64_t t, std::int64_t width);

// Mean of |xi_t| / width from every site of a torus at time 0. Trial k uses
// derive_stream(seed, k).
DensityEstimate density(const IncrementDistribution& law, std::int64_t t, std::int64_t width,
                        std::size_t trials, std::uint64_t seed);

struct ExactOccupancy {
  std::int64_t width = 0;
  std::int64_t steps = 0;
  std::vector<Rational> single;             // P(x in xi_t)
  std::vector<std::vector<Rational>> pair;  // P(x, y in xi_t)
};

inline constexpr double kEnumerationBudget = 1e8;

// Exhaustive sum over the increment field {Y(x, n)} of a torus started full.
ExactOccupancy enumerate_exact(const IncrementDistribution& law, std::int64_t width, std::int64_t steps);

// Line-oriented event log; doubles are written with 17 significant digits so
// read_event_log(write_event_log(s)) == s.
void write_event_log(std::ostream& out, const CoalescingSystem& system);
CoalescingSystem read_event_log(std::istream& in);

}  // namespace coalweb
