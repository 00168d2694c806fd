#include "coalweb/voter.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "coalweb/error.hpp"

namespace coalweb {

VoterState::VoterState(std::int64_t x_lo, std::int64_t x_hi, std::vector<std::uint8_t> values, double time)
    : x_lo_(x_lo), x_hi_(x_hi), values_(std::move(values)), time_(time) {
  if (!(x_lo_ < x_hi_)) throw InvalidArgument("voter window needs x_lo < x_hi");
  if (values_.size() != static_cast<std::size_t>(x_hi_ - x_lo_)) {
    throw InvalidArgument("voter state needs one opinion per window site");
  }
  for (auto v : values_) {
    if (v > 1) throw InvalidArgument("voter opinions must be 0 or 1");
  }
}

VoterState VoterState::heaviside(std::int64_t x_lo, std::int64_t x_hi) {
  std::vector<std::uint8_t> v;
  for (std::int64_t x = x_lo; x < x_hi; ++x) v.push_back(x <= 0 ? 1 : 0);
  return VoterState(x_lo, x_hi, std::move(v));
}

int VoterState::value_at(std::int64_t x) const {
  if (x < x_lo_) return 1;
  if (x >= x_hi_) return 0;
  return values_[static_cast<std::size_t>(x - x_lo_)];
}

std::int64_t VoterState::leftmost_zero() const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (values_[k] == 0) return x_lo_ + static_cast<std::int64_t>(k);
  }
  return x_hi_;
}

std::int64_t VoterState::rightmost_one() const {
  for (std::size_t k = values_.size(); k-- > 0;) {
    if (values_[k] == 1) return x_lo_ + static_cast<std::int64_t>(k);
  }
  return x_lo_ - 1;
}

VoterState step_voter(const VoterState& state, const std::vector<int>& increments) {
  if (increments.size() != state.values_.size()) {
    throw InvalidArgument("discrete voter round needs one increment per window site");
  }
  VoterState next = state;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    const std::int64_t x = state.x_lo_ + static_cast<std::int64_t>(k);
    next.values_[k] = static_cast<std::uint8_t>(state.value_at(x + increments[k]));
  }
  next.time_ = state.time_ + 1.0;
  return next;
}

VoterState step_voter(const VoterState& state, std::int64_t site, int y, double time) {
  if (site < state.x_lo_ || site >= state.x_hi_) throw InvalidArgument("ringing site outside the voter window");
  VoterState next = state;
  next.values_[static_cast<std::size_t>(site - state.x_lo_)] = static_cast<std::uint8_t>(state.value_at(site + y));
  next.time_ = time;
  return next;
}

// ---------------------------------------------------------------------------

CoupledRealization::CoupledRealization(const IncrementDistribution& law, TimeKind kind, std::int64_t x_lo,
                                       std::int64_t x_hi, double horizon, VoterState initial, std::uint64_t seed)
    : kind_(kind), x_lo_(x_lo), x_hi_(x_hi), horizon_(horizon), initial_(std::move(initial)) {
  if (initial_.x_lo() != x_lo || initial_.x_hi() != x_hi) throw InvalidArgument("initial state window mismatch");
  if (!(horizon > 0.0)) throw InvalidArgument("coupled realization needs a positive horizon");
  if (kind == TimeKind::discrete) {
    if (horizon != std::floor(horizon)) throw InvalidArgument("discrete horizon must be an integer");
    const auto steps = static_cast<std::size_t>(horizon);
    const auto width = static_cast<std::size_t>(x_hi - x_lo);
    field_.assign(steps, std::vector<int>(width, 0));
    for (std::size_t k = 0; k < width; ++k) {
      SplitMix64 rng(derive_stream(seed, site_key(x_lo + static_cast<std::int64_t>(k))));
      for (std::size_t n = 0; n < steps; ++n) field_[n][k] = law.sample(rng);
    }
    return;
  }
  SiteClocks clocks(law, seed, 0.0);
  for (std::int64_t x = x_lo; x < x_hi; ++x) {
    auto& list = site_rings_[x];
    for (const auto& r : clocks.rings_in(x, 0.0, horizon)) list.push_back({r.time, x, r.y});
    rings_.insert(rings_.end(), list.begin(), list.end());
  }
  std::sort(rings_.begin(), rings_.end(), [](const RingEvent& a, const RingEvent& b) { return a.time < b.time; });
}

VoterState CoupledRealization::forward(double t) const {
  VoterState s = initial_;
  if (kind_ == TimeKind::discrete) {
    const auto n = static_cast<std::size_t>(std::floor(std::min(t, horizon_)));
    for (std::size_t k = 0; k < n; ++k) s = step_voter(s, field_[k]);
    return s;
  }
  for (const auto& r : rings_) {
    if (r.time > t) break;
    s = step_voter(s, r.site, r.y, r.time);
  }
  return s;
}

std::int64_t CoupledRealization::backward(std::int64_t x, double t) const {
  if (kind_ == TimeKind::discrete) {
    for (auto n = static_cast<std::int64_t>(std::floor(t)); n >= 1; --n) {
      if (x < x_lo_ || x >= x_hi_) break;
      x += field_[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(x - x_lo_)];
    }
    return x;
  }
  double now = t;
  bool inclusive = true;
  for (;;) {
    if (x < x_lo_ || x >= x_hi_) return x;
    const auto it = site_rings_.find(x);
    if (it == site_rings_.end()) return x;
    const auto& list = it->second;
    auto pos = inclusive ? std::upper_bound(list.begin(), list.end(), now,
                                            [](double v, const RingEvent& r) { return v < r.time; })
                         : std::lower_bound(list.begin(), list.end(), now,
                                            [](const RingEvent& r, double v) { return r.time < v; });
    if (pos == list.begin()) return x;
    --pos;
    x += pos->y;
    now = pos->time;
    inclusive = false;
  }
}

bool dual_check(const CoupledRealization& c, const std::vector<SpaceTimeSite>& a) {
  std::map<double, std::vector<std::int64_t>> by_time;
  for (const auto& s : a) {
    if (s.x < c.x_lo() || s.x >= c.x_hi()) throw InvalidArgument("dual query site outside the window");
    if (!(s.t > 0.0) || s.t > c.horizon()) throw InvalidArgument("dual query time outside (0, horizon]");
    if (c.kind() == TimeKind::discrete && s.t != std::floor(s.t)) {
      throw InvalidArgument("discrete dual query needs integer times");
    }
    by_time[s.t].push_back(s.x);
  }
  bool forward_one = false;
  for (const auto& [t, xs] : by_time) {
    const VoterState st = c.forward(t);
    for (auto x : xs) forward_one = forward_one || st.value_at(x) == 1;
  }
  bool backward_one = false;
  for (const auto& s : a) backward_one = backward_one || c.initial().value_at(c.backward(s.x, s.t)) == 1;
  return forward_one == backward_one;
}

// ---------------------------------------------------------------------------

namespace {

// Opinions on [base, base + vals.size()), 1 to the left, 0 to the right,
// trimmed so the word starts with 0 and ends with 1 (or is empty).
struct Word {
  std::int64_t base = 1;
  std::vector<std::uint8_t> vals;

  int at(std::int64_t x) const {
    if (x < base) return 1;
    if (x >= base + static_cast<std::int64_t>(vals.size())) return 0;
    return vals[static_cast<std::size_t>(x - base)];
  }
  std::int64_t l() const { return base; }
  std::int64_t r() const { return base + static_cast<std::int64_t>(vals.size()) - 1; }
  void normalize() {
    std::size_t lead = 0;
    while (lead < vals.size() && vals[lead] == 1) ++lead;
    std::size_t end = vals.size();
    while (end > lead && vals[end - 1] == 0) --end;
    base += static_cast<std::int64_t>(lead);
    vals = std::vector<std::uint8_t>(vals.begin() + static_cast<std::ptrdiff_t>(lead),
                                     vals.begin() + static_cast<std::ptrdiff_t>(end));
  }
  void set(std::int64_t x, int v) {
    if (at(x) == v) return;
    if (x < base) {
      vals.insert(vals.begin(), static_cast<std::size_t>(base - x), 1);
      base = x;
    }
    const auto hi = base + static_cast<std::int64_t>(vals.size());
    if (x >= hi) vals.insert(vals.end(), static_cast<std::size_t>(x - hi + 1), 0);
    vals[static_cast<std::size_t>(x - base)] = static_cast<std::uint8_t>(v);
    normalize();
  }
};

}  // namespace

InterfaceTrace interface_trace(const IncrementDistribution& law, TimeKind kind, double horizon,
                               std::vector<double> sample_times, std::uint64_t seed, bool record_jumps) {
  if (!(horizon >= 0.0)) throw InvalidArgument("interface horizon must be nonnegative");
  if (kind == TimeKind::discrete) {
    law.require_discrete_walk();
    if (horizon != std::floor(horizon)) throw InvalidArgument("discrete horizon must be an integer");
  } else {
    law.require_continuous_walk();
    if (!law.mean_zero()) throw GuardViolation("interface needs a mean-zero law");
  }
  std::sort(sample_times.begin(), sample_times.end());
  for (double s : sample_times) {
    if (s < 0.0 || s > horizon) throw InvalidArgument("sample time outside [0, horizon]");
    if (kind == TimeKind::discrete && s != std::floor(s)) throw InvalidArgument("discrete sample times must be integers");
  }
  const std::int64_t m = std::max(std::abs(law.min_offset()), std::abs(law.max_offset()));
  InterfaceTrace trace;
  trace.kind = kind;
  trace.sigma = law.sigma();
  trace.horizon = horizon;
  Word word;
  SplitMix64 rng(seed);
  std::size_t next_sample = 0;
  auto record_until = [&](double t, bool inclusive) {
    while (next_sample < sample_times.size() &&
           (sample_times[next_sample] < t || (inclusive && sample_times[next_sample] == t))) {
      trace.samples.push_back({sample_times[next_sample++], word.l(), word.r()});
    }
  };
  auto note_jump = [&](double t, std::int64_t l0, std::int64_t r0) {
    if (record_jumps && (word.l() != l0 || word.r() != r0)) trace.jumps.push_back({t, word.l(), word.r()});
  };
  if (record_jumps) trace.jumps.push_back({0.0, word.l(), word.r()});
  record_until(0.0, true);

  if (kind == TimeKind::discrete) {
    const auto steps = static_cast<std::int64_t>(horizon);
    for (std::int64_t n = 1; n <= steps; ++n) {
      const std::int64_t l0 = word.l(), r0 = word.r();
      Word next;
      next.base = word.base - m;
      const auto count = static_cast<std::size_t>(word.vals.size() + 2 * static_cast<std::size_t>(m));
      next.vals.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        const std::int64_t x = next.base + static_cast<std::int64_t>(k);
        next.vals[k] = static_cast<std::uint8_t>(word.at(x + law.sample(rng)));
      }
      next.normalize();
      word = std::move(next);
      note_jump(static_cast<double>(n), l0, r0);
      record_until(static_cast<double>(n), true);
    }
  } else {
    double t = 0.0;
    for (;;) {
      const auto active = static_cast<double>(word.vals.size() + 2 * static_cast<std::size_t>(m));
      const double next_t = t + rng.exponential(active);
      if (next_t > horizon) break;
      record_until(next_t, false);
      t = next_t;
      const std::int64_t lo = word.base - m;
      auto k = static_cast<std::int64_t>(rng.uniform() * active);
      k = std::min<std::int64_t>(k, static_cast<std::int64_t>(active) - 1);
      const std::int64_t x = lo + k;
      const int y = law.sample(rng);
      const std::int64_t l0 = word.l(), r0 = word.r();
      word.set(x, word.at(x + y));
      note_jump(t, l0, r0);
    }
    record_until(horizon, true);
  }
  trace.alpha = word.vals;
  return trace;
}

BoundaryPaths boundary_paths(const InterfaceTrace& trace, double delta, double t_max) {
  if (trace.jumps.empty()) throw InvalidArgument("boundary paths need a trace recorded with jump points");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in (0, 1]");
  if (!(t_max > 0.0)) throw InvalidArgument("rescaled time range must be positive");
  const double ts = delta * delta;
  const double xs = delta / trace.sigma;
  if (t_max / ts > trace.horizon * (1.0 + 1e-12)) {
    throw InvalidArgument("trace horizon shorter than the requested rescaled time range");
  }
  std::vector<Breakpoint> lb, rb;
  for (const auto& j : trace.jumps) {
    lb.push_back({ts * j.t, xs * static_cast<double>(j.l)});
    rb.push_back({ts * j.t, xs * static_cast<double>(j.r)});
  }
  BoundaryPaths out{Path(PathKind::interpolated, lb, ts * trace.horizon),
                    Path(PathKind::interpolated, rb, ts * trace.horizon), 0.0};
  for (const auto& b : lb) {
    if (b.t > t_max) break;
    out.sup_gap = std::max(out.sup_gap, std::abs(out.l.value(b.t) - out.r.value(b.t)));
  }
  out.sup_gap = std::max(out.sup_gap, std::abs(out.l.value(t_max) - out.r.value(t_max)));
  return out;
}

}  // namespace coalweb
