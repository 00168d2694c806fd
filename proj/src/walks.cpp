#include "coalweb/walks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "coalweb/error.hpp"
#include "coalweb/stats.hpp"

namespace coalweb {

std::string to_string(Boundary b) { return b == Boundary::torus ? "torus" : "buffered_open"; }
std::string to_string(TimeKind k) { return k == TimeKind::discrete ? "discrete" : "continuous"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "torus") return Boundary::torus;
  if (s == "buffered_open") return Boundary::buffered_open;
  throw InvalidArgument("unknown boundary '" + s + "'");
}

TimeKind parse_time_kind(const std::string& s) {
  if (s == "discrete") return TimeKind::discrete;
  if (s == "continuous") return TimeKind::continuous;
  throw InvalidArgument("unknown time kind '" + s + "'");
}

std::int64_t SpaceTimeWindow::wrap(std::int64_t site) const {
  if (boundary != Boundary::torus) return site;
  const std::int64_t w = width();
  std::int64_t r = (site - x_lo) % w;
  if (r < 0) r += w;
  return r + x_lo;
}

void SpaceTimeWindow::validate(TimeKind kind) const {
  if (!(x_lo < x_hi)) throw InvalidArgument("window needs x_lo < x_hi");
  if (!(t_lo < t_hi)) throw InvalidArgument("window needs t_lo < t_hi");
  if (boundary == Boundary::torus && width() < 3) throw InvalidArgument("torus width must be at least 3");
  if (buffer < 0) throw InvalidArgument("buffer must be nonnegative");
  if (kind == TimeKind::discrete && (t_lo != std::floor(t_lo) || t_hi != std::floor(t_hi))) {
    throw InvalidArgument("discrete-time window needs integer times");
  }
}

std::int64_t default_buffer(const IncrementDistribution& law, double duration) {
  return static_cast<std::int64_t>(std::ceil(6.0 * law.sigma() * std::sqrt(std::max(duration, 0.0))));
}

// ---------------------------------------------------------------------------
// CoalescingSystem

bool CoalescingSystem::any_frozen() const {
  return std::any_of(frozen.begin(), frozen.end(), [](char f) { return f != 0; });
}

std::size_t CoalescingSystem::root(std::size_t walker) const {
  while (merges[walker]) walker = merges[walker]->absorber;
  return walker;
}

std::int64_t CoalescingSystem::position(std::size_t walker, double t) const {
  for (;;) {
    const auto& m = merges[walker];
    if (m && t >= m->time) {
      walker = m->absorber;
      continue;
    }
    const auto& ev = events[walker];
    auto it = std::upper_bound(ev.begin(), ev.end(), t, [](double v, const WalkEvent& e) { return v < e.time; });
    if (it == ev.begin()) return ev.front().site;
    return (it - 1)->site;
  }
}

std::vector<std::int64_t> CoalescingSystem::occupied(double t) const {
  std::vector<std::int64_t> out;
  for (std::size_t w = 0; w < size(); ++w) {
    if (origins[w].time <= t) out.push_back(position(w, t));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string CoalescingSystem::verify() const {
  const std::size_t n = size();
  if (events.size() != n || merges.size() != n || frozen.size() != n) return "size mismatch";
  std::set<double> times;
  for (std::size_t w = 0; w < n; ++w) {
    const auto& ev = events[w];
    if (ev.empty() || ev.front().time != origins[w].time || ev.front().site != window.wrap(origins[w].site)) {
      return "walker " + std::to_string(w) + " does not start at its origin";
    }
    for (std::size_t k = 1; k < ev.size(); ++k) {
      const bool birth_ring = k == 1 && origins[w].takes_birth_ring && ev[1].time == ev[0].time;
      if (!(ev[k].time > ev[k - 1].time) && !birth_ring) return "walker " + std::to_string(w) + " has non-increasing event times";
    }
    for (const auto& e : ev) times.insert(e.time);
    if (const auto& m = merges[w]) {
      if (m->absorber >= w) return "walker " + std::to_string(w) + " absorbed by a larger index";
      if (m->time < origins[w].time || m->time < origins[m->absorber].time) {
        return "merge of walker " + std::to_string(w) + " precedes a birth";
      }
      if (ev.back().time > m->time) return "walker " + std::to_string(w) + " moves after its merge";
      const double before = std::nextafter(m->time, -INFINITY);
      if (ev.back().site != position(m->absorber, m->time) && ev.back().site != position(m->absorber, before)) {
        return "walker " + std::to_string(w) + " merged away from its absorber";
      }
    }
  }
  // Distinct sites among live walkers, and monotone cohorts.
  std::map<double, std::size_t> cohort_last;
  for (double t : times) {
    std::set<std::int64_t> sites;
    for (std::size_t w = 0; w < n; ++w) {
      if (origins[w].time > t || frozen[w]) continue;
      if (merges[w] && merges[w]->time <= t) continue;
      if (!sites.insert(position(w, t)).second) {
        return "two unmerged walkers share a site at time " + std::to_string(t);
      }
    }
    std::map<double, std::set<std::int64_t>> cohorts;
    for (std::size_t w = 0; w < n; ++w) {
      if (origins[w].time <= t) cohorts[origins[w].time].insert(position(w, t));
    }
    for (const auto& [birth, s] : cohorts) {
      auto it = cohort_last.find(birth);
      if (it != cohort_last.end() && s.size() > it->second) {
        return "occupied count of the cohort born at " + std::to_string(birth) + " increased";
      }
      cohort_last[birth] = s.size();
    }
  }
  return {};
}

bool operator==(const CoalescingSystem& a, const CoalescingSystem& b) {
  return a.window == b.window && a.time_kind == b.time_kind && a.law == b.law && a.origins == b.origins &&
         a.seed == b.seed && a.events == b.events && a.merges == b.merges && a.frozen == b.frozen;
}

// ---------------------------------------------------------------------------
// Discrete time

DiscreteEngine::DiscreteEngine(const SpaceTimeWindow& window, const IncrementDistribution& law,
                               std::vector<Origin> origins, std::uint64_t seed, bool record)
    : window_(window), law_(law), origins_(std::move(origins)), seed_(seed), record_(record) {
  window_.validate(TimeKind::discrete);
  law_.require_discrete_walk();
  for (const auto& o : origins_) {
    if (!window_.in_band(o.site)) throw InvalidArgument("origin site " + std::to_string(o.site) + " outside the window");
    if (o.time < window_.t_lo || o.time > window_.t_hi || o.time != std::floor(o.time)) {
      throw InvalidArgument("origin time outside the window or not an integer");
    }
  }
  const std::size_t n = origins_.size();
  birth_order_.resize(n);
  std::iota(birth_order_.begin(), birth_order_.end(), std::size_t{0});
  std::stable_sort(birth_order_.begin(), birth_order_.end(),
                   [&](std::size_t a, std::size_t b) { return origins_[a].time < origins_[b].time; });
  now_ = static_cast<std::int64_t>(window_.t_lo);
  end_ = static_cast<std::int64_t>(window_.t_hi);
  rng_.resize(n);
  site_.assign(n, 0);
  frozen_.assign(n, 0);
  born_.assign(n, 0);
  merges_.assign(n, std::nullopt);
  if (record_) events_.resize(n);
  const auto band = static_cast<std::size_t>(window_.band_hi() - window_.band_lo());
  owner_.assign(band, 0);
  stamp_.assign(band, std::numeric_limits<std::int64_t>::min());
  // Register nobody yet; births at t_lo populate the owner table.
  births();
}

void DiscreteEngine::merge_into(std::size_t loser, std::size_t winner) {
  merges_[loser] = MergeRecord{static_cast<double>(now_), winner};
}

void DiscreteEngine::births() {
  bool any = false;
  while (next_birth_ < birth_order_.size() &&
         origins_[birth_order_[next_birth_]].time == static_cast<double>(now_)) {
    const std::size_t w = birth_order_[next_birth_++];
    const std::int64_t s = window_.wrap(origins_[w].site);
    born_[w] = 1;
    site_[w] = s;
    rng_[w] = SplitMix64(derive_stream(seed_, w));
    if (record_) events_[w].push_back({static_cast<double>(now_), s});
    const auto slot = static_cast<std::size_t>(s - window_.band_lo());
    if (stamp_[slot] == now_) {
      const auto v = static_cast<std::size_t>(owner_[slot]);
      if (w < v) {
        merge_into(v, w);
        owner_[slot] = static_cast<std::int64_t>(w);
      } else {
        merge_into(w, v);
      }
    } else {
      stamp_[slot] = now_;
      owner_[slot] = static_cast<std::int64_t>(w);
    }
    any = true;
  }
  if (!any) return;
  std::vector<std::size_t> next;
  next.reserve(alive_.size() + 8);
  for (std::size_t w = 0; w < origins_.size(); ++w) {
    if (born_[w] && !merges_[w] && !frozen_[w]) next.push_back(w);
  }
  alive_.swap(next);
}

void DiscreteEngine::advance() {
  if (done()) return;
  const std::int64_t next_time = now_ + 1;
  for (std::size_t w : alive_) {
    const std::int64_t dest = window_.wrap(site_[w] + law_.sample(rng_[w]));
    site_[w] = dest;
    if (record_) events_[w].push_back({static_cast<double>(next_time), dest});
    if (!window_.in_band(dest)) frozen_[w] = 1;
  }
  now_ = next_time;
  std::size_t keep = 0;
  for (std::size_t k = 0; k < alive_.size(); ++k) {
    const std::size_t w = alive_[k];
    if (frozen_[w]) continue;
    const auto slot = static_cast<std::size_t>(site_[w] - window_.band_lo());
    if (stamp_[slot] == now_) {
      merge_into(w, static_cast<std::size_t>(owner_[slot]));
      continue;
    }
    stamp_[slot] = now_;
    owner_[slot] = static_cast<std::int64_t>(w);
    alive_[keep++] = w;
  }
  alive_.resize(keep);
  births();
}

bool DiscreteEngine::frozen_from_window() const {
  for (std::size_t w = 0; w < origins_.size(); ++w) {
    if (frozen_[w] && origins_[w].site >= window_.x_lo && origins_[w].site < window_.x_hi) return true;
  }
  return false;
}

CoalescingSystem DiscreteEngine::finish() && {
  CoalescingSystem s;
  s.window = window_;
  s.time_kind = TimeKind::discrete;
  s.law = law_;
  s.origins = std::move(origins_);
  s.seed = seed_;
  s.events = std::move(events_);
  s.merges = std::move(merges_);
  s.frozen = std::move(frozen_);
  return s;
}

CoalescingSystem simulate_discrete(const SpaceTimeWindow& window, const IncrementDistribution& law,
                                   const std::vector<Origin>& origins, std::uint64_t seed) {
  DiscreteEngine engine(window, law, origins, seed, true);
  engine.run();
  return std::move(engine).finish();
}

// ---------------------------------------------------------------------------
// Continuous time

SiteClocks::Clock& SiteClocks::clock(std::int64_t site) {
  auto it = clocks_.find(site);
  if (it == clocks_.end()) {
    it = clocks_.emplace(site, Clock{SplitMix64(derive_stream(seed_, site_key(site))), {}}).first;
  }
  return it->second;
}

void SiteClocks::extend(Clock& c, double t) {
  while (c.rings.empty() || c.rings.back().time <= t) {
    const double prev = c.rings.empty() ? t_start_ : c.rings.back().time;
    const double gap = c.rng.exponential();
    const int y = law_->sample(c.rng);
    c.rings.push_back({prev + gap, y});
  }
}

SiteClocks::Ring SiteClocks::next_after(std::int64_t site, double t, bool inclusive) {
  Clock& c = clock(site);
  extend(c, t);
  auto it = inclusive ? std::lower_bound(c.rings.begin(), c.rings.end(), t,
                                         [](const Ring& r, double v) { return r.time < v; })
                      : std::upper_bound(c.rings.begin(), c.rings.end(), t,
                                         [](double v, const Ring& r) { return v < r.time; });
  return *it;
}

std::vector<SiteClocks::Ring> SiteClocks::rings_in(std::int64_t site, double t_a, double t_b) {
  Clock& c = clock(site);
  extend(c, t_b);
  std::vector<Ring> out;
  for (const auto& r : c.rings) {
    if (r.time >= t_a && r.time < t_b) out.push_back(r);
  }
  return out;
}

CoalescingSystem simulate_continuous(const SpaceTimeWindow& window, const IncrementDistribution& law,
                                     const std::vector<Origin>& origins, std::uint64_t seed) {
  window.validate(TimeKind::continuous);
  law.require_continuous_walk();
  for (const auto& o : origins) {
    if (!window.in_band(o.site)) throw InvalidArgument("origin site " + std::to_string(o.site) + " outside the window");
    if (o.time < window.t_lo || o.time > window.t_hi) throw InvalidArgument("origin time outside the window");
  }
  CoalescingSystem sys;
  sys.window = window;
  sys.time_kind = TimeKind::continuous;
  sys.law = law;
  sys.origins = origins;
  sys.seed = seed;
  const std::size_t n = origins.size();
  sys.events.resize(n);
  sys.merges.assign(n, std::nullopt);
  sys.frozen.assign(n, 0);

  // Births at equal times: ring-taking births, then the ring, then waiting births.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (origins[a].time != origins[b].time) return origins[a].time < origins[b].time;
    return origins[a].takes_birth_ring && !origins[b].takes_birth_ring;
  });

  SiteClocks clocks(law, seed, window.t_lo);
  std::unordered_map<std::int64_t, std::size_t> occupant;
  using Pending = std::tuple<double, std::int64_t, int>;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> rings;

  auto arm = [&](std::int64_t site, double t, bool inclusive) {
    const auto r = clocks.next_after(site, t, inclusive);
    rings.emplace(r.time, site, r.y);
  };
  auto land = [&](std::size_t w, std::int64_t site, double t, bool inclusive) {
    auto it = occupant.find(site);
    if (it == occupant.end()) {
      occupant.emplace(site, w);
      arm(site, t, inclusive);
      return;
    }
    const std::size_t v = it->second;
    if (w < v) {
      sys.merges[v] = MergeRecord{t, w};
      it->second = w;
    } else {
      sys.merges[w] = MergeRecord{t, v};
    }
  };

  std::size_t next = 0;
  for (;;) {
    const double ring_time = rings.empty() ? INFINITY : std::get<0>(rings.top());
    if (next < n) {
      const Origin& o = origins[order[next]];
      const bool birth_first = o.time < ring_time || (o.time == ring_time && o.takes_birth_ring);
      if (birth_first && o.time <= window.t_hi) {
        const std::size_t w = order[next++];
        const std::int64_t s = window.wrap(o.site);
        sys.events[w].push_back({o.time, s});
        land(w, s, o.time, o.takes_birth_ring);
        continue;
      }
    }
    if (!(ring_time < window.t_hi)) break;
    const auto [t, site, y] = rings.top();
    rings.pop();
    const auto it = occupant.find(site);
    const std::size_t w = it->second;
    occupant.erase(it);
    const std::int64_t dest = window.wrap(site + y);
    sys.events[w].push_back({t, dest});
    if (!window.in_band(dest)) {
      sys.frozen[w] = 1;
      continue;
    }
    land(w, dest, t, false);
  }
  return sys;
}

std::vector<Origin> jump_point_origins(const SpaceTimeWindow& window, const IncrementDistribution& law,
                                       std::uint64_t seed) {
  SiteClocks clocks(law, seed, window.t_lo);
  std::vector<Origin> out;
  for (std::int64_t x = window.x_lo; x < window.x_hi; ++x) {
    for (const auto& r : clocks.rings_in(x, window.t_lo, window.t_hi)) {
      out.push_back({x, r.time, false});
      out.push_back({x, r.time, true});
    }
  }
  return out;
}

std::vector<Origin> full_band_origins(const SpaceTimeWindow& window, double time) {
  std::vector<Origin> out;
  out.reserve(static_cast<std::size_t>(window.band_hi() - window.band_lo()));
  for (std::int64_t x = window.band_lo(); x < window.band_hi(); ++x) out.push_back({x, time, false});
  return out;
}

// ---------------------------------------------------------------------------
// Paths

namespace {

std::vector<Breakpoint> step_chain(const CoalescingSystem& sys, std::size_t w) {
  std::vector<Breakpoint> out;
  double start = -INFINITY;
  bool first = true;
  for (;;) {
    const double end = sys.merges[w] ? sys.merges[w]->time : INFINITY;
    for (const auto& e : sys.events[w]) {
      if ((first || e.time > start) && e.time <= end) {
        out.push_back({e.time, static_cast<double>(e.site)});
      }
    }
    if (!sys.merges[w]) break;
    start = end;
    first = false;
    w = sys.merges[w]->absorber;
  }
  return out;
}

}  // namespace

PathSet paths_of(const CoalescingSystem& sys, PathKind view) {
  PathSet out;
  out.reserve(sys.size());
  const double t_end = sys.window.t_hi;
  for (std::size_t w = 0; w < sys.size(); ++w) {
    auto steps = step_chain(sys, w);
    if (view == PathKind::step || sys.time_kind == TimeKind::discrete) {
      out.emplace_back(view, std::move(steps), t_end);
      continue;
    }
    std::vector<Breakpoint> kappa{steps.front()};
    for (std::size_t k = 1; k < steps.size(); ++k) kappa.push_back({steps[k].t, steps[k - 1].x});
    if (steps.size() > 1 && t_end > steps.back().t) kappa.push_back({t_end, steps.back().x});
    out.emplace_back(PathKind::interpolated, std::move(kappa), t_end);
  }
  return out;
}

ScaledPathSet rescale(const PathSet& paths, double delta, double sigma) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in (0, 1]");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  ScaledPathSet out{delta, sigma, {}};
  const double ts = delta * delta;
  const double xs = delta / sigma;
  out.paths.reserve(paths.size());
  for (const auto& p : paths) {
    std::vector<Breakpoint> bps;
    bps.reserve(p.breakpoints().size());
    for (const auto& b : p.breakpoints()) bps.push_back({ts * b.t, xs * b.x});
    out.paths.emplace_back(p.kind(), std::move(bps), ts * p.t_end());
  }
  return out;
}

ScaledPathSet rescale(const CoalescingSystem& system, PathKind view, double delta) {
  return rescale(paths_of(system, view), delta, system.law.sigma());
}

// ---------------------------------------------------------------------------
// Density and exact enumeration

bool density_width_ok(const IncrementDistribution& law, std::int64_t t, std::int64_t width) {
  const std::int64_t m = std::max(std::abs(law.min_offset()), std::abs(law.max_offset()));
  if (width >= 4 * m * t + 1) return true;
  return static_cast<double>(width) >= 10.0 * law.sigma() * std::sqrt(static_cast<double>(t));
}

DensityEstimate density(const IncrementDistribution& law, std::int64_t t, std::int64_t width,
                        std::size_t trials, std::uint64_t seed) {
  if (t < 0) throw InvalidArgument("density time must be nonnegative");
  if (trials == 0) throw InvalidArgument("density needs at least one trial");
  if (width < 3) throw InvalidArgument("torus width must be at least 3");
  law.require_discrete_walk();
  if (!density_width_ok(law, t, width)) {
    throw GuardViolation("torus width " + std::to_string(width) + " below 10 sigma sqrt(t) for t = " +
                         std::to_string(t));
  }
  if (t == 0) return {1.0, 0.0, trials};
  SpaceTimeWindow window{0, width, 0.0, static_cast<double>(t), Boundary::torus, 0};
  const auto origins = full_band_origins(window, 0.0);
  RunningStats stats;
  for (std::size_t k = 0; k < trials; ++k) {
    DiscreteEngine engine(window, law, origins, derive_stream(seed, k), false);
    engine.run();
    stats.add(static_cast<double>(engine.alive().size()) / static_cast<double>(width));
  }
  return {stats.mean(), stats.se(), trials};
}

ExactOccupancy enumerate_exact(const IncrementDistribution& law, std::int64_t width, std::int64_t steps) {
  if (width < 3 || width > 62) throw InvalidArgument("enumeration torus width must lie in [3, 62]");
  if (steps < 0) throw InvalidArgument("enumeration steps must be nonnegative");
  const auto& support = law.exact_support();
  const std::size_t k = support.size();
  const std::int64_t slots = width * steps;
  const double budget = std::pow(static_cast<double>(k), static_cast<double>(slots));
  if (budget > kEnumerationBudget) {
    std::ostringstream msg;
    msg << "enumeration needs " << k << "^" << slots << " = " << budget << " field evaluations, budget is "
        << kEnumerationBudget;
    throw GuardViolation(msg.str());
  }
  ExactOccupancy out;
  out.width = width;
  out.steps = steps;
  const std::uint64_t full = (std::uint64_t{1} << width) - 1;

  // Group field assignments by (final occupied mask, count of each support index).
  std::map<std::pair<std::uint64_t, std::vector<std::uint8_t>>, std::uint64_t> groups;
  std::vector<std::size_t> digit(static_cast<std::size_t>(slots), 0);
  std::vector<std::uint8_t> counts(k, 0);
  counts[0] = static_cast<std::uint8_t>(slots);
  for (;;) {
    std::uint64_t mask = full;
    for (std::int64_t n = 0; n < steps; ++n) {
      std::uint64_t next = 0;
      for (std::int64_t x = 0; x < width; ++x) {
        if (!(mask >> x & 1)) continue;
        const std::int64_t off = support[digit[static_cast<std::size_t>(n * width + x)]].offset;
        std::int64_t y = (x + off) % width;
        if (y < 0) y += width;
        next |= std::uint64_t{1} << y;
      }
      mask = next;
    }
    ++groups[{mask, counts}];
    std::size_t pos = 0;
    while (pos < digit.size()) {
      --counts[digit[pos]];
      if (++digit[pos] < k) {
        ++counts[digit[pos]];
        break;
      }
      digit[pos] = 0;
      ++counts[0];
      ++pos;
    }
    if (pos == digit.size()) break;
  }

  std::map<std::uint64_t, Rational> mask_prob;
  for (const auto& [key, count] : groups) {
    Rational w(count);
    for (std::size_t i = 0; i < k; ++i) {
      for (int c = 0; c < key.second[i]; ++c) w *= support[i].prob;
    }
    mask_prob[key.first] += w;
  }
  const auto wn = static_cast<std::size_t>(width);
  out.single.assign(wn, Rational(0));
  out.pair.assign(wn, std::vector<Rational>(wn, Rational(0)));
  for (const auto& [mask, p] : mask_prob) {
    for (std::size_t x = 0; x < wn; ++x) {
      if (!(mask >> x & 1)) continue;
      out.single[x] += p;
      for (std::size_t y = 0; y < wn; ++y) {
        if (mask >> y & 1) out.pair[x][y] += p;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event log

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("bad number '" + s + "' in event log");
  }
  if (used != s.size()) throw InvalidArgument("bad number '" + s + "' in event log");
  return v;
}

}  // namespace

void write_event_log(std::ostream& out, const CoalescingSystem& s) {
  out << "coalweb-event-log 1\n";
  out << "time_kind " << to_string(s.time_kind) << '\n';
  out << "window " << s.window.x_lo << ' ' << s.window.x_hi << ' ' << fmt(s.window.t_lo) << ' '
      << fmt(s.window.t_hi) << ' ' << to_string(s.window.boundary) << ' ' << s.window.buffer << '\n';
  out << "law " << s.law.text() << '\n';
  out << "seed " << s.seed << '\n';
  out << "walkers " << s.size() << '\n';
  for (std::size_t w = 0; w < s.size(); ++w) {
    out << "origin " << w << ' ' << s.origins[w].site << ' ' << fmt(s.origins[w].time) << ' '
        << (s.origins[w].takes_birth_ring ? 1 : 0) << '\n';
  }
  for (std::size_t w = 0; w < s.size(); ++w) {
    for (const auto& e : s.events[w]) out << w << ' ' << fmt(e.time) << ' ' << e.site << '\n';
  }
  for (std::size_t w = 0; w < s.size(); ++w) {
    if (s.merges[w]) out << "merge " << w << ' ' << fmt(s.merges[w]->time) << ' ' << s.merges[w]->absorber << '\n';
  }
  for (std::size_t w = 0; w < s.size(); ++w) {
    if (s.frozen[w]) out << "frozen " << w << '\n';
  }
  out << "end\n";
}

CoalescingSystem read_event_log(std::istream& in) {
  CoalescingSystem s;
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw InvalidArgument("event log ends early");
    return std::istringstream(line);
  };
  {
    auto ls = next_line();
    std::string tag;
    int version = 0;
    ls >> tag >> version;
    if (tag != "coalweb-event-log" || version != 1) throw InvalidArgument("not a coalweb event log");
  }
  std::size_t walkers = 0;
  bool saw_end = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "time_kind") {
      std::string k;
      ls >> k;
      s.time_kind = parse_time_kind(k);
    } else if (tag == "window") {
      std::string t_lo, t_hi, b;
      ls >> s.window.x_lo >> s.window.x_hi >> t_lo >> t_hi >> b >> s.window.buffer;
      s.window.t_lo = parse_double(t_lo);
      s.window.t_hi = parse_double(t_hi);
      s.window.boundary = parse_boundary(b);
    } else if (tag == "law") {
      std::string text;
      ls >> text;
      s.law = parse_law(text);
    } else if (tag == "seed") {
      ls >> s.seed;
    } else if (tag == "walkers") {
      ls >> walkers;
      s.origins.resize(walkers);
      s.events.resize(walkers);
      s.merges.assign(walkers, std::nullopt);
      s.frozen.assign(walkers, 0);
    } else if (tag == "origin") {
      std::size_t w = 0;
      std::string t;
      int ring = 0;
      ls >> w;
      if (w >= walkers) throw InvalidArgument("origin for unknown walker");
      ls >> s.origins[w].site >> t >> ring;
      s.origins[w].time = parse_double(t);
      s.origins[w].takes_birth_ring = ring != 0;
    } else if (tag == "merge") {
      std::size_t w = 0, a = 0;
      std::string t;
      ls >> w >> t >> a;
      if (w >= walkers || a >= walkers) throw InvalidArgument("merge for unknown walker");
      s.merges[w] = MergeRecord{parse_double(t), a};
    } else if (tag == "frozen") {
      std::size_t w = 0;
      ls >> w;
      if (w >= walkers) throw InvalidArgument("frozen flag for unknown walker");
      s.frozen[w] = 1;
    } else if (tag == "end") {
      saw_end = true;
      break;
    } else {
      const std::size_t w = std::stoul(tag);
      std::string t;
      std::int64_t site = 0;
      ls >> t >> site;
      if (w >= walkers) throw InvalidArgument("event for unknown walker");
      s.events[w].push_back({parse_double(t), site});
    }
    if (ls.fail()) throw InvalidArgument("malformed event log line '" + line + "'");
  }
  if (!saw_end) throw InvalidArgument("event log has no end marker");
  return s;
}

}  // namespace coalweb
