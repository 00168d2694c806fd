#include "coalweb/coalescence_maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "coalweb/error.hpp"

namespace coalweb {

std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::lattice_step: return "lattice_step";
    case FamilyKind::lattice_interpolated: return "lattice_interpolated";
    case FamilyKind::gaussian_grid: return "gaussian_grid";
  }
  return "lattice_step";
}

namespace {

enum class Mode { crossing_at_nodes, crossing_linear, coincidence };

double first_meeting(const Path& a, const Path& b, Mode mode) {
  const double s = std::max(a.t0(), b.t0());
  std::vector<double> grid{s};
  for (const auto& q : a.breakpoints()) {
    if (q.t > s) grid.push_back(q.t);
  }
  for (const auto& q : b.breakpoints()) {
    if (q.t > s) grid.push_back(q.t);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double prev = a.value(grid[0]) - b.value(grid[0]);
  if (prev == 0.0) return s;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double d = a.value(grid[k]) - b.value(grid[k]);
    if (d == 0.0) return grid[k];
    if (mode != Mode::coincidence && (d > 0.0) != (prev > 0.0)) {
      if (mode == Mode::crossing_at_nodes) return grid[k];
      return grid[k - 1] + (grid[k] - grid[k - 1]) * (prev / (prev - d));
    }
    prev = d;
  }
  return INFINITY;
}

// Union-find over indices where the root is always the smallest index.
struct Classes {
  std::vector<std::size_t> parent;
  std::vector<double> absorbed_at;
  std::vector<std::size_t> winner;
  std::vector<MergeEntry> log;

  explicit Classes(std::size_t n) : parent(n), absorbed_at(n, INFINITY), winner(n, 0) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  bool unite(std::size_t i, std::size_t j, double t) {
    std::size_t ri = find(i), rj = find(j);
    if (ri == rj) return false;
    if (rj < ri) std::swap(ri, rj);
    parent[rj] = ri;
    absorbed_at[rj] = t;
    winner[rj] = ri;
    log.push_back({t, rj, ri});
    return true;
  }
  EquivalenceState state() {
    EquivalenceState s;
    for (std::size_t i = 0; i < parent.size(); ++i) s.representative.push_back(find(i));
    s.merge_log = log;
    return s;
  }
  // Own path until absorption, then the winner's (recursively).
  PathSet chain_paths(const PathSet& own) const {
    PathSet out;
    out.reserve(own.size());
    for (std::size_t i = 0; i < own.size(); ++i) {
      Path p = own[i];
      std::size_t cur = i;
      while (std::isfinite(absorbed_at[cur])) {
        p = p.splice(absorbed_at[cur], own[winner[cur]]);
        cur = winner[cur];
      }
      out.push_back(std::move(p));
    }
    return out;
  }
};

CoalescedFamily coalesce(const IndependentFamily& family, Mode mode) {
  const std::size_t m = family.paths.size();
  if (m == 0) throw InvalidArgument("family must contain at least one path");
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double t = first_meeting(family.paths[i], family.paths[j], mode);
      if (std::isfinite(t)) pairs.emplace_back(t, i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  Classes classes(m);
  for (const auto& [t, i, j] : pairs) {
    // Only pairs whose members still lead their class just before t count.
    if (classes.absorbed_at[i] < t || classes.absorbed_at[j] < t) continue;
    classes.unite(i, j, t);
  }
  return {classes.chain_paths(family.paths), classes.state()};
}

}  // namespace

CoalescedFamily apply_g(const IndependentFamily& family) {
  return coalesce(family, family.kind == FamilyKind::lattice_step ? Mode::crossing_at_nodes : Mode::crossing_linear);
}

CoalescedFamily apply_f(const IndependentFamily& family) {
  if (family.kind == FamilyKind::gaussian_grid) {
    throw InvalidArgument("coincidence map needs a lattice family; Gaussian paths almost never coincide");
  }
  return coalesce(family, Mode::coincidence);
}

double dbar(const Path& a, const Path& b) {
  double sup = std::abs(a.t0() - b.t0());
  auto gap = [](double x, double y) { return x == y ? 0.0 : std::abs(x - y); };
  for (const auto* p : {&a, &b}) {
    for (const auto& q : p->breakpoints()) {
      sup = std::max(sup, gap(a.value(q.t), b.value(q.t)));
      sup = std::max(sup, gap(a.left_value(q.t), b.left_value(q.t)));
    }
  }
  return sup;
}

double fg_distance(const CoalescedFamily& f, const CoalescedFamily& g) {
  if (f.paths.size() != g.paths.size()) throw InvalidArgument("families differ in size");
  double d = 0.0;
  for (std::size_t i = 0; i < f.paths.size(); ++i) d = std::max(d, dbar(f.paths[i], g.paths[i]));
  return d;
}

double fg_distance(const IndependentFamily& family) { return fg_distance(apply_f(family), apply_g(family)); }

IndependentFamily independent_walk_family(const IncrementDistribution& law, const std::vector<Origin>& origins,
                                          std::int64_t t_end, std::uint64_t seed, PathKind kind) {
  law.require_discrete_walk();
  IndependentFamily fam;
  fam.kind = kind == PathKind::step ? FamilyKind::lattice_step : FamilyKind::lattice_interpolated;
  for (std::size_t w = 0; w < origins.size(); ++w) {
    const auto& o = origins[w];
    if (o.time != std::floor(o.time) || o.time > static_cast<double>(t_end)) {
      throw InvalidArgument("walk origin time must be an integer not after t_end");
    }
    SplitMix64 rng(derive_stream(seed, w));
    std::vector<Breakpoint> bps{{o.time, static_cast<double>(o.site)}};
    std::int64_t x = o.site;
    for (auto n = static_cast<std::int64_t>(o.time); n < t_end; ++n) {
      x += law.sample(rng);
      bps.push_back({static_cast<double>(n + 1), static_cast<double>(x)});
    }
    fam.paths.emplace_back(kind, std::move(bps), static_cast<double>(t_end));
  }
  return fam;
}

namespace {

class BmStream {
 public:
  BmStream(std::uint64_t seed, double x0, double dt, int block)
      : normals_(seed), x_(x0), scale_(std::sqrt(dt)), block_(block) {}
  double next() {
    for (int i = 0; i < block_; ++i) x_ += scale_ * normals_();
    return x_;
  }

 private:
  NormalStream normals_;
  double x_;
  double scale_;
  int block_;
};

struct Grid {
  double h;
  std::int64_t end;
  std::vector<std::int64_t> start;

  Grid(const std::vector<BmStart>& starts, double horizon, double dt, int coarsen) {
    if (!(dt > 0.0)) throw InvalidArgument("grid dt must be positive");
    if (coarsen < 0 || coarsen > 20) throw InvalidArgument("coarsen level must lie in [0, 20]");
    h = dt * static_cast<double>(1 << coarsen);
    end = std::llround(horizon / h);
    if (std::abs(static_cast<double>(end) * h - horizon) > 1e-9 * std::max(1.0, std::abs(horizon))) {
      throw InvalidArgument("horizon is not a multiple of the grid step");
    }
    for (const auto& s : starts) {
      const std::int64_t k = std::llround(s.t / h);
      if (std::abs(static_cast<double>(k) * h - s.t) > 1e-9 * std::max(1.0, std::abs(s.t))) {
        throw InvalidArgument("start time is not on the grid");
      }
      if (k > end) throw InvalidArgument("start time after the horizon");
      start.push_back(k);
    }
  }
  double time(std::int64_t k) const { return static_cast<double>(k) * h; }
};

}  // namespace

IndependentFamily independent_bm_family(const std::vector<BmStart>& starts, double horizon, double dt,
                                        std::uint64_t seed, int coarsen) {
  const Grid grid(starts, horizon, dt, coarsen);
  IndependentFamily fam;
  fam.kind = FamilyKind::gaussian_grid;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    BmStream stream(derive_stream(seed, i), starts[i].x, dt, 1 << coarsen);
    std::vector<Breakpoint> bps{{grid.time(grid.start[i]), starts[i].x}};
    for (std::int64_t k = grid.start[i] + 1; k <= grid.end; ++k) bps.push_back({grid.time(k), stream.next()});
    fam.paths.emplace_back(PathKind::interpolated, std::move(bps), grid.time(grid.end));
  }
  return fam;
}

CoalescingBmSample sample_coalescing_bm(const std::vector<BmStart>& starts, double horizon, double dt,
                                        std::uint64_t seed, bool keep_paths, int coarsen) {
  const Grid grid(starts, horizon, dt, coarsen);
  const std::size_t m = starts.size();
  CoalescingBmSample out;
  if (m == 0) return out;

  struct Rep {
    std::size_t idx;
    double x;
    double x_next;
    BmStream stream;
  };
  std::vector<Rep> order;
  std::vector<std::vector<Breakpoint>> own(keep_paths ? m : 0);
  std::vector<double> final_x(m, 0.0);
  Classes classes(m);

  std::vector<std::size_t> by_birth(m);
  std::iota(by_birth.begin(), by_birth.end(), std::size_t{0});
  std::stable_sort(by_birth.begin(), by_birth.end(),
                   [&](std::size_t a, std::size_t b) { return grid.start[a] < grid.start[b]; });
  std::size_t next_birth = 0;

  // Merge every run of order-adjacent reps whose pair meets at exactly t.
  auto merge_group = [&](const std::vector<std::pair<std::size_t, std::size_t>>& adjacent, double t) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t k = 0;
    while (k < adjacent.size()) {
      std::size_t lo = adjacent[k].first, hi = adjacent[k].second;
      while (k + 1 < adjacent.size() && adjacent[k + 1].first == hi) hi = adjacent[++k].second;
      ++k;
      for (std::size_t a = lo; a <= hi; ++a) {
        for (std::size_t b = a + 1; b <= hi; ++b) {
          const std::size_t i = order[a].idx, j = order[b].idx;
          pairs.emplace_back(std::min(i, j), std::max(i, j));
        }
      }
    }
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [i, j] : pairs) classes.unite(i, j, t);
    std::vector<Rep> kept;
    kept.reserve(order.size());
    for (auto& r : order) {
      if (classes.find(r.idx) == r.idx) kept.push_back(std::move(r));
    }
    order.swap(kept);
  };

  double last_t = -INFINITY;
  for (std::int64_t k = grid.start[by_birth[0]]; k <= grid.end; ++k) {
    const double tk = grid.time(k);
    while (next_birth < m && grid.start[by_birth[next_birth]] == k) {
      const std::size_t i = by_birth[next_birth++];
      Rep r{i, starts[i].x, 0.0, BmStream(derive_stream(seed, i), starts[i].x, dt, 1 << coarsen)};
      auto pos = std::lower_bound(order.begin(), order.end(), r.x, [](const Rep& a, double x) { return a.x < x; });
      order.insert(pos, std::move(r));
      if (keep_paths) own[i].push_back({tk, starts[i].x});
    }
    {
      std::vector<std::pair<std::size_t, std::size_t>> ties;
      for (std::size_t a = 0; a + 1 < order.size(); ++a) {
        if (order[a].x == order[a + 1].x) ties.emplace_back(a, a + 1);
      }
      if (!ties.empty()) {
        merge_group(ties, tk);
        last_t = tk;
      }
    }
    if (k == grid.end) break;
    const double tn = grid.time(k + 1);
    for (auto& r : order) {
      r.x_next = r.stream.next();
      if (keep_paths) own[r.idx].push_back({tn, r.x_next});
    }
    for (;;) {
      double best = INFINITY;
      std::vector<std::pair<std::size_t, std::size_t>> group;
      for (std::size_t a = 0; a + 1 < order.size(); ++a) {
        const Rep& p = order[a];
        const Rep& q = order[a + 1];
        const double dn = p.x_next - q.x_next;
        if (dn < 0.0) continue;
        const double dk = p.x - q.x;
        double t = dn == 0.0 ? tn : tk + (tn - tk) * (dk / (dk - dn));
        t = std::max(t, last_t);
        if (t < best) {
          best = t;
          group.clear();
        }
        if (t == best) group.emplace_back(a, a + 1);
      }
      if (group.empty()) break;
      merge_group(group, best);
      last_t = best;
    }
    for (auto& r : order) r.x = r.x_next;
  }
  for (const auto& r : order) final_x[r.idx] = r.x;
  out.final_position.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.final_position[i] = final_x[classes.find(i)];
  if (keep_paths) {
    PathSet own_paths;
    own_paths.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      own_paths.emplace_back(PathKind::interpolated, std::move(own[i]), grid.time(grid.end));
    }
    out.paths = classes.chain_paths(own_paths);
  }
  out.state = classes.state();
  return out;
}

}  // namespace coalweb
