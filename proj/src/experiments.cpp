#include "coalweb/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "coalweb/coalescence_maps.hpp"
#include "coalweb/error.hpp"
#include "coalweb/path_space.hpp"
#include "coalweb/rng.hpp"
#include "coalweb/stats.hpp"
#include "coalweb/voter.hpp"

namespace coalweb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kHalvingTrials = 2000;  // bm_reference trials that also run the dt/2 pair
constexpr std::uint64_t kSupGapTrials = 200;    // interface trials that record jump points
constexpr std::int64_t kExcursionCap = 10000;
constexpr int kMaxBufferDoublings = 8;

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ExperimentKind::density_scan, "density_scan"},     {ExperimentKind::etahat, "etahat"},
    {ExperimentKind::pointprocess, "pointprocess"},     {ExperimentKind::negcorr_exact, "negcorr_exact"},
    {ExperimentKind::negcorr_mc, "negcorr_mc"},         {ExperimentKind::overshoot, "overshoot"},
    {ExperimentKind::interface_clt, "interface_clt"},   {ExperimentKind::fg_convergence, "fg_convergence"},
    {ExperimentKind::tightness_scan, "tightness_scan"}, {ExperimentKind::hitting_tail, "hitting_tail"},
    {ExperimentKind::bm_reference, "bm_reference"},
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::int64_t steps_for(double t, double delta) {
  const double n = t / (delta * delta);
  const auto k = static_cast<std::int64_t>(std::llround(n));
  if (k < 1) throw GuardViolation("rescaled time " + fmt_short(t) + " is below one lattice step at delta " + fmt_short(delta));
  return k;
}

// Sites x with a < delta x / sigma < b.
std::pair<std::int64_t, std::int64_t> interval_sites(double a, double b, double delta, double sigma) {
  const auto lo = static_cast<std::int64_t>(std::floor(a * sigma / delta)) + 1;
  const auto hi = static_cast<std::int64_t>(std::ceil(b * sigma / delta));
  if (lo >= hi) throw GuardViolation("interval contains no lattice site at delta " + fmt_short(delta));
  return {lo, hi};
}

std::vector<double> column(const std::vector<std::vector<double>>& obs, std::size_t j) {
  std::vector<double> out;
  out.reserve(obs.size());
  for (const auto& row : obs) {
    if (j < row.size() && !std::isnan(row[j])) out.push_back(row[j]);
  }
  return out;
}

RunningStats stats_of(const std::vector<double>& v) {
  RunningStats s;
  for (double x : v) s.add(x);
  return s;
}

struct CellBuilder {
  const ExperimentConfig& config;
  std::vector<ReportCell>& cells;

  ReportCell& add(std::string name, std::string params, double estimate, double se, double reference,
                  std::string provenance, Sidedness side, double tolerance, double se_multiplier = 3.0) {
    ReportCell c;
    c.name = std::move(name);
    c.params = std::move(params);
    c.estimate = estimate;
    c.se = se;
    c.reference = reference;
    c.provenance = std::move(provenance);
    c.sidedness = side;
    c.tolerance = config.tolerance.value_or(tolerance);
    c.threshold = config.tolerance ? c.tolerance : std::max(c.tolerance, se_multiplier * se);
    const bool finite = std::isfinite(estimate);
    switch (side) {
      case Sidedness::info: c.verdict = finite ? Verdict::info : Verdict::fail; break;
      case Sidedness::two_sided:
        c.verdict = finite && std::abs(estimate - reference) <= c.threshold ? Verdict::pass : Verdict::fail;
        break;
      case Sidedness::upper:
        c.verdict = finite && estimate <= reference + c.threshold ? Verdict::pass : Verdict::fail;
        break;
      case Sidedness::lower:
        c.verdict = finite && estimate >= reference - c.threshold ? Verdict::pass : Verdict::fail;
        break;
    }
    cells.push_back(std::move(c));
    return cells.back();
  }
};

// ---------------------------------------------------------------------------
// density_scan

std::vector<double> observe_density(const ExperimentConfig& c, std::uint64_t seed) {
  const auto tmax = static_cast<std::int64_t>(*std::max_element(c.ts.begin(), c.ts.end()));
  SpaceTimeWindow w{0, c.width, 0.0, static_cast<double>(tmax), Boundary::torus, 0};
  DiscreteEngine engine(w, c.law, full_band_origins(w, 0.0), seed, false);
  std::map<std::int64_t, double> at;
  while (true) {
    at[static_cast<std::int64_t>(engine.time())] =
        static_cast<double>(engine.alive().size()) / static_cast<double>(c.width);
    if (engine.done()) break;
    engine.advance();
  }
  std::vector<double> out;
  for (double t : c.ts) out.push_back(at.at(static_cast<std::int64_t>(t)));
  return out;
}

void finalize_density(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs, CellBuilder& cb) {
  for (std::size_t j = 0; j < c.ts.size(); ++j) {
    const double scale = c.law.sigma() * std::sqrt(kPi * c.ts[j]);
    const auto s = stats_of(column(obs, j));
    cb.add("scaled_density", "t=" + fmt_short(c.ts[j]) + " width=" + std::to_string(c.width), scale * s.mean(),
           scale * s.se(), 1.0, "claim:density_asymptotic", Sidedness::two_sided, 0.05);
  }
}

// ---------------------------------------------------------------------------
// etahat: occupied sites in (a, b) at time t of walkers started from every
// site of a buffered band at time 0

struct EtahatCount {
  double count = 0.0;
  double reruns = 0.0;
};

EtahatCount count_from_full_band(const ExperimentConfig& c, double delta, double t, Boundary boundary,
                                 std::uint64_t seed) {
  const std::int64_t n = steps_for(t, delta);
  const auto [lo, hi] = interval_sites(c.a, c.b, delta, c.law.sigma());
  EtahatCount out;
  if (boundary == Boundary::torus) {
    std::int64_t width = c.width;
    if (width == 0) {
      width = static_cast<std::int64_t>(std::ceil(10.0 * c.law.sigma() * std::sqrt(static_cast<double>(n)))) +
              (hi - lo) + 2;
    }
    if (static_cast<double>(width) < 10.0 * c.law.sigma() * std::sqrt(static_cast<double>(n)) || width < hi - lo + 2) {
      throw GuardViolation("torus width " + std::to_string(width) + " is below 10 sigma sqrt(t)");
    }
    const std::int64_t x_lo = lo - (width - (hi - lo)) / 2;
    SpaceTimeWindow w{x_lo, x_lo + width, 0.0, static_cast<double>(n), Boundary::torus, 0};
    DiscreteEngine engine(w, c.law, full_band_origins(w, 0.0), seed, false);
    engine.run();
    for (auto k : engine.alive()) {
      const auto s = engine.site_of(k);
      if (s >= lo && s < hi) out.count += 1.0;
    }
    return out;
  }
  std::int64_t buffer = default_buffer(c.law, static_cast<double>(n));
  for (int attempt = 0;; ++attempt) {
    SpaceTimeWindow w{lo, hi, 0.0, static_cast<double>(n), Boundary::buffered_open, buffer};
    DiscreteEngine engine(w, c.law, full_band_origins(w, 0.0), seed, false);
    engine.run();
    if (engine.frozen_from_window()) {
      if (attempt == kMaxBufferDoublings) throw GuardViolation("walkers keep leaving the buffered band");
      buffer *= 2;
      out.reruns += 1.0;
      continue;
    }
    for (auto k : engine.alive()) {
      const auto s = engine.site_of(k);
      if (s >= lo && s < hi) out.count += 1.0;
    }
    return out;
  }
}

std::vector<double> observe_etahat(const ExperimentConfig& c, std::uint64_t seed) {
  std::vector<double> out;
  std::uint64_t j = 0;
  for (double d : c.deltas) {
    for (double t : c.ts) {
      const auto r = count_from_full_band(c, d, t, Boundary::buffered_open, derive_stream(seed, j++));
      out.push_back(r.count);
      out.push_back(r.reruns);
    }
  }
  return out;
}

void finalize_etahat(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs, CellBuilder& cb) {
  std::vector<RunningStats> per;
  std::size_t j = 0;
  double reruns = 0.0;
  for (double d : c.deltas) {
    for (double t : c.ts) {
      const auto s = stats_of(column(obs, 2 * j));
      for (double v : column(obs, 2 * j + 1)) reruns += v;
      const double ref = etahat_reference(c.a, c.b, t);
      cb.add("etahat", "delta=" + fmt_short(d) + " t=" + fmt_short(t), s.mean(), s.se(), ref,
             "claim:dual_counting_bound", Sidedness::upper, 0.10 * ref);
      per.push_back(s);
      ++j;
    }
  }
  if (c.deltas.size() >= 2) {
    const auto fine = static_cast<std::size_t>(std::min_element(c.deltas.begin(), c.deltas.end()) - c.deltas.begin());
    const auto coarse = static_cast<std::size_t>(std::max_element(c.deltas.begin(), c.deltas.end()) - c.deltas.begin());
    for (std::size_t k = 0; k < c.ts.size(); ++k) {
      const auto& f = per[fine * c.ts.size() + k];
      const auto& g = per[coarse * c.ts.size() + k];
      const double se = std::hypot(f.se(), g.se());
      cb.add("etahat_monotone",
             "delta=" + fmt_short(c.deltas[fine]) + " vs " + fmt_short(c.deltas[coarse]) + " t=" + fmt_short(c.ts[k]),
             f.mean() - g.mean(), se, 0.0, "claim:dual_counting_bound", Sidedness::upper, 0.0, 2.0);
    }
  }
  cb.add("buffer_reruns", "", reruns, 0.0, NAN, "oracle:buffer_doubling", Sidedness::info, 0.0);
}

// ---------------------------------------------------------------------------
// pointprocess

std::vector<double> observe_pointprocess(const ExperimentConfig& c, std::uint64_t seed) {
  std::vector<double> out;
  std::uint64_t j = 0;
  for (double d : c.deltas) {
    for (double t : c.ts) out.push_back(count_from_full_band(c, d, t, Boundary::torus, derive_stream(seed, j++)).count);
  }
  return out;
}

void finalize_pointprocess(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs, CellBuilder& cb) {
  std::size_t j = 0;
  for (double d : c.deltas) {
    for (double t : c.ts) {
      const auto s = stats_of(column(obs, j++));
      const double scale = 1.0 / etahat_reference(c.a, c.b, t);
      cb.add("scaled_intensity", "delta=" + fmt_short(d) + " t=" + fmt_short(t), scale * s.mean(), scale * s.se(), 1.0,
             "claim:point_process_intensity", Sidedness::two_sided, 0.10);
    }
  }
}

// ---------------------------------------------------------------------------
// bm_reference

double bm_count(const ExperimentConfig& c, double t, double dt, int coarsen, std::uint64_t seed) {
  std::vector<BmStart> starts;
  const double lo = c.a - 5.0 * std::sqrt(t);
  const double hi = c.b + 5.0 * std::sqrt(t);
  const auto n = static_cast<std::int64_t>(std::floor((hi - lo) / 0.01 + 1e-9));
  for (std::int64_t k = 0; k <= n; ++k) starts.push_back({lo + 0.01 * static_cast<double>(k), 0.0});
  const auto sample = sample_coalescing_bm(starts, t, dt, seed, false, coarsen);
  std::set<std::size_t> reps;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const double x = sample.final_position[i];
    if (x > c.a && x < c.b) reps.insert(sample.state.representative[i]);
  }
  return static_cast<double>(reps.size());
}

std::vector<double> observe_bm(const ExperimentConfig& c, std::uint64_t trial, std::uint64_t seed) {
  std::vector<double> out;
  std::uint64_t j = 0;
  for (double t : c.ts) {
    out.push_back(bm_count(c, t, c.grid_dt, 0, derive_stream(seed, j)));
    if (trial < kHalvingTrials) {
      const auto s = derive_stream(seed, j + 1000);
      out.push_back(bm_count(c, t, 0.5 * c.grid_dt, 1, s) - bm_count(c, t, 0.5 * c.grid_dt, 0, s));
    } else {
      out.push_back(NAN);
    }
    ++j;
  }
  return out;
}

void finalize_bm(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs, CellBuilder& cb) {
  for (std::size_t j = 0; j < c.ts.size(); ++j) {
    const double scale = 1.0 / etahat_reference(c.a, c.b, c.ts[j]);
    const auto s = stats_of(column(obs, 2 * j));
    const auto diff = stats_of(column(obs, 2 * j + 1));
    const std::string params = "t=" + fmt_short(c.ts[j]) + " dt=" + fmt_short(c.grid_dt);
    cb.add("scaled_intensity", params, scale * s.mean(), scale * s.se(), 1.0, "claim:coalescing_bm_intensity",
           Sidedness::two_sided, 0.05);
    cb.add("dt_halving", params, scale * diff.mean(), scale * diff.se(), 0.0, "oracle:dt_halving",
           Sidedness::two_sided, scale * s.se());
  }
}

// ---------------------------------------------------------------------------
// negcorr_exact

void finalize_negcorr_exact(const ExperimentConfig& c, CellBuilder& cb) {
  for (double tv : c.ts) {
    const auto t = static_cast<std::int64_t>(tv);
    const auto occ = enumerate_exact(c.law, c.width, t);
    cb.add("p_single", "t=" + std::to_string(t) + " width=" + std::to_string(c.width),
           static_cast<double>(occ.single[0]), 0.0, NAN, "oracle:enumeration", Sidedness::info, 0.0);
    for (std::int64_t x = 0; x < c.width; ++x) {
      for (std::int64_t y = x + 1; y < c.width; ++y) {
        const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
        const Rational margin = occ.single[ux] * occ.single[uy] - occ.pair[ux][uy];
        auto& cell = cb.add("pair_margin", "x=" + std::to_string(x) + " y=" + std::to_string(y) + " t=" + std::to_string(t),
                            static_cast<double>(margin), 0.0, 0.0, "oracle:enumeration", Sidedness::lower, 0.0);
        cell.tolerance = 0.0;
        cell.threshold = 0.0;
        cell.verdict = margin >= 0 ? Verdict::pass : Verdict::fail;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// negcorr_mc

struct PairCell {
  std::int64_t x, d, t;
};

std::vector<PairCell> negcorr_cells(const ExperimentConfig& c) {
  SplitMix64 rng(derive_stream(c.seed, 0x6e65676330ULL));
  std::vector<PairCell> cells;
  for (std::int64_t d = 1; d <= 20; ++d) {
    const auto x = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(c.width));
    const auto t = 1 + static_cast<std::int64_t>(rng.uniform() * 50.0);
    cells.push_back({std::min(x, c.width - 1), d, std::min<std::int64_t>(t, 50)});
  }
  return cells;
}

std::vector<double> observe_negcorr_mc(const ExperimentConfig& c, std::uint64_t seed) {
  const auto cells = negcorr_cells(c);
  std::int64_t tmax = 0;
  for (const auto& p : cells) tmax = std::max(tmax, p.t);
  SpaceTimeWindow w{0, c.width, 0.0, static_cast<double>(tmax), Boundary::torus, 0};
  DiscreteEngine engine(w, c.law, full_band_origins(w, 0.0), seed, false);
  std::vector<double> out(2 * cells.size());
  std::vector<char> occ(static_cast<std::size_t>(c.width));
  while (true) {
    const auto now = static_cast<std::int64_t>(engine.time());
    bool needed = false;
    for (const auto& p : cells) needed = needed || p.t == now;
    if (needed) {
      std::fill(occ.begin(), occ.end(), 0);
      for (auto k : engine.alive()) occ[static_cast<std::size_t>(engine.site_of(k))] = 1;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].t != now) continue;
        out[2 * i] = occ[static_cast<std::size_t>(cells[i].x)];
        out[2 * i + 1] = occ[static_cast<std::size_t>((cells[i].x + cells[i].d) % c.width)];
      }
    }
    if (engine.done()) break;
    engine.advance();
  }
  return out;
}

void finalize_negcorr_mc(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs, CellBuilder& cb) {
  const auto cells = negcorr_cells(c);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto xs = column(obs, 2 * i);
    const auto ys = column(obs, 2 * i + 1);
    const double mx = stats_of(xs).mean(), my = stats_of(ys).mean();
    RunningStats joint, influence;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      joint.add(xs[k] * ys[k]);
      influence.add(xs[k] * ys[k] - xs[k] * my - ys[k] * mx);
    }
    const auto& p = cells[i];
    cb.add("joint_minus_product",
           "x=" + std::to_string(p.x) + " y=" + std::to_string((p.x + p.d) % c.width) + " t=" + std::to_string(p.t),
           joint.mean() - mx * my, influence.se(), 0.0, "claim:negative_correlation", Sidedness::upper, 0.0);
  }
}

// ---------------------------------------------------------------------------
// overshoot: renewal from -level built from simulated strict ascending
// ladder heights

std::vector<double> observe_overshoot(const ExperimentConfig& c, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::int64_t pos = -c.level;
  double resampled = 0.0;
  while (pos < 0) {
    for (;;) {
      std::int64_t s = 0;
      std::int64_t n = 0;
      while (s <= 0 && n < kExcursionCap) {
        s += c.law.sample(rng);
        ++n;
      }
      if (s > 0) {
        pos += s;
        break;
      }
      resampled += 1.0;
    }
  }
  return {static_cast<double>(pos), resampled};
}

void finalize_overshoot(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs, CellBuilder& cb) {
  const auto limit = overshoot_limit(c.law, ladder_distribution_exact(c.law));
  const auto values = column(obs, 0);
  std::vector<double> emp(limit.size() + 1, 0.0);
  for (double v : values) {
    const auto k = static_cast<std::size_t>(v);
    emp[std::min(k, limit.size())] += 1.0;
  }
  const double n = static_cast<double>(values.size());
  for (auto& e : emp) e /= n;
  auto ref = limit;
  ref.push_back(0.0);
  double var = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) var += ref[k] * (1.0 - ref[k]);
  const std::string params = "level=" + std::to_string(c.level);
  cb.add("overshoot_tv", params, tv_distance(emp, ref), 0.5 * std::sqrt(var / n), 0.0, "oracle:ladder_renewal",
         Sidedness::upper, 0.02);
  for (std::size_t k = 0; k < limit.size(); ++k) {
    cb.add("overshoot_pmf", params + " k=" + std::to_string(k), emp[k], std::sqrt(emp[k] * (1.0 - emp[k]) / n),
           limit[k], "oracle:ladder_renewal", Sidedness::info, 0.0);
  }
  cb.add("capped_excursions", params + " cap=" + std::to_string(kExcursionCap), stats_of(column(obs, 1)).mean(), 0.0,
         NAN, "oracle:excursion_cap", Sidedness::info, 0.0);
}

// ---------------------------------------------------------------------------
// hitting_tail

// Two walkers at distinct sites see independent rate-1 clocks, so the pair
// moves as a difference walk with rate-2 jumps of +Y (walker 1) or -Y
// (walker 0) until it lands on 0.
double coalescence_time(const IncrementDistribution& law, std::int64_t gap, double horizon, SplitMix64& rng) {
  double t = 0.0;
  for (;;) {
    t += rng.exponential(2.0);
    if (t >= horizon) return INFINITY;
    const int y = law.sample(rng);
    gap += rng.uniform() < 0.5 ? y : -y;
    if (gap == 0) return t;
  }
}

std::vector<double> observe_hitting(const ExperimentConfig& c, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return {coalescence_time(c.law, 1, *std::max_element(c.ts.begin(), c.ts.end()), rng)};
}

void finalize_hitting(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs, CellBuilder& cb) {
  auto ts = c.ts;
  std::sort(ts.begin(), ts.end());
  const auto tau = column(obs, 0);
  const double n = static_cast<double>(tau.size());
  std::vector<double> survive;
  for (double t : ts) {
    double k = 0.0;
    for (double v : tau) k += v > t ? 1.0 : 0.0;
    survive.push_back(k);
    const double p = k / n;
    cb.add("sqrt_t_tail", "t=" + fmt_short(t), std::sqrt(t) * p, std::sqrt(t * p * (1.0 - p) / n), NAN,
           "claim:hitting_tail", Sidedness::info, 0.0);
  }
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double n1 = survive[k];
    const double q = n1 > 0.0 ? survive[k + 1] / n1 : NAN;
    const double scale = std::sqrt(ts[k + 1] / ts[k]);
    const double se = n1 > 0.0 ? scale * std::sqrt(q * (1.0 - q) / n1) : NAN;
    cb.add("tail_ratio", "t=" + fmt_short(ts[k + 1]) + "/" + fmt_short(ts[k]), scale * q, se, 1.0,
           "claim:hitting_tail", Sidedness::two_sided, 0.15);
  }
}

// ---------------------------------------------------------------------------
// interface_clt

std::vector<double> interface_times(const ExperimentConfig& c) {
  std::vector<double> times = c.ts;
  for (double d : c.deltas) times.push_back(std::round(1.0 / (d * d)));
  return times;
}

std::vector<double> observe_interface(const ExperimentConfig& c, std::uint64_t trial, std::uint64_t seed) {
  const auto times = interface_times(c);
  const double horizon = *std::max_element(times.begin(), times.end());
  const bool jumps = trial < kSupGapTrials;
  const auto tr = interface_trace(c.law, c.time_kind, horizon, times, seed, jumps);
  auto sample_at = [&](double t) {
    for (const auto& s : tr.samples) {
      if (s.t == t) return s;
    }
    throw GuardViolation("interface sample missing");
  };
  std::vector<double> out;
  for (double t : c.ts) {
    const auto s = sample_at(t);
    out.push_back(static_cast<double>(s.l));
    out.push_back(static_cast<double>(s.r));
  }
  for (double d : c.deltas) {
    const auto s = sample_at(std::round(1.0 / (d * d)));
    out.push_back(d * static_cast<double>(s.r) / c.law.sigma());
    out.push_back(jumps ? boundary_paths(tr, d, 1.0).sup_gap : NAN);
  }
  return out;
}

void finalize_interface(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs, CellBuilder& cb) {
  const bool asserted = c.time_kind == TimeKind::continuous;
  auto side = [&](Sidedness s) { return asserted ? s : Sidedness::info; };
  const std::string kind = "time=" + to_string(c.time_kind);
  const auto last = c.ts.size() - 1;
  const double tl = c.ts[last];
  auto r_last = column(obs, 2 * last + 1);
  for (auto& v : r_last) v /= c.law.sigma() * std::sqrt(tl);
  cb.add("r_ks_normal", kind + " t=" + fmt_short(tl), ks_distance_normal(r_last), 0.0, 0.0, "claim:interface_clt",
         side(Sidedness::upper), 0.05);
  if (c.ts.size() >= 2) {
    auto widths = [&](std::size_t j) {
      const auto l = column(obs, 2 * j), r = column(obs, 2 * j + 1);
      std::vector<double> w(l.size());
      for (std::size_t k = 0; k < l.size(); ++k) w[k] = r[k] - l[k];
      return integer_histogram(w, -1, 10);
    };
    cb.add("width_tv", kind + " t=" + fmt_short(c.ts[0]) + " vs " + fmt_short(tl), tv_distance(widths(0), widths(last)),
           0.0, 0.0, "claim:interface_width_law", side(Sidedness::upper), 0.05);
  }
  const std::size_t base = 2 * c.ts.size();
  for (std::size_t k = 0; k < c.deltas.size(); ++k) {
    const std::string params = kind + " delta=" + fmt_short(c.deltas[k]);
    const auto gaps = column(obs, base + 2 * k + 1);
    cb.add("median_sup_gap", params, gaps.empty() ? NAN : median(gaps), 0.0, 0.0, "claim:boundary_convergence",
           side(Sidedness::upper), 0.05);
    const auto rbar = column(obs, base + 2 * k);
    cb.add("rbar_variance", params, stats_of(rbar).variance(), variance_se(rbar), 1.0, "claim:boundary_variance",
           side(Sidedness::two_sided), 0.10);
  }
}

// ---------------------------------------------------------------------------
// fg_convergence

std::vector<double> observe_fg(const ExperimentConfig& c, std::uint64_t seed) {
  std::vector<double> out;
  std::uint64_t j = 0;
  for (double d : c.deltas) {
    // Rescaled starts 0, 1, ..., m - 1 sit at lattice sites ceil(i sigma / delta).
    std::vector<Origin> origins;
    for (std::int64_t i = 0; i < c.m; ++i) {
      origins.push_back({static_cast<std::int64_t>(std::ceil(static_cast<double>(i) * c.law.sigma() / d)), 0.0, false});
    }
    const std::int64_t n = steps_for(1.0, d);
    const auto fam = independent_walk_family(c.law, origins, n, derive_stream(seed, j++), PathKind::interpolated);
    auto f = apply_f(fam);
    auto g = apply_g(fam);
    f.paths = rescale(f.paths, d, c.law.sigma()).paths;
    g.paths = rescale(g.paths, d, c.law.sigma()).paths;
    out.push_back(fg_distance(f, g));
  }
  return out;
}

void finalize_fg(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs, CellBuilder& cb) {
  std::vector<std::size_t> order(c.deltas.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return c.deltas[x] > c.deltas[y]; });
  std::vector<RunningStats> p(c.deltas.size());
  for (std::size_t k = 0; k < c.deltas.size(); ++k) {
    for (double v : column(obs, k)) p[k].add(v > c.epsilon ? 1.0 : 0.0);
    cb.add("p_exceed", "delta=" + fmt_short(c.deltas[k]) + " eps=" + fmt_short(c.epsilon), p[k].mean(), p[k].se(), NAN,
           "claim:fg_convergence", Sidedness::info, 0.0);
  }
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const auto& hi = p[order[k]];
    const auto& lo = p[order[k + 1]];
    cb.add("p_exceed_decrease",
           "delta=" + fmt_short(c.deltas[order[k + 1]]) + " minus " + fmt_short(c.deltas[order[k]]),
           lo.mean() - hi.mean(), std::hypot(lo.se(), hi.se()), 0.0, "claim:fg_convergence", Sidedness::upper, 0.0);
  }
  const auto& smallest = p[order.back()];
  cb.add("p_exceed_small", "delta=" + fmt_short(c.deltas[order.back()]) + " eps=" + fmt_short(c.epsilon),
         smallest.mean(), smallest.se(), 0.10, "claim:fg_convergence", Sidedness::upper, 0.0);
}

// ---------------------------------------------------------------------------
// tightness_scan

double tightness_event(const ExperimentConfig& c, double delta, double t, std::uint64_t seed) {
  const double sigma = c.law.sigma();
  const std::int64_t n = steps_for(t, delta);
  const auto reach = static_cast<std::int64_t>(std::ceil(TightnessProbe::widen * c.u * sigma / delta)) + 1;
  std::int64_t buffer = default_buffer(c.law, static_cast<double>(2 * n));
  for (int attempt = 0;; ++attempt) {
    SpaceTimeWindow w{-reach, reach + 1, 0.0, static_cast<double>(2 * n), Boundary::buffered_open, buffer};
    std::vector<Origin> origins;
    for (std::int64_t k = 0; k <= n; ++k) {
      const auto row = full_band_origins(w, static_cast<double>(k));
      origins.insert(origins.end(), row.begin(), row.end());
    }
    DiscreteEngine engine(w, c.law, origins, seed, true);
    engine.run();
    if (engine.frozen_from_window()) {
      if (attempt == kMaxBufferDoublings) throw GuardViolation("walkers keep leaving the buffered band");
      buffer *= 2;
      continue;
    }
    const auto sys = std::move(engine).finish();
    const auto scaled = rescale(sys, PathKind::interpolated, delta);
    TightnessProbe probe;
    probe.x0 = 0.0;
    probe.t0 = 0.0;
    probe.u = c.u;
    probe.t = static_cast<double>(n) * delta * delta;
    return detect_tightness_event(scaled.paths, probe).occurred ? 1.0 : 0.0;
  }
}

std::vector<double> observe_tightness(const ExperimentConfig& c, std::uint64_t seed) {
  std::vector<double> out;
  std::uint64_t j = 0;
  for (double d : c.deltas) {
    for (double t : c.ts) out.push_back(tightness_event(c, d, t, derive_stream(seed, j++)));
  }
  return out;
}

void finalize_tightness(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs, CellBuilder& cb) {
  std::size_t j = 0;
  for (double d : c.deltas) {
    for (double t : c.ts) {
      const auto s = stats_of(column(obs, j++));
      cb.add("g_tilde", "delta=" + fmt_short(d) + " t=" + fmt_short(t) + " u=" + fmt_short(c.u), s.mean() / t,
             s.se() / t, NAN, "claim:tightness_functional", Sidedness::info, 0.0);
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<double> observe(const ExperimentConfig& c, std::uint64_t trial) {
  const std::uint64_t seed = derive_stream(c.seed, trial);
  switch (c.kind) {
    case ExperimentKind::density_scan: return observe_density(c, seed);
    case ExperimentKind::etahat: return observe_etahat(c, seed);
    case ExperimentKind::pointprocess: return observe_pointprocess(c, seed);
    case ExperimentKind::negcorr_exact: return {};
    case ExperimentKind::negcorr_mc: return observe_negcorr_mc(c, seed);
    case ExperimentKind::overshoot: return observe_overshoot(c, seed);
    case ExperimentKind::interface_clt: return observe_interface(c, trial, seed);
    case ExperimentKind::fg_convergence: return observe_fg(c, seed);
    case ExperimentKind::tightness_scan: return observe_tightness(c, seed);
    case ExperimentKind::hitting_tail: return observe_hitting(c, seed);
    case ExperimentKind::bm_reference: return observe_bm(c, trial, seed);
  }
  return {};
}

ExperimentReport finalize(const ExperimentConfig& c, const std::vector<std::vector<double>>& obs) {
  ExperimentReport r;
  r.config = c;
  r.generator = kGeneratorName;
  r.merge_note = "partials ordered by trial range start; observations concatenated in trial-index order";
  CellBuilder cb{c, r.cells};
  switch (c.kind) {
    case ExperimentKind::density_scan: finalize_density(c, obs, cb); break;
    case ExperimentKind::etahat: finalize_etahat(c, obs, cb); break;
    case ExperimentKind::pointprocess: finalize_pointprocess(c, obs, cb); break;
    case ExperimentKind::negcorr_exact: finalize_negcorr_exact(c, cb); break;
    case ExperimentKind::negcorr_mc: finalize_negcorr_mc(c, obs, cb); break;
    case ExperimentKind::overshoot: finalize_overshoot(c, obs, cb); break;
    case ExperimentKind::interface_clt: finalize_interface(c, obs, cb); break;
    case ExperimentKind::fg_convergence: finalize_fg(c, obs, cb); break;
    case ExperimentKind::tightness_scan: finalize_tightness(c, obs, cb); break;
    case ExperimentKind::hitting_tail: finalize_hitting(c, obs, cb); break;
    case ExperimentKind::bm_reference: finalize_bm(c, obs, cb); break;
  }
  return r;
}

void require_integers(const std::vector<double>& ts, const char* what) {
  for (double t : ts) {
    if (t != std::floor(t) || t < 1.0) throw InvalidArgument(std::string(what) + " must be positive integers");
  }
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& e : kKindNames) {
    if (e.kind == k) return e.name;
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (const auto& e : kKindNames) {
    if (s == e.name) return e.kind;
  }
  throw InvalidArgument("unknown experiment kind '" + s + "'");
}

const std::vector<ExperimentKind>& all_experiment_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> v;
    for (const auto& e : kKindNames) v.push_back(e.kind);
    return v;
  }();
  return kinds;
}

std::string to_string(Sidedness s) {
  switch (s) {
    case Sidedness::two_sided: return "two_sided";
    case Sidedness::upper: return "upper";
    case Sidedness::lower: return "lower";
    case Sidedness::info: return "info";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::info: return "info";
  }
  return "?";
}

double etahat_reference(double a, double b, double t) { return (b - a) / std::sqrt(kPi * t); }

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::density_scan:
      c.trials = 50;
      c.ts = {400, 2500};
      c.width = 20000;
      break;
    case ExperimentKind::etahat:
      c.trials = 2000;
      c.deltas = {0.1, 0.02};
      c.ts = {1};
      break;
    case ExperimentKind::pointprocess:
      c.trials = 10000;
      c.deltas = {0.01};
      c.ts = {1};
      break;
    case ExperimentKind::negcorr_exact:
      c.trials = 1;
      c.ts = {2};
      c.width = 5;
      break;
    case ExperimentKind::negcorr_mc:
      c.trials = 10000;
      c.width = 200;
      break;
    case ExperimentKind::overshoot:
      c.law = two_step_law();
      c.trials = 100000;
      break;
    case ExperimentKind::interface_clt:
      c.law = two_step_law();
      c.trials = 2000;
      c.ts = {1000, 10000};
      c.deltas = {0.02};
      break;
    case ExperimentKind::fg_convergence:
      c.law = two_step_law();
      c.trials = 10000;
      c.deltas = {0.1, 0.05, 0.02};
      break;
    case ExperimentKind::tightness_scan:
      c.trials = 2000;
      c.deltas = {0.1, 0.05};
      c.ts = {0.04, 0.01};
      break;
    case ExperimentKind::hitting_tail:
      c.law = two_step_law();
      c.trials = 100000;
      c.ts = {100, 1000, 10000};
      break;
    case ExperimentKind::bm_reference:
      c.trials = 2000;
      c.ts = {1};
      break;
  }
  return c;
}

ExperimentConfig resolve(ExperimentConfig c) {
  const auto d = default_config(c.kind);
  if (c.ts.empty()) c.ts = d.ts;
  if (c.deltas.empty()) c.deltas = d.deltas;
  if (c.width == 0) c.width = d.width;
  if (c.trials < 1) throw InvalidArgument("trials must be at least 1");
  if (c.workers < 1) throw InvalidArgument("workers must be at least 1");
  if (!(c.a < c.b)) throw InvalidArgument("interval needs a < b");
  if (c.width < 0) throw InvalidArgument("width must be nonnegative");
  for (double x : c.deltas) {
    if (!(x > 0.0 && x <= 1.0)) throw InvalidArgument("delta must lie in (0, 1]");
  }
  for (double x : c.ts) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("times must be positive");
  }
  if (c.tolerance && !(*c.tolerance >= 0.0)) throw InvalidArgument("tolerance must be nonnegative");
  switch (c.kind) {
    case ExperimentKind::density_scan:
      require_integers(c.ts, "density times");
      for (double t : c.ts) {
        if (!density_width_ok(c.law, static_cast<std::int64_t>(t), c.width)) {
          throw GuardViolation("torus width " + std::to_string(c.width) + " too small for t = " + fmt_short(t));
        }
      }
      c.law.require_discrete_walk();
      break;
    case ExperimentKind::negcorr_exact:
      require_integers(c.ts, "enumeration steps");
      c.law.require_discrete_walk();
      break;
    case ExperimentKind::negcorr_mc:
      if (c.width < 41) throw InvalidArgument("negcorr_mc needs width above 40");
      c.law.require_discrete_walk();
      break;
    case ExperimentKind::overshoot:
      c.law.require_discrete_walk();
      if (!c.law.mean_zero()) throw GuardViolation("overshoot needs a mean-zero law");
      if (c.level < 1) throw InvalidArgument("overshoot level must be positive");
      break;
    case ExperimentKind::interface_clt:
      if (c.time_kind == TimeKind::discrete) require_integers(c.ts, "discrete interface times");
      break;
    case ExperimentKind::fg_convergence:
      if (c.m < 1) throw InvalidArgument("fg_convergence needs m >= 1");
      if (!(c.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
      c.law.require_discrete_walk();
      break;
    case ExperimentKind::tightness_scan:
      if (!(c.u > 0.0)) throw InvalidArgument("u must be positive");
      c.law.require_discrete_walk();
      break;
    case ExperimentKind::hitting_tail:
      c.law.require_continuous_walk();
      break;
    case ExperimentKind::bm_reference:
      if (!(c.grid_dt > 0.0)) throw InvalidArgument("grid dt must be positive");
      break;
    case ExperimentKind::etahat:
    case ExperimentKind::pointprocess:
      c.law.require_discrete_walk();
      break;
  }
  return c;
}

bool ExperimentReport::all_pass() const {
  return std::none_of(cells.begin(), cells.end(), [](const ReportCell& c) { return c.verdict == Verdict::fail; });
}

PartialReport run_partial(const ExperimentConfig& config, std::uint64_t begin, std::uint64_t end) {
  if (begin > end || end > config.trials) throw InvalidArgument("trial range outside [0, trials)");
  PartialReport p;
  p.config = config;
  p.begin = begin;
  p.end = end;
  p.observations.reserve(end - begin);
  for (std::uint64_t k = begin; k < end; ++k) p.observations.push_back(observe(config, k));
  return p;
}

ExperimentReport merge(std::vector<PartialReport> partials) {
  if (partials.empty()) throw InvalidArgument("nothing to merge");
  std::sort(partials.begin(), partials.end(),
            [](const PartialReport& x, const PartialReport& y) { return x.begin < y.begin; });
  auto config = partials.front().config;
  config.workers = 1;
  std::uint64_t next = 0;
  std::vector<std::vector<double>> obs;
  for (auto& p : partials) {
    auto pc = p.config;
    pc.workers = 1;
    if (!(pc == config)) throw InvalidArgument("partials come from different configs");
    if (p.begin != next) throw InvalidArgument(p.begin < next ? "overlapping trial ranges" : "gap between trial ranges");
    if (p.observations.size() != p.end - p.begin) throw InvalidArgument("partial observation count mismatch");
    for (auto& o : p.observations) obs.push_back(std::move(o));
    next = p.end;
  }
  if (next != config.trials) throw InvalidArgument("partials do not cover every trial");
  config.workers = partials.front().config.workers;
  return finalize(config, obs);
}

ExperimentReport run(const ExperimentConfig& input) {
  const auto start = std::chrono::steady_clock::now();
  const auto config = resolve(input);
  const std::uint64_t workers = std::min<std::uint64_t>(config.workers, config.trials);
  std::vector<PartialReport> partials(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto bound = [&](std::uint64_t k) { return config.trials * k / workers; };
  if (workers == 1) {
    partials[0] = run_partial(config, 0, config.trials);
  } else {
    std::vector<std::thread> pool;
    for (std::uint64_t k = 0; k < workers; ++k) {
      pool.emplace_back([&, k] {
        try {
          partials[k] = run_partial(config, bound(k), bound(k + 1));
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  auto report = merge(std::move(partials));
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string report_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "kind,name,params,estimate,se,reference,provenance,sidedness,tolerance,threshold,verdict\n";
  const auto kind = to_string(r.config.kind);
  for (const auto& c : r.cells) {
    out << kind << ',' << csv_field(c.name) << ',' << csv_field(c.params) << ',' << fmt17(c.estimate) << ','
        << fmt17(c.se) << ',' << fmt17(c.reference) << ',' << c.provenance << ',' << to_string(c.sidedness) << ','
        << fmt17(c.tolerance) << ',' << fmt17(c.threshold) << ',' << to_string(c.verdict) << '\n';
  }
  return out.str();
}

std::string report_json(const ExperimentReport& r) {
  using nlohmann::json;
  const auto& c = r.config;
  json cfg = {{"kind", to_string(c.kind)}, {"law", c.law.text()},     {"trials", c.trials},
              {"seed", c.seed},            {"deltas", c.deltas},      {"ts", c.ts},
              {"interval", {c.a, c.b}},    {"width", c.width},        {"grid_dt", c.grid_dt},
              {"epsilon", c.epsilon},      {"m", c.m},                {"u", c.u},
              {"level", c.level},          {"time_kind", to_string(c.time_kind)}};
  cfg["tolerance"] = c.tolerance ? json(*c.tolerance) : json(nullptr);
  json cells = json::array();
  for (const auto& x : r.cells) {
    cells.push_back({{"name", x.name},
                     {"params", x.params},
                     {"estimate", number(x.estimate)},
                     {"se", number(x.se)},
                     {"reference", number(x.reference)},
                     {"provenance", x.provenance},
                     {"sidedness", to_string(x.sidedness)},
                     {"tolerance", number(x.tolerance)},
                     {"threshold", number(x.threshold)},
                     {"verdict", to_string(x.verdict)}});
  }
  json doc = {{"config", cfg},
              {"cells", cells},
              {"generator", r.generator},
              {"merge_note", r.merge_note},
              {"all_pass", r.all_pass()}};
  return doc.dump(2) + "\n";
}

std::string report_dat(const ExperimentReport& r) {
  std::ostringstream out;
  out << "# index estimate se reference\n";
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    const auto& c = r.cells[k];
    out << k << ' ' << fmt17(c.estimate) << ' ' << fmt17(c.se) << ' ' << fmt17(c.reference) << '\n';
  }
  return out.str();
}

}  // namespace coalweb
