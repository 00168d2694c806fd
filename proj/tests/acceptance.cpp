// Acceptance suite: one PASS/FAIL line per criterion, followed by indented
// detail lines. Pass criterion numbers as arguments to run a subset.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "coalweb/coalescence_maps.hpp"
#include "coalweb/experiments.hpp"
#include "coalweb/path_space.hpp"
#include "coalweb/voter.hpp"
#include "coalweb/walks.hpp"

using namespace coalweb;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ExperimentReport run_kind(ExperimentKind kind, const std::function<void(ExperimentConfig&)>& tweak = {}) {
  auto c = default_config(kind);
  c.seed = 20240601;
  if (tweak) tweak(c);
  return run(resolve(c));
}

std::string describe(const ReportCell& c) {
  std::string s = "[" + to_string(c.verdict) + "] " + c.name;
  if (!c.params.empty()) s += " (" + c.params + ")";
  s += fmt(" estimate=%.6g se=%.3g", c.estimate, c.se);
  if (!std::isnan(c.reference)) s += fmt(" reference=%.6g", c.reference);
  if (c.sidedness != Sidedness::info) s += fmt(" threshold=%.4g", c.threshold);
  return s;
}

// Every non-info cell must pass; info cells are listed.
void check_cells(Outcome& o, const ExperimentReport& r, const std::string& only = "") {
  for (const auto& c : r.cells) {
    if (!only.empty() && c.name != only) continue;
    if (c.verdict == Verdict::info) {
      o.note(describe(c));
    } else {
      o.require(c.verdict == Verdict::pass, describe(c));
    }
  }
}

const ReportCell* find_cell(const ExperimentReport& r, const std::string& name, const std::string& params_part = "") {
  for (const auto& c : r.cells) {
    if (c.name == name && c.params.find(params_part) != std::string::npos) return &c;
  }
  return nullptr;
}

Outcome density_asymptotics() {
  Outcome o;
  const auto r = run_kind(ExperimentKind::density_scan, [](ExperimentConfig& c) { c.ts = {2500}; });
  const auto* c = find_cell(r, "scaled_density");
  o.require(c && std::abs(c->estimate - 1.0) <= 0.05, c ? describe(*c) : "missing cell");
  return o;
}

Outcome density_oracle() {
  Outcome o;
  const auto law = lazy_uniform_law();
  const auto exact = enumerate_exact(law, 5, 1);
  bool all = true;
  for (const auto& p : exact.single) all = all && p == Rational(19, 27);
  o.require(all, "enumerated p_1 = 19/27 at every site of the width-5 torus");
  const auto mc = density(law, 1, 5, 100000, 20240601);
  const double p = 19.0 / 27.0;
  o.require(std::abs(mc.p - p) <= 4.0 * mc.se,
            fmt("Monte Carlo p_1 = %.6f, se %.2g, |diff| / se = %.2f", mc.p, mc.se, std::abs(mc.p - p) / mc.se));
  return o;
}

Outcome dual_counting_bound() {
  Outcome o;
  const auto r = run_kind(ExperimentKind::etahat);
  const auto* fine = find_cell(r, "etahat", "delta=0.02");
  o.require(fine && fine->estimate <= 1.10 / std::sqrt(M_PI) && fine->verdict == Verdict::pass,
            fine ? describe(*fine) : "missing cell");
  const auto* coarse = find_cell(r, "etahat", "delta=0.1");
  if (coarse) o.note(describe(*coarse));
  const auto* mono = find_cell(r, "etahat_monotone");
  o.require(mono && mono->verdict == Verdict::pass, mono ? describe(*mono) : "missing cell");
  check_cells(o, r, "buffer_reruns");
  return o;
}

Outcome point_process() {
  Outcome o;
  const auto r = run_kind(ExperimentKind::pointprocess);
  const auto* c = find_cell(r, "scaled_intensity");
  o.require(c && std::abs(c->estimate - 1.0) <= 0.10, c ? describe(*c) : "missing cell");
  const auto bm = run_kind(ExperimentKind::bm_reference, [](ExperimentConfig& c) { c.trials = 4000; });
  const auto* b = find_cell(bm, "scaled_intensity");
  o.require(b && std::abs(b->estimate - 1.0) <= 0.05, b ? "reference sampler " + describe(*b) : "missing cell");
  check_cells(o, bm, "dt_halving");
  return o;
}

Outcome negative_correlation() {
  Outcome o;
  check_cells(o, run_kind(ExperimentKind::negcorr_exact));
  check_cells(o, run_kind(ExperimentKind::negcorr_mc));
  return o;
}

Outcome overshoot() {
  Outcome o;
  const auto r = run_kind(ExperimentKind::overshoot);
  const auto* tv = find_cell(r, "overshoot_tv");
  o.require(tv && tv->estimate < 0.02, tv ? describe(*tv) : "missing cell");
  check_cells(o, r, "overshoot_pmf");
  check_cells(o, r, "capped_excursions");
  return o;
}

Outcome hitting_tail() {
  Outcome o;
  const auto r = run_kind(ExperimentKind::hitting_tail);
  check_cells(o, r, "sqrt_t_tail");
  for (const auto& c : r.cells) {
    if (c.name == "tail_ratio") o.require(c.estimate >= 0.85 && c.estimate <= 1.15, describe(c));
  }
  return o;
}

Outcome interface_clt() {
  Outcome o;
  const auto r = run_kind(ExperimentKind::interface_clt);
  const auto* ks = find_cell(r, "r_ks_normal");
  o.require(ks && ks->estimate < 0.05, ks ? describe(*ks) : "missing cell");
  const auto* tv = find_cell(r, "width_tv");
  o.require(tv && tv->estimate < 0.05, tv ? describe(*tv) : "missing cell");
  const auto* gap = find_cell(r, "median_sup_gap");
  o.require(gap && gap->estimate < 0.05, gap ? describe(*gap) : "missing cell");
  check_cells(o, r, "rbar_variance");
  const auto d = run_kind(ExperimentKind::interface_clt, [](ExperimentConfig& c) {
    c.time_kind = TimeKind::discrete;
    c.trials = 200;
  });
  for (const auto& c : d.cells) o.note("discrete time, for information: " + describe(c));
  return o;
}

Outcome fg_convergence() {
  Outcome o;
  const auto r = run_kind(ExperimentKind::fg_convergence);
  std::vector<double> p;
  for (const auto& c : r.cells) {
    if (c.name == "p_exceed") {
      o.note(describe(c));
      p.push_back(c.estimate);
    }
  }
  bool decreasing = p.size() == 3;
  for (std::size_t k = 1; k < p.size(); ++k) decreasing = decreasing && p[k] < p[k - 1];
  o.require(decreasing, "P(fg_distance > eps) strictly decreasing along delta = 0.1, 0.05, 0.02");
  const auto* dec = find_cell(r, "p_exceed_decrease");
  if (dec) o.note(describe(*dec));
  o.require(!p.empty() && p.back() < 0.10, fmt("P at delta = 0.02 is %.4f, bound 0.10", p.empty() ? NAN : p.back()));
  return o;
}

Outcome exact_duality() {
  Outcome o;
  SplitMix64 rng(7);
  for (TimeKind kind : {TimeKind::discrete, TimeKind::continuous}) {
    const auto law = kind == TimeKind::discrete ? lazy_uniform_law() : two_step_law();
    int failures = 0;
    const int n = 1000;
    for (int k = 0; k < n; ++k) {
      std::vector<std::uint8_t> init(40);
      for (auto& v : init) v = rng.uniform() < 0.5 ? 1 : 0;
      const CoupledRealization c(law, kind, 0, 40, 10.0, VoterState(0, 40, init), rng());
      std::vector<SpaceTimeSite> a;
      const int size = static_cast<int>(rng.uniform() * 6);
      for (int j = 0; j < size; ++j) {
        const auto x = static_cast<std::int64_t>(rng.uniform() * 40);
        const double t = kind == TimeKind::discrete ? 1.0 + std::floor(rng.uniform() * 10.0)
                                                    : 10.0 * (1.0 - rng.uniform());
        a.push_back({x, t});
      }
      failures += dual_check(c, a) ? 0 : 1;
    }
    o.require(failures == 0, to_string(kind) + fmt(" time: %.0f of %.0f realizations satisfy duality", n - failures, n));
  }
  return o;
}

Path random_path(SplitMix64& rng) {
  const auto kind = rng.uniform() < 0.5 ? PathKind::step : PathKind::interpolated;
  double t = -3.0 + 6.0 * rng.uniform();
  std::vector<Breakpoint> b;
  const int n = 1 + static_cast<int>(rng.uniform() * 6);
  for (int k = 0; k < n; ++k) {
    b.push_back({t, -4.0 + 8.0 * rng.uniform()});
    t += 0.05 + 1.5 * rng.uniform();
  }
  return Path(kind, b, rng.uniform() < 0.1 ? INFINITY : t);
}

PathSet random_set(SplitMix64& rng) {
  PathSet s;
  const int n = 1 + static_cast<int>(rng.uniform() * 3);
  for (int k = 0; k < n; ++k) s.push_back(random_path(rng));
  return s;
}

std::vector<SpacePoint> random_points(SplitMix64& rng) {
  std::vector<SpacePoint> s;
  const int n = 1 + static_cast<int>(rng.uniform() * 5);
  for (int k = 0; k < n; ++k) s.push_back({-5.0 + 10.0 * rng.uniform(), -5.0 + 10.0 * rng.uniform()});
  return s;
}

bool axioms(double ab, double ba, double aa, double ac, double bc, double slack) {
  return aa <= slack && std::abs(ab - ba) <= slack && ab >= 0.0 && ac <= ab + bc + slack;
}

Outcome property_suites() {
  Outcome o;
  SplitMix64 rng(11);
  const int n = 1000;
  int rho_bad = 0, d_bad = 0, h_bad = 0, p_bad = 0;
  for (int k = 0; k < n; ++k) {
    const SpacePoint x{-5 + 10 * rng.uniform(), -5 + 10 * rng.uniform()};
    const SpacePoint y{-5 + 10 * rng.uniform(), -5 + 10 * rng.uniform()};
    const SpacePoint z{-5 + 10 * rng.uniform(), -5 + 10 * rng.uniform()};
    // Exact up to the rounding of one subtraction per term.
    rho_bad += axioms(rho(x, y), rho(y, x), rho(x, x), rho(x, z), rho(y, z), 4e-16) ? 0 : 1;

    const auto a = random_path(rng), b = random_path(rng), c = random_path(rng);
    const auto ab = path_distance(a, b, 1000), ba = path_distance(b, a, 1000), ac = path_distance(a, c, 1000),
               bc = path_distance(b, c, 1000), aa = path_distance(a, a, 1000);
    const double dslack = ab.error_bound + ba.error_bound + ac.error_bound + bc.error_bound + aa.error_bound + 1e-12;
    d_bad += axioms(ab.value, ba.value, aa.value, ac.value, bc.value, dslack) ? 0 : 1;

    const auto sa = random_set(rng), sb = random_set(rng), sc = random_set(rng);
    const auto hab = hausdorff(sa, sb, 400), hba = hausdorff(sb, sa, 400), hac = hausdorff(sa, sc, 400),
               hbc = hausdorff(sb, sc, 400), haa = hausdorff(sa, sa, 400);
    const double hslack =
        hab.error_bound + hba.error_bound + hac.error_bound + hbc.error_bound + haa.error_bound + 1e-12;
    h_bad += axioms(hab.value, hba.value, haa.value, hac.value, hbc.value, hslack) ? 0 : 1;

    const auto pa = random_points(rng), pb = random_points(rng), pc = random_points(rng);
    p_bad += axioms(pointset_distance(pa, pb), pointset_distance(pb, pa), pointset_distance(pa, pa),
                    pointset_distance(pa, pc), pointset_distance(pb, pc), 1e-15)
                 ? 0
                 : 1;
  }
  o.require(rho_bad == 0, fmt("rho: %.0f of %.0f fixtures violate an axiom", rho_bad, n));
  o.require(d_bad == 0, fmt("path distance: %.0f of %.0f fixtures violate an axiom beyond the grid bound", d_bad, n));
  o.require(h_bad == 0, fmt("Hausdorff: %.0f of %.0f fixtures violate an axiom beyond the grid bound", h_bad, n));
  o.require(p_bad == 0, fmt("point-set distance: %.0f of %.0f fixtures violate an axiom", p_bad, n));

  int idem_bad = 0, follow_bad = 0;
  for (int k = 0; k < n; ++k) {
    std::vector<Origin> origins;
    const int m = 2 + static_cast<int>(rng.uniform() * 5);
    for (int i = 0; i < m; ++i) origins.push_back({static_cast<std::int64_t>(rng.uniform() * 20), 0.0, false});
    const auto view = k % 2 ? PathKind::step : PathKind::interpolated;
    const auto fam = independent_walk_family(two_step_law(), origins, 40, rng(), view);
    const auto g = apply_g(fam);
    idem_bad += apply_g(IndependentFamily{fam.kind, g.paths}).paths == g.paths ? 0 : 1;
    bool follows = true;
    for (const auto& e : g.state.merge_log) {
      for (double t = e.time; t <= 40.0; t += 0.25) {
        follows = follows && std::abs(g.paths[e.absorbed].value(t) - g.paths[e.representative].value(t)) < 1e-9;
      }
    }
    follow_bad += follows ? 0 : 1;
  }
  o.require(idem_bad == 0, fmt("apply_g idempotence fails on %.0f of %.0f lattice families", idem_bad, n));
  o.require(follow_bad == 0, fmt("post-merge identity fails on %.0f of %.0f lattice families", follow_bad, n));

  for (auto kind : all_experiment_kinds()) {
    auto c = default_config(kind);
    c.seed = 99;
    c.trials = 8;
    switch (kind) {
      case ExperimentKind::density_scan:
        c.ts = {100};
        c.width = 1000;
        break;
      case ExperimentKind::etahat:
        c.deltas = {0.1};
        break;
      case ExperimentKind::pointprocess:
        c.deltas = {0.05};
        break;
      case ExperimentKind::negcorr_exact:
        c.trials = 1;
        break;
      case ExperimentKind::interface_clt:
        c.ts = {100, 400};
        c.deltas = {0.1};
        break;
      case ExperimentKind::fg_convergence:
        c.deltas = {0.1, 0.05};
        break;
      case ExperimentKind::tightness_scan:
        c.deltas = {0.1};
        break;
      case ExperimentKind::hitting_tail:
        c.ts = {100, 1000};
        break;
      default:
        break;
    }
    c = resolve(c);
    std::string first;
    bool same = true;
    for (unsigned w : {1u, 2u, 8u}) {
      c.workers = w;
      const auto r = run(c);
      const auto text = report_csv(r) + report_json(r);
      if (first.empty()) first = text;
      same = same && text == first;
    }
    o.require(same, "bit-identical reports across 1, 2 and 8 workers: " + to_string(kind));
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::stoi(argv[k]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"density asymptotics", density_asymptotics},
      {"exact density oracle", density_oracle},
      {"dual counting bound", dual_counting_bound},
      {"point-process intensity", point_process},
      {"negative correlation", negative_correlation},
      {"overshoot limit", overshoot},
      {"hitting-tail scaling", hitting_tail},
      {"interface CLT", interface_clt},
      {"f-vs-g convergence", fg_convergence},
      {"exact duality", exact_duality},
      {"metric and map properties", property_suites},
  };
  int passed = 0, ran = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++ran;
    passed += o.pass ? 1 : 0;
    std::printf("%s %2d %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), secs);
    for (const auto& d : o.details) std::printf("       %s\n", d.c_str());
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of %d criteria passed in %.1f s\n", passed, ran, total);
  return passed == ran ? 0 : 1;
}
