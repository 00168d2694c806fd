#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "coalweb/error.hpp"
#include "coalweb/experiments.hpp"
#include "coalweb/stats.hpp"

using namespace coalweb;

namespace {

ExperimentConfig small(ExperimentKind kind, std::uint64_t trials) {
  auto c = default_config(kind);
  c.trials = trials;
  c.seed = 17;
  return resolve(c);
}

const ReportCell& cell(const ExperimentReport& r, const std::string& name, std::size_t nth = 0) {
  for (const auto& c : r.cells) {
    if (c.name == name && nth-- == 0) return c;
  }
  throw InvalidArgument("no cell " + name);
}

}  // namespace

TEST_CASE("experiment kind names round trip") {
  for (auto k : all_experiment_kinds()) CHECK(parse_experiment_kind(to_string(k)) == k);
  CHECK(all_experiment_kinds().size() == 11);
  CHECK_THROWS_AS(parse_experiment_kind("nope"), InvalidArgument);
}

TEST_CASE("resolve fills defaults and applies guards") {
  ExperimentConfig c;
  c.kind = ExperimentKind::etahat;
  const auto r = resolve(c);
  CHECK(r.deltas == std::vector<double>{0.1, 0.02});
  CHECK(r.ts == std::vector<double>{1});

  ExperimentConfig d;
  d.kind = ExperimentKind::density_scan;
  d.ts = {2500};
  d.width = 300;
  CHECK_THROWS_AS(resolve(d), GuardViolation);
  d.ts = {2.5};
  d.width = 1000;
  CHECK_THROWS_AS(resolve(d), InvalidArgument);

  ExperimentConfig h;
  h.kind = ExperimentKind::hitting_tail;
  CHECK_THROWS_AS(resolve(h), GuardViolation);  // the lazy law has a zero step

  ExperimentConfig o;
  o.kind = ExperimentKind::overshoot;
  o.law = parse_law("-1:1/2,0:1/4,1:1/4");
  CHECK_THROWS_AS(resolve(o), GuardViolation);

  ExperimentConfig n;
  n.kind = ExperimentKind::negcorr_mc;
  n.width = 40;
  CHECK_THROWS_AS(resolve(n), InvalidArgument);

  ExperimentConfig t;
  t.kind = ExperimentKind::etahat;
  t.tolerance = -1.0;
  CHECK_THROWS_AS(resolve(t), InvalidArgument);
}

TEST_CASE("merge of one partial equals run") {
  const auto c = small(ExperimentKind::etahat, 40);
  const auto direct = run(c);
  const auto merged = merge({run_partial(c, 0, c.trials)});
  CHECK(report_csv(direct) == report_csv(merged));
}

TEST_CASE("four-way split is bit-identical in any order") {
  const auto c = small(ExperimentKind::pointprocess, 40);
  const auto whole = report_csv(merge({run_partial(c, 0, 40)}));
  std::vector<PartialReport> parts{run_partial(c, 0, 7), run_partial(c, 7, 20), run_partial(c, 20, 33),
                                   run_partial(c, 33, 40)};
  CHECK(report_csv(merge(parts)) == whole);
  std::mt19937 shuffle_rng(4);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(parts.begin(), parts.end(), shuffle_rng);
    CHECK(report_csv(merge(parts)) == whole);
  }
}

TEST_CASE("merge rejects overlaps, gaps and mismatched configs") {
  const auto c = small(ExperimentKind::negcorr_mc, 20);
  CHECK_THROWS_AS(merge({run_partial(c, 0, 12), run_partial(c, 10, 20)}), InvalidArgument);
  CHECK_THROWS_AS(merge({run_partial(c, 0, 8), run_partial(c, 10, 20)}), InvalidArgument);
  CHECK_THROWS_AS(merge({run_partial(c, 0, 10)}), InvalidArgument);
  auto other = c;
  other.seed = 99;
  CHECK_THROWS_AS(merge({run_partial(c, 0, 10), run_partial(other, 10, 20)}), InvalidArgument);
  CHECK_THROWS_AS(merge({}), InvalidArgument);
  CHECK_THROWS_AS(run_partial(c, 5, 30), InvalidArgument);
}

TEST_CASE("worker count does not change the report") {
  for (auto kind : {ExperimentKind::etahat, ExperimentKind::overshoot, ExperimentKind::hitting_tail,
                    ExperimentKind::negcorr_mc}) {
    auto c = small(kind, 24);
    const auto one = report_csv(run(c));
    c.workers = 3;
    CHECK(report_csv(run(c)) == one);
    c.workers = 8;
    CHECK(report_json(run(c)) == report_json(run(small(kind, 24))));
  }
}

TEST_CASE("exact negative correlation passes and a zero tolerance cannot rescue a noisy cell") {
  const auto r = run(small(ExperimentKind::negcorr_exact, 1));
  CHECK(r.all_pass());
  CHECK(cell(r, "pair_margin").provenance == "oracle:enumeration");

  auto c = small(ExperimentKind::etahat, 30);
  c.tolerance = 0.0;
  const auto z = run(c);
  // With the floor dropped a two-sided or upper cell with nonzero error fails.
  CHECK(cell(z, "etahat").threshold == 0.0);
}

TEST_CASE("cells carry thresholds of at least three standard errors by default") {
  const auto r = run(small(ExperimentKind::etahat, 60));
  const auto& e = cell(r, "etahat");
  CHECK(e.reference == doctest::Approx(1.0 / std::sqrt(M_PI)));
  CHECK(e.threshold >= 3.0 * e.se - 1e-15);
  CHECK(e.threshold >= e.tolerance);
  CHECK(e.sidedness == Sidedness::upper);
}

TEST_CASE("hitting tail agrees with two coalescing continuous-time walks") {
  // Independent route: simulate two walkers from 0 and 1 and read off the merge.
  auto c = default_config(ExperimentKind::hitting_tail);
  c.trials = 20000;
  c.seed = 5;
  c.ts = {1, 4};
  const auto r = run(resolve(c));
  const auto law = two_step_law();
  RunningStats s1, s4;
  SpaceTimeWindow w{0, 2, 0.0, 4.0, Boundary::buffered_open, 60};
  for (std::uint64_t seed = 0; seed < 6000; ++seed) {
    const auto sys = simulate_continuous(w, law, {{0, 0.0, false}, {1, 0.0, false}}, seed);
    const bool merged = sys.merges[1].has_value();
    const double t = merged ? sys.merges[1]->time : INFINITY;
    s1.add(t > 1.0 ? 1.0 : 0.0);
    s4.add(t > 4.0 ? 1.0 : 0.0);
  }
  const auto& c1 = cell(r, "sqrt_t_tail", 0);
  const auto& c4 = cell(r, "sqrt_t_tail", 1);
  CHECK(std::abs(c1.estimate - s1.mean()) < 4.0 * std::hypot(c1.se, s1.se()));
  CHECK(std::abs(c4.estimate / 2.0 - s4.mean()) < 4.0 * std::hypot(c4.se / 2.0, s4.se()));
}

TEST_CASE("overshoot cells reference the renewal limit") {
  const auto r = run(small(ExperimentKind::overshoot, 200));
  const auto& tv = cell(r, "overshoot_tv");
  CHECK(tv.provenance == "oracle:ladder_renewal");
  CHECK(tv.estimate >= 0.0);
  CHECK(tv.estimate <= 1.0);
  const double total = cell(r, "overshoot_pmf", 0).estimate + cell(r, "overshoot_pmf", 1).estimate;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("discrete interface runs report information only") {
  auto c = default_config(ExperimentKind::interface_clt);
  c.trials = 10;
  c.ts = {100, 400};
  c.deltas = {0.1};
  c.time_kind = TimeKind::discrete;
  const auto r = run(resolve(c));
  for (const auto& x : r.cells) CHECK(x.verdict == Verdict::info);
}

TEST_CASE("report serializations") {
  const auto r = run(small(ExperimentKind::negcorr_exact, 1));
  const auto csv = report_csv(r);
  CHECK(csv.rfind("kind,name,params,estimate,se,reference,provenance,sidedness,tolerance,threshold,verdict\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(r.cells.size()) + 1);
  const auto json = report_json(r);
  CHECK(json.find("\"generator\"") != std::string::npos);
  CHECK(json.find("runtime") == std::string::npos);
  CHECK(json.find("NaN") == std::string::npos);
  const auto dat = report_dat(r);
  CHECK(std::count(dat.begin(), dat.end(), '\n') >= static_cast<long>(r.cells.size()));
}
