#include <cmath>
#include <map>

#include "doctest.h"

#include "coalweb/error.hpp"
#include "coalweb/stats.hpp"
#include "coalweb/voter.hpp"

using namespace coalweb;

namespace {

// Law of a sum of n independent increments, as offset -> probability.
std::map<int, double> convolve_power(const IncrementDistribution& law, int n) {
  std::map<int, double> dist{{0, 1.0}};
  for (int k = 0; k < n; ++k) {
    std::map<int, double> next;
    for (const auto& [s, p] : dist) {
      for (const auto& st : law.support()) next[s + st.offset] += p * st.prob;
    }
    dist = std::move(next);
  }
  return dist;
}

double cdf(const std::map<int, double>& dist, int upto) {
  double c = 0.0;
  for (const auto& [s, p] : dist) c += s <= upto ? p : 0.0;
  return c;
}

int opinion(const InterfaceTrace& tr, std::int64_t x) {
  const std::int64_t l = tr.samples.back().l;
  const std::int64_t r = tr.samples.back().r;
  if (x < l) return 1;
  if (x > r) return 0;
  return tr.alpha[static_cast<std::size_t>(x - l)];
}

}  // namespace

TEST_CASE("voter state basics") {
  const auto h = VoterState::heaviside(-3, 4);
  CHECK(h.leftmost_zero() == 1);
  CHECK(h.rightmost_one() == 0);
  CHECK(h.value_at(-100) == 1);
  CHECK(h.value_at(100) == 0);
  CHECK_THROWS_AS(VoterState(0, 2, {1}), InvalidArgument);
  CHECK_THROWS_AS(VoterState(0, 2, {1, 2}), InvalidArgument);
  CHECK_THROWS_AS(VoterState(2, 2, {}), InvalidArgument);
}

TEST_CASE("discrete round copies the opinion at x + Y") {
  const VoterState s(0, 4, {0, 1, 0, 1});
  const auto n = step_voter(s, {1, -1, 0, 2});
  CHECK(n.values() == std::vector<std::uint8_t>{1, 0, 0, 0});
  CHECK(n.time() == 1.0);
  // Site 0 looks left of the window and sees 1.
  CHECK(step_voter(s, {-1, 0, 0, 0}).values()[0] == 1);
  CHECK_THROWS_AS(step_voter(s, {0, 0}), InvalidArgument);
}

TEST_CASE("continuous ring updates one site") {
  const VoterState s(0, 3, {0, 0, 1});
  const auto n = step_voter(s, 1, 1, 0.7);
  CHECK(n.values() == std::vector<std::uint8_t>{0, 1, 1});
  CHECK(n.time() == 0.7);
  CHECK_THROWS_AS(step_voter(s, 5, 1, 1.0), InvalidArgument);
}

TEST_CASE("consensus is absorbing") {
  const VoterState ones(0, 5, {1, 1, 1, 1, 1});
  CHECK(step_voter(ones, {0, 1, -1, 1, -1}).values() == ones.values());
}

TEST_CASE("duality holds on every realization, discrete and continuous") {
  SplitMix64 rng(2024);
  for (TimeKind kind : {TimeKind::discrete, TimeKind::continuous}) {
    const auto law = kind == TimeKind::discrete ? lazy_uniform_law() : two_step_law();
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
      std::vector<std::uint8_t> init(30);
      for (auto& v : init) v = rng.uniform() < 0.5 ? 1 : 0;
      const CoupledRealization c(law, kind, -10, 20, 8.0, VoterState(-10, 20, init), seed);
      std::vector<SpaceTimeSite> a;
      const int size = 1 + static_cast<int>(rng.uniform() * 4);
      for (int k = 0; k < size; ++k) {
        const auto x = static_cast<std::int64_t>(-10 + rng.uniform() * 30);
        double t = 1.0 + std::floor(rng.uniform() * 8.0);
        if (kind == TimeKind::continuous) t = 0.01 + 7.99 * rng.uniform();
        a.push_back({x, std::min(t, 8.0)});
      }
      CHECK(dual_check(c, a));
    }
  }
}

TEST_CASE("forward and backward agree site by site") {
  const auto law = lazy_uniform_law();
  const CoupledRealization c(law, TimeKind::discrete, 0, 25, 6.0, VoterState::heaviside(0, 25), 9);
  const auto st = c.forward(6.0);
  for (std::int64_t x = 0; x < 25; ++x) CHECK(st.value_at(x) == c.initial().value_at(c.backward(x, 6.0)));
}

TEST_CASE("dual query validation") {
  const CoupledRealization c(lazy_uniform_law(), TimeKind::discrete, 0, 5, 3.0, VoterState::heaviside(0, 5), 1);
  CHECK(dual_check(c, {}));
  CHECK_THROWS_AS(dual_check(c, {{7, 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(dual_check(c, {{1, 1.5}}), InvalidArgument);
  CHECK_THROWS_AS(dual_check(c, {{1, 4.0}}), InvalidArgument);
}

TEST_CASE("interface at time zero") {
  const auto tr = interface_trace(two_step_law(), TimeKind::continuous, 0.0, {0.0}, 1, true);
  REQUIRE(tr.samples.size() == 1);
  CHECK(tr.samples[0].l == 1);
  CHECK(tr.samples[0].r == 0);
  CHECK(tr.alpha.empty());
}

TEST_CASE("interface word stays trimmed and l <= r + 1") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto tr = interface_trace(two_step_law(), TimeKind::continuous, 50.0, {5.0, 20.0, 50.0}, seed, true);
    for (const auto& s : tr.samples) CHECK(s.l <= s.r + 1);
    for (const auto& j : tr.jumps) CHECK(j.l <= j.r + 1);
    if (!tr.alpha.empty()) {
      CHECK(tr.alpha.front() == 0);
      CHECK(tr.alpha.back() == 1);
    }
    CHECK(static_cast<std::int64_t>(tr.alpha.size()) == tr.samples.back().r - tr.samples.back().l + 1);
    // Samples are read off the last jump at or before their time.
    for (const auto& s : tr.samples) {
      const InterfaceSample* last = &tr.jumps.front();
      for (const auto& j : tr.jumps) {
        if (j.t <= s.t) last = &j;
      }
      CHECK(s.l == last->l);
      CHECK(s.r == last->r);
    }
  }
}

TEST_CASE("discrete two-round marginals match the convolution") {
  // eta_2(x) = 1 iff the two-step backward walk from x ends at or left of 0.
  const auto law = lazy_uniform_law();
  const auto s2 = convolve_power(law, 2);
  const int n = 20000;
  std::map<int, double> ones;
  for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(n); ++seed) {
    const auto tr = interface_trace(law, TimeKind::discrete, 2.0, {2.0}, seed);
    for (int x = -2; x <= 3; ++x) ones[x] += opinion(tr, x);
  }
  for (int x = -2; x <= 3; ++x) {
    const double exact = cdf(s2, -x);
    const double p = ones[x] / n;
    CHECK(std::abs(p - exact) <= 4.0 * std::sqrt(exact * (1 - exact) / n) + 1e-12);
  }
}

TEST_CASE("continuous marginals at t = 1 match the Poisson mixture") {
  const auto law = two_step_law();
  const int n = 20000;
  std::map<int, double> ones;
  for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(n); ++seed) {
    const auto tr = interface_trace(law, TimeKind::continuous, 1.0, {1.0}, seed);
    for (int x = -1; x <= 2; ++x) ones[x] += opinion(tr, x);
  }
  for (int x = -1; x <= 2; ++x) {
    double exact = 0.0, weight = std::exp(-1.0);
    for (int k = 0; k < 30; ++k) {
      exact += weight * cdf(convolve_power(law, k), -x);
      weight /= k + 1;
    }
    const double p = ones[x] / n;
    CHECK(std::abs(p - exact) <= 4.0 * std::sqrt(exact * (1 - exact) / n));
  }
}

TEST_CASE("interface validation") {
  CHECK_THROWS_AS(interface_trace(lazy_uniform_law(), TimeKind::continuous, 5.0, {}, 1), GuardViolation);
  CHECK_THROWS_AS(interface_trace(two_step_law(), TimeKind::discrete, 2.5, {}, 1), InvalidArgument);
  CHECK_THROWS_AS(interface_trace(two_step_law(), TimeKind::continuous, 2.0, {3.0}, 1), InvalidArgument);
}

TEST_CASE("boundary paths at delta = 1 only divide by sigma") {
  const auto tr = interface_trace(two_step_law(), TimeKind::continuous, 10.0, {}, 3, true);
  const auto bp = boundary_paths(tr, 1.0, 10.0);
  for (const auto& j : tr.jumps) {
    CHECK(bp.l.value(j.t) == doctest::Approx(j.l / tr.sigma));
    CHECK(bp.r.value(j.t) == doctest::Approx(j.r / tr.sigma));
  }
  CHECK(bp.sup_gap >= 0.0);
  CHECK_THROWS_AS(boundary_paths(tr, 1.0, 11.0), InvalidArgument);
  const auto bare = interface_trace(two_step_law(), TimeKind::continuous, 10.0, {}, 3, false);
  CHECK_THROWS_AS(boundary_paths(bare, 1.0), InvalidArgument);
}
