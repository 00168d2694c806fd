#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "coalweb/rng.hpp"

namespace coalweb {

using Rational = boost::multiprecision::cpp_rational;

// Laws are restricted to offsets in [-kMaxOffset, kMaxOffset]; the period test
// below only certifies aperiodicity inside that band.
inline constexpr int kMaxOffset = 20;
inline constexpr int kPeriodHorizon = 40;

struct Step {
  int offset = 0;
  double prob = 0.0;
};

struct ExactStep {
  int offset = 0;
  Rational prob;
};

// Law of a single random-walk increment Y on Z. Immutable once built.
class IncrementDistribution {
 public:
  IncrementDistribution() = default;

  const std::vector<Step>& support() const { return support_; }
  const std::vector<ExactStep>& exact_support() const { return exact_; }

  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double sigma() const { return sigma_; }
  // E|Y|^order for order in {1, 2, 3, 5}.
  double abs_moment(int order) const;

  bool mean_zero() const { return mean_zero_; }
  bool has_zero_step() const { return has_zero_step_; }
  int period() const { return period_; }
  bool irreducible() const { return irreducible_; }
  bool aperiodic() const { return period_ == 1; }

  int min_offset() const { return support_.front().offset; }
  int max_offset() const { return support_.back().offset; }
  double prob_of(int offset) const;
  Rational exact_prob_of(int offset) const;

  // Inverse-CDF lookup; u in [0, 1).
  int sample(double u) const {
    for (std::size_t k = 0; k + 1 < cdf_.size(); ++k) {
      if (u < cdf_[k]) return support_[k].offset;
    }
    return support_.back().offset;
  }
  int sample(SplitMix64& rng) const { return sample(rng.uniform()); }

  // Canonical "offset:num/den,..." text; parse_law(text()) reproduces the law exactly.
  std::string text() const;

  // Requirements checks used by simulations and experiments.
  void require_discrete_walk() const;   // mean zero, aperiodic, irreducible
  void require_continuous_walk() const; // P(Y = 0) = 0

  friend bool operator==(const IncrementDistribution& a, const IncrementDistribution& b) {
    return a.text() == b.text();
  }

  friend IncrementDistribution make_increment(const std::vector<ExactStep>& support);

 private:
  std::vector<Step> support_;
  std::vector<ExactStep> exact_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double sigma_ = 0.0;
  double abs_m1_ = 0.0, abs_m2_ = 0.0, abs_m3_ = 0.0, abs_m5_ = 0.0;
  bool mean_zero_ = false;
  bool has_zero_step_ = false;
  int period_ = 1;
  bool irreducible_ = false;
};

// Validates and normalizes. Rejects empty support, probabilities outside
// [0, 1], a sum differing from 1 by more than 1e-12, duplicated offsets,
// offsets outside [-20, 20], and single-point laws. Nonzero mean and
// period > 1 are recorded as flags, not rejected.
IncrementDistribution make_increment(const std::vector<ExactStep>& support);
IncrementDistribution make_increment(const std::vector<Step>& support);

// Parses "offset:prob,offset:prob,...". Probabilities may be decimals
// ("0.25", "1e-1") or fractions ("1/3"); both are read exactly.
IncrementDistribution parse_law(std::string_view text);

// Exact decimal or fraction text to rational.
Rational parse_rational(std::string_view text);

// Shorthands for the laws used throughout the test-suite and experiments.
IncrementDistribution lazy_uniform_law();     // {-1, 0, 1} each 1/3
IncrementDistribution two_step_law();         // {-2, -1, 1, 2} each 1/4

// Distribution of the strict ascending ladder height Z (first value above 0
// of a walk started at 0).
struct LadderVariable {
  std::vector<double> pmf;  // pmf[k - 1] = P(Z = k)
  double tail_mass = 1.0;   // unresolved mass
  double mean_z = 0.0;      // E[Z] over resolved mass, normalized
  bool exact = false;       // produced by the fixed-point route

  double prob(int k) const {
    return (k >= 1 && static_cast<std::size_t>(k) <= pmf.size()) ? pmf[k - 1] : 0.0;
  }
  double tail(int k) const;  // P(Z >= k) over resolved mass
};

inline constexpr int kDefaultLadderHorizon = 10000;
inline constexpr int kDefaultLadderBand = 1000;

// Dynamic programming over (position, step count) for a walk killed on
// first entering (0, inf). Mass leaving below -band is counted in tail_mass.
LadderVariable ladder_distribution(const IncrementDistribution& law,
                                   int horizon = kDefaultLadderHorizon,
                                   int band = kDefaultLadderBand);

// Same law from the first-step equations closed by the ladder renewal:
// starting h_j (entry law into (0, inf) from -j) is a convolution of Z with
// itself, so P(Z = .) solves a fixed point in max_offset unknowns.
LadderVariable ladder_distribution_exact(const IncrementDistribution& law,
                                         double tolerance = 1e-15);

// Limit law of the overshoot over level 0 as the start goes to -inf:
// P(k) = P(Z >= k + 1) / E[Z], k >= 0. Refuses ladders with tail_mass >= 1e-6.
std::vector<double> overshoot_limit(const IncrementDistribution& law, const LadderVariable& ladder);

// Sum_k k^r P(Z >= k + 1) / E[Z]; the limit of the r-th overshoot moment.
double overshoot_moment_limit(const LadderVariable& ladder, double r);

}  // namespace coalweb
