#include "coalweb/increments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "coalweb/error.hpp"

namespace coalweb {

namespace {

using boost::multiprecision::cpp_int;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Rational parse_decimal(std::string_view s) {
  s = trim(s);
  if (s.empty()) throw InvalidArgument("empty number");
  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  cpp_int digits = 0;
  int scale = 0;
  bool seen_digit = false;
  bool after_point = false;
  std::size_t i = 0;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (after_point) --scale;
      seen_digit = true;
    } else if (c == '.' && !after_point) {
      after_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw InvalidArgument("malformed number '" + std::string(s) + "'");
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw InvalidArgument("malformed number '" + std::string(s) + "'");
    std::string exponent(s.substr(i + 1));
    if (exponent.empty()) throw InvalidArgument("malformed exponent in '" + std::string(s) + "'");
    std::size_t used = 0;
    int e = 0;
    try {
      e = std::stoi(exponent, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("malformed exponent in '" + std::string(s) + "'");
    }
    if (used != exponent.size()) throw InvalidArgument("malformed exponent in '" + std::string(s) + "'");
    scale += e;
  }
  Rational value(digits);
  cpp_int ten_pow = boost::multiprecision::pow(cpp_int(10), std::abs(scale));
  if (scale >= 0) {
    value *= Rational(ten_pow);
  } else {
    value /= Rational(ten_pow);
  }
  return negative ? Rational(-value) : value;
}

Rational exact_from_double(double x) {
  // Doubles are dyadic rationals; decompose exactly.
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  Rational r{cpp_int(scaled)};
  const int shift = exponent - 53;
  cpp_int two_pow = boost::multiprecision::pow(cpp_int(2), std::abs(shift));
  if (shift >= 0) return r * Rational(two_pow);
  return r / Rational(two_pow);
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace

Rational parse_rational(std::string_view text) {
  text = trim(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  const Rational num = parse_decimal(text.substr(0, slash));
  const Rational den = parse_decimal(text.substr(slash + 1));
  if (den == 0) throw InvalidArgument("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

double IncrementDistribution::abs_moment(int order) const {
  switch (order) {
    case 1: return abs_m1_;
    case 2: return abs_m2_;
    case 3: return abs_m3_;
    case 5: return abs_m5_;
    default: throw InvalidArgument("absolute moments are kept for orders 1, 2, 3, 5");
  }
}

double IncrementDistribution::prob_of(int offset) const {
  for (const auto& s : support_) {
    if (s.offset == offset) return s.prob;
  }
  return 0.0;
}

Rational IncrementDistribution::exact_prob_of(int offset) const {
  for (const auto& s : exact_) {
    if (s.offset == offset) return s.prob;
  }
  return Rational(0);
}

std::string IncrementDistribution::text() const {
  std::ostringstream out;
  for (std::size_t k = 0; k < exact_.size(); ++k) {
    if (k) out << ',';
    out << exact_[k].offset << ':' << numerator(exact_[k].prob);
    if (denominator(exact_[k].prob) != 1) out << '/' << denominator(exact_[k].prob);
  }
  return out.str();
}

void IncrementDistribution::require_discrete_walk() const {
  if (!mean_zero_) throw GuardViolation("law '" + text() + "' has nonzero mean");
  if (period_ != 1) {
    throw GuardViolation("law '" + text() + "' has period " + std::to_string(period_) +
                         "; aperiodic law required");
  }
  if (!irreducible_) throw GuardViolation("law '" + text() + "' is not irreducible on Z");
}

void IncrementDistribution::require_continuous_walk() const {
  if (has_zero_step_) {
    throw GuardViolation("law '" + text() + "' puts mass on 0; continuous time needs P(Y=0)=0");
  }
}

IncrementDistribution make_increment(const std::vector<ExactStep>& support) {
  if (support.empty()) throw InvalidArgument("increment law has empty support");
  std::vector<ExactStep> steps;
  std::set<int> seen;
  Rational total = 0;
  for (const auto& s : support) {
    if (s.prob < 0 || s.prob > 1) {
      throw InvalidArgument("probability for offset " + std::to_string(s.offset) + " outside [0, 1]");
    }
    if (!seen.insert(s.offset).second) {
      throw InvalidArgument("offset " + std::to_string(s.offset) + " listed twice");
    }
    if (std::abs(s.offset) > kMaxOffset) {
      throw InvalidArgument("offset " + std::to_string(s.offset) + " outside [-20, 20]");
    }
    total += s.prob;
    if (s.prob > 0) steps.push_back(s);
  }
  if (std::abs(to_double(total) - 1.0) > 1e-12) {
    throw InvalidArgument("probabilities sum to " + std::to_string(to_double(total)) + ", not 1");
  }
  if (steps.size() < 2) throw InvalidArgument("single-point law gives a degenerate walk");
  std::sort(steps.begin(), steps.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });

  IncrementDistribution law;
  Rational exact_mean = 0;
  for (auto& s : steps) {
    s.prob /= total;
    exact_mean += s.prob * s.offset;
    law.support_.push_back({s.offset, to_double(s.prob)});
  }
  law.exact_ = steps;

  double acc = 0.0;
  for (const auto& s : law.support_) {
    acc += s.prob;
    law.cdf_.push_back(acc);
    const double a = std::abs(static_cast<double>(s.offset));
    law.mean_ += s.prob * s.offset;
    law.abs_m1_ += s.prob * a;
    law.abs_m2_ += s.prob * a * a;
    law.abs_m3_ += s.prob * a * a * a;
    law.abs_m5_ += s.prob * a * a * a * a * a;
  }
  law.cdf_.back() = 1.0;
  law.variance_ = law.abs_m2_ - law.mean_ * law.mean_;
  law.sigma_ = std::sqrt(law.variance_);
  law.mean_zero_ = exact_mean == 0 || std::abs(law.mean_) < 1e-12;
  law.has_zero_step_ = law.prob_of(0) > 0.0;

  // Positions reachable in exactly n steps, n <= kPeriodHorizon.
  const int span = kPeriodHorizon * kMaxOffset;
  std::vector<char> reach(2 * span + 1, 0), next(2 * span + 1, 0), ever(2 * span + 1, 0);
  reach[span] = 1;
  int period = 0;
  for (int n = 1; n <= kPeriodHorizon; ++n) {
    std::fill(next.begin(), next.end(), 0);
    for (int p = 0; p <= 2 * span; ++p) {
      if (!reach[p]) continue;
      for (const auto& s : law.support_) {
        const int q = p + s.offset;
        if (q >= 0 && q <= 2 * span) next[q] = 1;
      }
    }
    reach.swap(next);
    for (int p = 0; p <= 2 * span; ++p) ever[p] |= reach[p];
    if (reach[span]) period = std::gcd(period, n);
  }
  if (period == 0) {
    // No return within the horizon (drifting law): fall back to the span.
    for (std::size_t k = 1; k < law.support_.size(); ++k) {
      period = std::gcd(period, law.support_[k].offset - law.support_[0].offset);
    }
  }
  law.period_ = period;
  law.irreducible_ = ever[span + 1] && ever[span - 1];
  return law;
}

IncrementDistribution make_increment(const std::vector<Step>& support) {
  std::vector<ExactStep> exact;
  exact.reserve(support.size());
  for (const auto& s : support) {
    if (!(s.prob >= 0.0 && s.prob <= 1.0)) {
      throw InvalidArgument("probability for offset " + std::to_string(s.offset) + " outside [0, 1]");
    }
    exact.push_back({s.offset, exact_from_double(s.prob)});
  }
  return make_increment(exact);
}

IncrementDistribution parse_law(std::string_view text) {
  std::vector<ExactStep> steps;
  text = trim(text);
  if (text.empty()) throw InvalidArgument("empty law string");
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw InvalidArgument("law entry '" + std::string(item) + "' is not offset:prob");
    }
    const std::string offset_text(trim(item.substr(0, colon)));
    std::size_t used = 0;
    int offset = 0;
    try {
      offset = std::stoi(offset_text, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("bad offset '" + offset_text + "'");
    }
    if (used != offset_text.size()) throw InvalidArgument("bad offset '" + offset_text + "'");
    steps.push_back({offset, parse_rational(item.substr(colon + 1))});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (trim(text).empty()) throw InvalidArgument("trailing comma in law string");
  }
  return make_increment(steps);
}

IncrementDistribution lazy_uniform_law() { return parse_law("-1:1/3,0:1/3,1:1/3"); }
IncrementDistribution two_step_law() { return parse_law("-2:1/4,-1:1/4,1:1/4,2:1/4"); }

double LadderVariable::tail(int k) const {
  double s = 0.0;
  for (int j = std::max(k, 1); j <= static_cast<int>(pmf.size()); ++j) s += pmf[j - 1];
  return s;
}

LadderVariable ladder_distribution(const IncrementDistribution& law, int horizon, int band) {
  law.require_discrete_walk();
  if (band < 1) throw InvalidArgument("ladder band must be positive");
  LadderVariable out;
  const int m = law.max_offset();
  out.pmf.assign(std::max(m, 0), 0.0);
  if (horizon <= 0 || m <= 0) {
    out.tail_mass = 1.0;
    out.pmf.clear();
    return out;
  }
  // index i <-> position i - band, positions in [-band, 0]
  const int size = band + 1;
  std::vector<double> mass(size, 0.0), next(size, 0.0);
  mass[band] = 1.0;
  for (int n = 0; n < horizon; ++n) {
    std::fill(next.begin(), next.end(), 0.0);
    for (const auto& s : law.support()) {
      const int off = s.offset;
      if (off > 0) {
        for (int k = 1; k <= off; ++k) out.pmf[k - 1] += s.prob * mass[band - off + k];
        for (int i = 0; i + off < size; ++i) next[i + off] += s.prob * mass[i];
      } else if (off < 0) {
        for (int i = -off; i < size; ++i) next[i + off] += s.prob * mass[i];
      } else {
        for (int i = 0; i < size; ++i) next[i] += s.prob * mass[i];
      }
    }
    mass.swap(next);
  }
  double resolved = 0.0, first = 0.0;
  for (int k = 1; k <= m; ++k) {
    resolved += out.pmf[k - 1];
    first += k * out.pmf[k - 1];
  }
  out.tail_mass = std::max(0.0, 1.0 - resolved);
  out.mean_z = resolved > 0 ? first / resolved : 0.0;
  return out;
}

LadderVariable ladder_distribution_exact(const IncrementDistribution& law, double tolerance) {
  law.require_discrete_walk();
  const int m = law.max_offset();
  const int depth = -std::min(law.min_offset(), 0);
  // entry[j][k-1] = P(first entry into (0, inf) from -j lands at k)
  auto iterate = [&](const std::vector<double>& z) {
    std::vector<std::vector<double>> entry(depth + 1, std::vector<double>(m, 0.0));
    entry[0] = z;
    for (int j = 1; j <= depth; ++j) {
      for (int i = 1; i <= m; ++i) {
        if (i > j) {
          entry[j][i - j - 1] += z[i - 1];
        } else {
          for (int k = 0; k < m; ++k) entry[j][k] += z[i - 1] * entry[j - i][k];
        }
      }
    }
    std::vector<double> out(m, 0.0);
    for (const auto& s : law.support()) {
      if (s.offset > 0) {
        out[s.offset - 1] += s.prob;
      } else {
        for (int k = 0; k < m; ++k) out[k] += s.prob * entry[-s.offset][k];
      }
    }
    return out;
  };

  std::vector<double> z(m, 1.0 / m);
  double change = 1.0;
  constexpr int kMaxIterations = 1000000;
  int it = 0;
  for (; it < kMaxIterations && change > tolerance; ++it) {
    auto next = iterate(z);
    change = 0.0;
    for (int k = 0; k < m; ++k) change = std::max(change, std::abs(next[k] - z[k]));
    z = std::move(next);
  }
  if (change > tolerance) {
    throw GuardViolation("ladder fixed point did not converge for law '" + law.text() + "'");
  }
  LadderVariable out;
  out.pmf = z;
  out.exact = true;
  double total = 0.0, first = 0.0;
  for (int k = 1; k <= m; ++k) {
    total += z[k - 1];
    first += k * z[k - 1];
  }
  out.tail_mass = std::max(std::abs(1.0 - total), change);
  out.mean_z = first / total;
  return out;
}

std::vector<double> overshoot_limit(const IncrementDistribution& law, const LadderVariable& ladder) {
  if (!(ladder.tail_mass < 1e-6)) {
    throw GuardViolation("ladder tail mass " + std::to_string(ladder.tail_mass) +
                         " too heavy for the renewal limit");
  }
  if (!(ladder.mean_z > 0.0) || !std::isfinite(ladder.mean_z)) {
    throw GuardViolation("ladder mean must be finite and positive");
  }
  if (static_cast<int>(ladder.pmf.size()) > law.max_offset()) {
    throw InvalidArgument("ladder support exceeds the law's largest step");
  }
  const int m = static_cast<int>(ladder.pmf.size());
  std::vector<double> limit(m, 0.0);
  double total = 0.0;
  for (int k = 0; k < m; ++k) total += ladder.pmf[k];
  for (int k = 0; k < m; ++k) limit[k] = ladder.tail(k + 1) / total / ladder.mean_z;
  return limit;
}

double overshoot_moment_limit(const LadderVariable& ladder, double r) {
  double total = 0.0;
  for (double p : ladder.pmf) total += p;
  double sum = 0.0;
  for (int k = 1; k < static_cast<int>(ladder.pmf.size()); ++k) {
    sum += std::pow(static_cast<double>(k), r) * ladder.tail(k + 1) / total;
  }
  return sum / ladder.mean_z;
}

}  // namespace coalweb
