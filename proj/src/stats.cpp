#include "coalweb/stats.hpp"

#include <algorithm>

#include "coalweb/error.hpp"

namespace coalweb {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_distance_normal(std::vector<double> samples) {
  if (samples.empty()) throw InvalidArgument("KS distance of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = normal_cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

std::vector<double> integer_histogram(const std::vector<double>& values, int lo, int overflow) {
  if (overflow <= lo) throw InvalidArgument("histogram overflow bin must lie above lo");
  std::vector<double> h(static_cast<std::size_t>(overflow - lo) + 1, 0.0);
  for (double v : values) {
    const long k = std::lround(v);
    std::size_t bin = 0;
    if (k >= overflow) {
      bin = h.size() - 1;
    } else if (k > lo) {
      bin = static_cast<std::size_t>(k - lo);
    }
    h[bin] += 1.0;
  }
  if (!values.empty()) {
    for (auto& x : h) x /= static_cast<double>(values.size());
  }
  return h;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = k < p.size() ? p[k] : 0.0;
    const double b = k < q.size() ? q[k] : 0.0;
    s += std::abs(a - b);
  }
  return 0.5 * s;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double variance_se(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  RunningStats s;
  for (double v : values) s.add(v);
  const double m = s.mean();
  CompensatedSum m4;
  for (double v : values) {
    const double d = v - m;
    m4.add(d * d * d * d);
  }
  const double var = s.variance();
  const double mu4 = m4.value() / static_cast<double>(n);
  return std::sqrt(std::max(0.0, (mu4 - var * var) / static_cast<double>(n)));
}

}  // namespace coalweb
