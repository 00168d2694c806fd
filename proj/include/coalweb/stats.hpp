#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace coalweb {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class RunningStats {
 public:
  void add(double x) {
    ++n_;
    sum_.add(x);
    sq_.add(x * x);
  }
  std::size_t count() const { return n_; }
  double mean() const { return n_ ? sum_.value() / static_cast<double>(n_) : 0.0; }
  // Unbiased sample variance.
  double variance() const {
    if (n_ < 2) return 0.0;
    const double n = static_cast<double>(n_);
    const double m = mean();
    return std::max(0.0, (sq_.value() - n * m * m) / (n - 1.0));
  }
  double se() const { return n_ ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  CompensatedSum sum_;
  CompensatedSum sq_;
};

double normal_cdf(double x);

// sup |F_n - Phi| for the standard normal Phi.
double ks_distance_normal(std::vector<double> samples);

// Histogram of integer-valued samples over bins lo, lo+1, ..., overflow-1 and
// one overflow bin collecting everything >= overflow (values < lo go to the
// first bin). Normalized to probabilities.
std::vector<double> integer_histogram(const std::vector<double>& values, int lo, int overflow);

double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

double median(std::vector<double> values);

// Standard error of the fourth-moment-based sample variance estimate.
double variance_se(const std::vector<double>& values);

}  // namespace coalweb
