#include "coalweb/path.hpp"

#include <algorithm>
#include <cmath>

#include "coalweb/error.hpp"

namespace coalweb {

namespace {

double lerp(const Breakpoint& a, const Breakpoint& b, double t) {
  if (a.x == b.x) return a.x;
  if (!std::isfinite(a.x) || !std::isfinite(b.x)) return t < b.t ? a.x : b.x;
  const double w = (t - a.t) / (b.t - a.t);
  return a.x + w * (b.x - a.x);
}

}  // namespace

Path::Path(PathKind kind, std::vector<Breakpoint> breakpoints, double t_end)
    : kind_(kind), bps_(std::move(breakpoints)), t_end_(t_end) {
  if (bps_.empty()) throw InvalidArgument("path needs at least one breakpoint");
  for (std::size_t k = 1; k < bps_.size(); ++k) {
    if (!(bps_[k].t > bps_[k - 1].t)) throw InvalidArgument("path breakpoint times must increase strictly");
  }
  for (const auto& b : bps_) {
    if (std::isnan(b.x) || std::isnan(b.t)) throw InvalidArgument("path breakpoint is NaN");
  }
  if (t_end_ < bps_.back().t) throw InvalidArgument("path ends before its last breakpoint");
}

Path::Path(PathKind kind, std::vector<Breakpoint> breakpoints)
    : Path(kind, breakpoints, breakpoints.empty() ? 0.0 : breakpoints.back().t) {}

double Path::value(double t) const {
  if (t <= bps_.front().t) return bps_.front().x;
  if (t >= bps_.back().t) return bps_.back().x;
  const auto it = std::upper_bound(bps_.begin(), bps_.end(), t,
                                   [](double v, const Breakpoint& b) { return v < b.t; });
  const auto& right = *it;
  const auto& left = *(it - 1);
  if (kind_ == PathKind::step) return left.x;
  return lerp(left, right, t);
}

double Path::left_value(double t) const {
  if (kind_ == PathKind::interpolated || t <= bps_.front().t) return value(t);
  const auto it = std::lower_bound(bps_.begin(), bps_.end(), t,
                                   [](const Breakpoint& b, double v) { return b.t < v; });
  return (it - 1)->x;
}

double Path::slope_on(double t_a, double t_b) const {
  if (kind_ == PathKind::step) return 0.0;
  double slope = 0.0;
  for (std::size_t k = 1; k < bps_.size(); ++k) {
    if (bps_[k].t <= t_a || bps_[k - 1].t >= t_b) continue;
    const double dx = bps_[k].x - bps_[k - 1].x;
    if (bps_[k].x == bps_[k - 1].x) continue;
    if (!std::isfinite(dx)) return INFINITY;
    slope = std::max(slope, std::abs(dx) / (bps_[k].t - bps_[k - 1].t));
  }
  return slope;
}

Path Path::prefix(double cut) const {
  std::vector<Breakpoint> out;
  for (const auto& b : bps_) {
    if (b.t < cut) out.push_back(b);
  }
  if (out.empty() || out.back().t < cut) out.push_back({cut, kind_ == PathKind::step ? left_value(cut) : value(cut)});
  return Path(kind_, std::move(out), cut);
}

Path Path::suffix(double cut) const {
  std::vector<Breakpoint> out{{cut, value(cut)}};
  for (const auto& b : bps_) {
    if (b.t > cut) out.push_back(b);
  }
  return Path(kind_, std::move(out), std::max(t_end_, cut));
}

Path Path::splice(double cut, const Path& other) const {
  std::vector<Breakpoint> out;
  for (const auto& b : bps_) {
    if (b.t < cut) out.push_back(b);
  }
  out.push_back({cut, other.value(cut)});
  for (const auto& b : other.bps_) {
    if (b.t > cut) out.push_back(b);
  }
  return Path(kind_, std::move(out), std::max({t_end_, other.t_end_, cut}));
}

bool operator==(const Path& a, const Path& b) {
  if (a.kind_ != b.kind_ || a.t_end_ != b.t_end_ || a.bps_.size() != b.bps_.size()) return false;
  for (std::size_t k = 0; k < a.bps_.size(); ++k) {
    if (a.bps_[k].t != b.bps_[k].t || a.bps_[k].x != b.bps_[k].x) return false;
  }
  return true;
}

}  // namespace coalweb
