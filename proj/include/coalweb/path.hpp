#pragma once

#include <vector>

namespace coalweb {

enum class PathKind { step, interpolated };

struct Breakpoint {
  double t = 0.0;
  double x = 0.0;
};

// A path t -> x started at t0. Step paths are right-continuous and constant
// between breakpoints; interpolated paths are linear between breakpoints.
// Values before t0 and after the last breakpoint are the nearest endpoint
// value, so value() is the hat-extension used by the path metrics. Positions
// may be +-inf (constant paths at the compactification poles).
class Path {
 public:
  Path() = default;
  Path(PathKind kind, std::vector<Breakpoint> breakpoints, double t_end);
  Path(PathKind kind, std::vector<Breakpoint> breakpoints);

  PathKind kind() const { return kind_; }
  double t0() const { return bps_.front().t; }
  double t_end() const { return t_end_; }
  const std::vector<Breakpoint>& breakpoints() const { return bps_; }

  double value(double t) const;
  // Left limit; differs from value() only at jumps of a step path.
  double left_value(double t) const;
  // Largest |slope| of the linear piece containing (t_a, t_b); 0 for step paths.
  double slope_on(double t_a, double t_b) const;

  // Pieces of this path restricted to t < cut and t > cut, with the cut point
  // itself included in both at its value().
  Path prefix(double cut) const;
  Path suffix(double cut) const;
  // prefix(cut) followed by other.suffix(cut); other decides the value at cut.
  Path splice(double cut, const Path& other) const;

  friend bool operator==(const Path& a, const Path& b);

 private:
  PathKind kind_ = PathKind::step;
  std::vector<Breakpoint> bps_{Breakpoint{}};
  double t_end_ = 0.0;
};

using PathSet = std::vector<Path>;

}  // namespace coalweb
