#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "coalweb/path.hpp"

namespace coalweb {

struct SpacePoint {
  double x = 0.0;
  double t = 0.0;
};

struct CompactPoint {
  double phi = 0.0;
  double psi = 0.0;
};

// (tanh(x) / (1 + |t|), tanh(t)); both coordinates accept +-inf.
CompactPoint compactify(double x, double t);

double rho(const SpacePoint& a, const SpacePoint& b);

struct Distance {
  double value = 0.0;
  double error_bound = 0.0;  // sup over t may exceed value by at most this
};

inline constexpr int kDefaultGrid = 10000;

// sup_t |Phi(f1(t), t) - Phi(f2(t), t)| joined with |tanh t1 - tanh t2|,
// evaluated on both paths' breakpoints and `grid` points equally spaced in
// tanh(t). The bound uses the Lipschitz constants of tanh and 1 / (1 + |t|).
Distance path_distance(const Path& a, const Path& b, int grid = kDefaultGrid);

Distance hausdorff(const PathSet& a, const PathSet& b, int grid = kDefaultGrid);

// Hausdorff distance under rho.
double pointset_distance(const std::vector<SpacePoint>& a, const std::vector<SpacePoint>& b);

struct CountingQuery {
  double t0 = 0.0;
  double t = 1.0;
  double a = 0.0;
  double b = 1.0;
};

struct CountResult {
  std::vector<double> n_set;  // sorted, distinct
  std::size_t eta = 0;
  std::size_t eta_hat = 0;
};

// n_set: positions at t0 + t of the paths whose value at t0 lies in [a, b].
// eta_hat: distinct positions in the open (a, b) at t0 + t among paths started
// at or before t0. Paths are evaluated by their own kind.
CountResult count_paths(const PathSet& paths, const CountingQuery& q);

enum class ProbeSide { none, plus, minus, both };

std::string to_string(ProbeSide s);

struct TightnessProbe {
  double x0 = 0.0;
  double t0 = 0.0;
  double u = 0.1;
  double t = 0.1;
  static constexpr double widen = 17.0;
  static constexpr double heighten = 2.0;
};

struct TightnessResult {
  bool occurred = false;
  ProbeSide side = ProbeSide::none;
};

// Some path enters [x0 - u, x0 + u] x [t0, t0 + t] and afterwards, before
// t0 + 2t, reaches x0 + 17u (plus) or x0 - 17u (minus).
TightnessResult detect_tightness_event(const PathSet& paths, const TightnessProbe& probe);

// Path-set text form: header, then per path its kind tag and breakpoints.
void write_path_set(std::ostream& out, const PathSet& paths);
PathSet read_path_set(std::istream& in);

}  // namespace coalweb
