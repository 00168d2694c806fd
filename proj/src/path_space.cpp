#include "coalweb/path_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "coalweb/error.hpp"

namespace coalweb {

namespace {

double phi(double x, double t) { return std::tanh(x) / (1.0 + std::abs(t)); }

// Slope of the linear piece of p containing the open interval (lo, hi).
double piece_slope(const Path& p, double lo, double hi) {
  if (p.kind() == PathKind::step) return 0.0;
  const auto& b = p.breakpoints();
  const double mid = 0.5 * (lo + hi);
  if (mid <= b.front().t || mid >= b.back().t) return 0.0;
  const auto it = std::upper_bound(b.begin(), b.end(), mid, [](double v, const Breakpoint& q) { return v < q.t; });
  const auto& r = *it;
  const auto& l = *(it - 1);
  if (r.x == l.x) return 0.0;
  return std::abs(r.x - l.x) / (r.t - l.t);
}

}  // namespace

CompactPoint compactify(double x, double t) { return {phi(x, t), std::tanh(t)}; }

double rho(const SpacePoint& a, const SpacePoint& b) {
  const auto pa = compactify(a.x, a.t);
  const auto pb = compactify(b.x, b.t);
  return std::max(std::abs(pa.phi - pb.phi), std::abs(pa.psi - pb.psi));
}

Distance path_distance(const Path& a, const Path& b, int grid) {
  if (grid < 0) throw InvalidArgument("grid resolution must be nonnegative");
  std::vector<double> ts;
  ts.reserve(a.breakpoints().size() + b.breakpoints().size() + static_cast<std::size_t>(grid));
  for (const auto& q : a.breakpoints()) ts.push_back(q.t);
  for (const auto& q : b.breakpoints()) ts.push_back(q.t);
  for (int k = 0; k < grid; ++k) {
    ts.push_back(std::atanh(-1.0 + (2.0 * k + 1.0) / grid));
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  double sup = std::abs(std::tanh(a.t0()) - std::tanh(b.t0()));
  double bound = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    sup = std::max(sup, std::abs(phi(a.value(t), t) - phi(b.value(t), t)));
    sup = std::max(sup, std::abs(phi(a.left_value(t), t) - phi(b.left_value(t), t)));
    if (i + 1 == ts.size()) break;
    const double lo = t, hi = ts[i + 1];
    const double m = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
    const double slopes = piece_slope(a, lo, hi) + piece_slope(b, lo, hi);
    const double k = slopes / (1.0 + m) + 2.0 / ((1.0 + m) * (1.0 + m));
    bound = std::max(bound, 0.5 * k * (hi - lo));
  }
  return {sup, bound};
}

Distance hausdorff(const PathSet& a, const PathSet& b, int grid) {
  if (a.empty() || b.empty()) throw InvalidArgument("Hausdorff distance needs nonempty path sets");
  std::vector<std::vector<double>> d(a.size(), std::vector<double>(b.size()));
  double bound = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto r = path_distance(a[i], b[j], grid);
      d[i][j] = r.value;
      bound = std::max(bound, r.error_bound);
    }
  }
  double h = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) h = std::max(h, *std::min_element(d[i].begin(), d[i].end()));
  for (std::size_t j = 0; j < b.size(); ++j) {
    double m = INFINITY;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::min(m, d[i][j]);
    h = std::max(h, m);
  }
  return {h, bound};
}

double pointset_distance(const std::vector<SpacePoint>& a, const std::vector<SpacePoint>& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("point-set distance needs nonempty sets");
  auto directed = [](const std::vector<SpacePoint>& p, const std::vector<SpacePoint>& q) {
    double h = 0.0;
    for (const auto& x : p) {
      double m = INFINITY;
      for (const auto& y : q) m = std::min(m, rho(x, y));
      h = std::max(h, m);
    }
    return h;
  };
  return std::max(directed(a, b), directed(b, a));
}

CountResult count_paths(const PathSet& paths, const CountingQuery& q) {
  if (!(q.t > 0.0)) throw InvalidArgument("counting query needs t > 0");
  if (q.a > q.b) throw InvalidArgument("counting query needs a <= b");
  std::set<double> n_set, hat;
  const double t1 = q.t0 + q.t;
  for (const auto& p : paths) {
    if (p.t0() > q.t0) continue;
    const double y = p.value(t1);
    const double x = p.value(q.t0);
    if (x >= q.a && x <= q.b) n_set.insert(y);
    if (y > q.a && y < q.b) hat.insert(y);
  }
  CountResult r;
  r.n_set.assign(n_set.begin(), n_set.end());
  r.eta = r.n_set.size();
  r.eta_hat = hat.size();
  return r;
}

std::string to_string(ProbeSide s) {
  switch (s) {
    case ProbeSide::none: return "none";
    case ProbeSide::plus: return "plus";
    case ProbeSide::minus: return "minus";
    case ProbeSide::both: return "both";
  }
  return "none";
}

namespace {

// Earliest time in [lo, hi] at which p lies in [c - u, c + u]; NaN if none.
double first_entry(const Path& p, double lo, double hi, double c, double u) {
  if (lo > hi) return NAN;
  auto inside = [&](double x) { return x >= c - u && x <= c + u; };
  if (inside(p.value(lo))) return lo;
  std::vector<double> knots{lo};
  for (const auto& b : p.breakpoints()) {
    if (b.t > lo && b.t < hi) knots.push_back(b.t);
  }
  knots.push_back(hi);
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double ta = knots[k], tb = knots[k + 1];
    if (p.kind() == PathKind::step) {
      if (k > 0 && inside(p.value(ta))) return ta;
      continue;
    }
    const double xa = p.value(ta), xb = p.value(tb);
    if (inside(xa)) return ta;
    if (!std::isfinite(xa) || !std::isfinite(xb) || xa == xb) continue;
    const double target = xa < c - u ? c - u : c + u;
    if ((xa - target) * (xb - target) <= 0.0) return ta + (tb - ta) * (target - xa) / (xb - xa);
  }
  if (inside(p.value(hi))) return hi;
  return NAN;
}

}  // namespace

TightnessResult detect_tightness_event(const PathSet& paths, const TightnessProbe& probe) {
  if (!(probe.u > 0.0) || !(probe.t > 0.0)) throw InvalidArgument("tightness probe needs u > 0 and t > 0");
  bool plus = false, minus = false;
  const double right = probe.x0 + TightnessProbe::widen * probe.u;
  const double left = probe.x0 - TightnessProbe::widen * probe.u;
  for (const auto& p : paths) {
    const double lo = std::max(probe.t0, p.t0());
    const double hi_small = std::min(probe.t0 + probe.t, p.t_end());
    const double tau = first_entry(p, lo, hi_small, probe.x0, probe.u);
    if (std::isnan(tau)) continue;
    const double hi = std::min(probe.t0 + TightnessProbe::heighten * probe.t, p.t_end());
    double mx = std::max(p.value(tau), p.value(hi));
    double mn = std::min(p.value(tau), p.value(hi));
    for (const auto& b : p.breakpoints()) {
      if (b.t > tau && b.t < hi) {
        mx = std::max(mx, b.x);
        mn = std::min(mn, b.x);
      }
    }
    plus = plus || mx >= right;
    minus = minus || mn <= left;
  }
  TightnessResult r;
  r.occurred = plus || minus;
  r.side = plus && minus ? ProbeSide::both : plus ? ProbeSide::plus : minus ? ProbeSide::minus : ProbeSide::none;
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double num(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw InvalidArgument("bad number '" + s + "' in path set");
  return v;
}

}  // namespace

void write_path_set(std::ostream& out, const PathSet& paths) {
  out << "coalweb-path-set 1\n";
  out << "paths " << paths.size() << '\n';
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    out << "path " << i << ' ' << (p.kind() == PathKind::step ? "step" : "interpolated") << ' '
        << fmt(p.t_end()) << ' ' << p.breakpoints().size() << '\n';
    for (const auto& b : p.breakpoints()) out << i << ' ' << fmt(b.t) << ' ' << fmt(b.x) << '\n';
  }
  out << "end\n";
}

PathSet read_path_set(std::istream& in) {
  std::string line, tag;
  if (!std::getline(in, line) || line != "coalweb-path-set 1") throw InvalidArgument("not a coalweb path set");
  std::size_t n = 0;
  if (!std::getline(in, line)) throw InvalidArgument("path set ends early");
  {
    std::istringstream ls(line);
    ls >> tag >> n;
    if (tag != "paths" || ls.fail()) throw InvalidArgument("path set missing count");
  }
  PathSet out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw InvalidArgument("path set ends early");
    std::istringstream ls(line);
    std::size_t id = 0, count = 0;
    std::string kind, t_end;
    ls >> tag >> id >> kind >> t_end >> count;
    if (tag != "path" || id != i || ls.fail()) throw InvalidArgument("malformed path header '" + line + "'");
    if (kind != "step" && kind != "interpolated") throw InvalidArgument("unknown path kind '" + kind + "'");
    std::vector<Breakpoint> bps;
    for (std::size_t k = 0; k < count; ++k) {
      if (!std::getline(in, line)) throw InvalidArgument("path set ends early");
      std::istringstream bs(line);
      std::string t, x;
      bs >> id >> t >> x;
      if (bs.fail() || id != i) throw InvalidArgument("malformed breakpoint '" + line + "'");
      bps.push_back({num(t), num(x)});
    }
    out.emplace_back(kind == "step" ? PathKind::step : PathKind::interpolated, std::move(bps), num(t_end));
  }
  if (!std::getline(in, line) || line != "end") throw InvalidArgument("path set has no end marker");
  return out;
}

}  // namespace coalweb
