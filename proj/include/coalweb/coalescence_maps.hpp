#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coalweb/increments.hpp"
#include "coalweb/path.hpp"
#include "coalweb/walks.hpp"

namespace coalweb {

enum class FamilyKind { lattice_step, lattice_interpolated, gaussian_grid };

std::string to_string(FamilyKind k);

struct IndependentFamily {
  FamilyKind kind = FamilyKind::lattice_step;
  PathSet paths;
};

struct MergeEntry {
  double time = 0.0;
  std::size_t absorbed = 0;        // representative of the class that stops
  std::size_t representative = 0;  // i*, the smaller representative

  friend bool operator==(const MergeEntry&, const MergeEntry&) = default;
};

struct EquivalenceState {
  std::vector<std::size_t> representative;  // smallest index of the final class
  std::vector<MergeEntry> merge_log;        // nondecreasing times
};

struct CoalescedFamily {
  PathSet paths;
  EquivalenceState state;
};

// Crossing map: classes merge at the first time two of their representatives
// coincide or swap order; the larger representative's class follows the
// smaller one from then on. Pairs meeting at the same instant are merged
// transitively, in lexicographic pair order. Lattice-step families cross at
// grid times; interpolated and Gaussian families at the linear zero inside
// the grid interval.
CoalescedFamily apply_g(const IndependentFamily& family);

// Coincidence map: the same construction with first exact coincidence at a
// common grid time. Lattice families only.
CoalescedFamily apply_f(const IndependentFamily& family);

// sup_t |f1^(t) - f2^(t)| joined with |t1 - t2|, exact on breakpoints.
double dbar(const Path& a, const Path& b);

double fg_distance(const CoalescedFamily& f, const CoalescedFamily& g);
double fg_distance(const IndependentFamily& family);

// Walker w from origins[w] with derive_stream(seed, w), one draw per integer
// step up to t_end; the same draws simulate_discrete gives walker w while alive.
IndependentFamily independent_walk_family(const IncrementDistribution& law, const std::vector<Origin>& origins,
                                          std::int64_t t_end, std::uint64_t seed, PathKind kind);

struct BmStart {
  double x = 0.0;
  double t = 0.0;
};

// Unit-diffusion Gaussian paths on the global grid k * dt * 2^coarsen. Path i
// draws normals from derive_stream(seed, i) at spacing dt and keeps every
// 2^coarsen-th partial sum, so coarsen = 1 and 0 on the same seed are coupled.
// Start times must lie on the grid.
IndependentFamily independent_bm_family(const std::vector<BmStart>& starts, double horizon, double dt,
                                        std::uint64_t seed, int coarsen = 0);

struct CoalescingBmSample {
  PathSet paths;                      // empty unless keep_paths
  std::vector<double> final_position; // per start, value at the horizon
  EquivalenceState state;
};

// apply_g of independent_bm_family, computed online: only order-adjacent
// representatives can cross first, and absorbed paths stop drawing.
CoalescingBmSample sample_coalescing_bm(const std::vector<BmStart>& starts, double horizon, double dt,
                                        std::uint64_t seed, bool keep_paths = true, int coarsen = 0);

}  // namespace coalweb
