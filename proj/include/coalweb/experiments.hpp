#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coalweb/increments.hpp"
#include "coalweb/walks.hpp"

namespace coalweb {

enum class ExperimentKind {
  density_scan,
  etahat,
  pointprocess,
  negcorr_exact,
  negcorr_mc,
  overshoot,
  interface_clt,
  fg_convergence,
  tightness_scan,
  hitting_tail,
  bm_reference,
};

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);
const std::vector<ExperimentKind>& all_experiment_kinds();

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::density_scan;
  IncrementDistribution law = lazy_uniform_law();
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::vector<double> deltas;
  std::vector<double> ts;
  double a = 0.0;
  double b = 1.0;
  std::int64_t width = 0;  // 0: chosen from the law and horizon
  double grid_dt = 1e-4;
  double epsilon = 0.05;
  std::int64_t m = 2;
  double u = 0.05;
  std::int64_t level = 1000;
  TimeKind time_kind = TimeKind::continuous;
  // Replaces every declared tolerance and drops the 3-standard-error floor.
  std::optional<double> tolerance;
  unsigned workers = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Defaults used when a list parameter is left empty.
ExperimentConfig default_config(ExperimentKind kind);
// Fills empty parameter lists with the kind's defaults and checks the guards.
ExperimentConfig resolve(ExperimentConfig config);

enum class Sidedness { two_sided, upper, lower, info };
enum class Verdict { pass, fail, info };

std::string to_string(Sidedness s);
std::string to_string(Verdict v);

struct ReportCell {
  std::string name;
  std::string params;
  double estimate = 0.0;
  double se = 0.0;
  double reference = 0.0;  // NaN when the cell has no reference
  std::string provenance;  // "claim:..." or "oracle:..."
  Sidedness sidedness = Sidedness::two_sided;
  double tolerance = 0.0;
  double threshold = 0.0;
  Verdict verdict = Verdict::info;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReportCell> cells;
  std::string generator;
  std::string merge_note;
  double runtime_seconds = 0.0;

  bool all_pass() const;
};

// Observations of trials [begin, end); trial k runs on derive_stream(seed, k).
struct PartialReport {
  ExperimentConfig config;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  std::vector<std::vector<double>> observations;
};

PartialReport run_partial(const ExperimentConfig& config, std::uint64_t begin, std::uint64_t end);
// Orders partials by range start; the ranges must tile [0, trials).
ExperimentReport merge(std::vector<PartialReport> partials);
// Splits the trials over config.workers threads and merges.
ExperimentReport run(const ExperimentConfig& config);

// (b - a) / sqrt(pi t), the mean count of coalescing BM positions in (a, b) at time t.
double etahat_reference(double a, double b, double t);

std::string report_csv(const ExperimentReport& report);
std::string report_json(const ExperimentReport& report);
// Whitespace-separated "index estimate se reference" rows for plotting.
std::string report_dat(const ExperimentReport& report);

}  // namespace coalweb
