#include "coalweb/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "coalweb/path_space.hpp"
#include "coalweb/walks.hpp"

namespace coalweb {

namespace {

constexpr const char* kFooter =
    "Reports: <out>/<kind>_seed<seed>.csv and .json; --format csv adds a whitespace-separated .dat.\n"
    "CSV columns: kind,name,params,estimate,se,reference,provenance,sidedness,tolerance,threshold,verdict\n"
    "Seed falls back to COALWEB_SEED. Exit: 0 all pass, 1 some cell fails, 2 usage error, 3 guard or IO error.";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool law_optional(const std::string& sub) {
  return sub == "etahat" || sub == "pointprocess" || sub == "bm_reference" || sub == "metrics";
}

struct Flags {
  std::string law;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::vector<double> deltas;
  std::vector<double> ts;
  std::vector<double> interval;
  std::optional<std::int64_t> width;
  std::optional<double> grid_dt;
  unsigned workers = 1;
  std::string out = ".";
  std::string format = "csv";
  std::optional<double> tolerance;
  std::string time_kind = "continuous";
  std::optional<double> epsilon;
  std::optional<std::int64_t> m;
  std::optional<double> u;
  std::optional<std::int64_t> level;
  std::vector<std::string> paths;
  int grid = 10000;
};

void add_experiment_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--law", f.law, "increment law \"o:p,o:p,...\"")->allow_extra_args(false);
  sub->add_option("--seed", f.seed, "master seed (fallback COALWEB_SEED)");
  sub->add_option("--trials", f.trials, "number of independent trials");
  sub->add_option("--delta", f.deltas, "scaling parameter, repeatable")->allow_extra_args(false);
  sub->add_option("--t", f.ts, "time, repeatable")->allow_extra_args(false);
  sub->add_option("--interval", f.interval, "interval a b")->expected(2);
  sub->add_option("--width", f.width, "torus width");
  sub->add_option("--grid-dt", f.grid_dt, "Brownian grid step");
  sub->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--tolerance", f.tolerance, "override every tolerance (drops the 3 se floor)");
  sub->add_option("--time-kind", f.time_kind, "discrete or continuous")
      ->check(CLI::IsMember({"discrete", "continuous"}));
  sub->add_option("--epsilon", f.epsilon, "fg distance threshold");
  sub->add_option("--m", f.m, "number of walkers for fg_convergence");
  sub->add_option("--u", f.u, "tightness probe half-width");
  sub->add_option("--level", f.level, "overshoot start distance");
}

}  // namespace

CliInvocation parse_cli(const std::vector<std::string>& args, std::optional<std::string> env_seed) {
  CLI::App app{"coalweb: coalescing random walks, voter models and Brownian web experiments", "coalweb"};
  app.footer(kFooter);
  app.require_subcommand(1, 1);
  Flags f;
  std::vector<std::string> names;
  for (auto k : all_experiment_kinds()) names.push_back(to_string(k));
  for (const auto& n : names) add_experiment_flags(app.add_subcommand(n, "run the " + n + " experiment"), f);
  add_experiment_flags(app.add_subcommand("density", "alias of density_scan"), f);
  auto* oracle = app.add_subcommand("oracle", "exact occupancy probabilities by enumeration");
  oracle->add_option("--law", f.law, "increment law")->required();
  oracle->add_option("--width", f.width, "torus width")->required();
  oracle->add_option("--t", f.ts, "steps")->required()->allow_extra_args(false);
  auto* metrics = app.add_subcommand("metrics", "distances between two path-set files");
  metrics->add_option("--paths", f.paths, "path-set file, given twice")->required()->allow_extra_args(false);
  metrics->add_option("--grid", f.grid, "evaluation grid size")->check(CLI::NonNegativeNumber);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw CliParseError("help requested", app.help());
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    throw CliParseError(e.what(), subs.empty() ? app.help() : subs.front()->help());
  }
  CLI::App* sub = app.get_subcommands().front();
  CliInvocation inv;
  inv.subcommand = sub->get_name() == "density" ? "density_scan" : sub->get_name();
  inv.out_dir = f.out;
  inv.format = f.format;
  auto fail = [&](const std::string& msg) -> CliParseError { return CliParseError(msg, sub->help()); };

  if (inv.subcommand == "metrics") {
    if (f.paths.size() != 2) throw fail("metrics needs --paths twice");
    inv.path_files = f.paths;
    inv.grid = f.grid;
    return inv;
  }
  if (inv.subcommand == "oracle") {
    try {
      inv.config.law = parse_law(f.law);
    } catch (const std::exception& e) {
      throw fail(std::string("bad --law: ") + e.what());
    }
    inv.config.kind = ExperimentKind::negcorr_exact;
    inv.config.width = *f.width;
    inv.config.ts = f.ts;
    return inv;
  }

  ExperimentConfig c = default_config(parse_experiment_kind(inv.subcommand));
  if (!f.law.empty()) {
    try {
      c.law = parse_law(f.law);
    } catch (const std::exception& e) {
      throw fail(std::string("bad --law: ") + e.what());
    }
  } else if (!law_optional(inv.subcommand)) {
    throw fail("--law is required for " + inv.subcommand);
  }
  if (f.seed) {
    c.seed = *f.seed;
  } else if (env_seed && !env_seed->empty()) {
    char* end = nullptr;
    errno = 0;
    const auto v = std::strtoull(env_seed->c_str(), &end, 10);
    if (*end != '\0' || errno != 0 || (*env_seed)[0] == '-') throw fail("COALWEB_SEED is not an unsigned integer");
    c.seed = v;
  } else {
    throw fail("--seed (or COALWEB_SEED) is required");
  }
  if (f.trials) c.trials = *f.trials;
  if (!f.deltas.empty()) c.deltas = f.deltas;
  if (!f.ts.empty()) c.ts = f.ts;
  if (!f.interval.empty()) {
    c.a = f.interval[0];
    c.b = f.interval[1];
  }
  if (f.width) c.width = *f.width;
  if (f.grid_dt) c.grid_dt = *f.grid_dt;
  if (f.epsilon) c.epsilon = *f.epsilon;
  if (f.m) c.m = *f.m;
  if (f.u) c.u = *f.u;
  if (f.level) c.level = *f.level;
  c.time_kind = parse_time_kind(f.time_kind);
  c.tolerance = f.tolerance;
  c.workers = f.workers;
  try {
    inv.config = resolve(c);
  } catch (const GuardViolation&) {
    throw;
  } catch (const std::exception& e) {
    throw fail(e.what());
  }
  return inv;
}

std::vector<std::string> render_cli(const CliInvocation& inv) {
  std::vector<std::string> a{inv.subcommand};
  const auto& c = inv.config;
  if (inv.subcommand == "metrics") {
    for (const auto& p : inv.path_files) {
      a.push_back("--paths");
      a.push_back(p);
    }
    a.push_back("--grid");
    a.push_back(std::to_string(inv.grid));
    return a;
  }
  auto push = [&](const char* flag, const std::string& v) {
    a.push_back(flag);
    a.push_back(v);
  };
  push("--law", c.law.text());
  push("--width", std::to_string(c.width));
  for (double t : c.ts) push("--t", fmt17(t));
  if (inv.subcommand == "oracle") return a;
  push("--seed", std::to_string(c.seed));
  push("--trials", std::to_string(c.trials));
  for (double d : c.deltas) push("--delta", fmt17(d));
  a.push_back("--interval");
  a.push_back(fmt17(c.a));
  a.push_back(fmt17(c.b));
  push("--grid-dt", fmt17(c.grid_dt));
  push("--workers", std::to_string(c.workers));
  push("--out", inv.out_dir);
  push("--format", inv.format);
  if (c.tolerance) push("--tolerance", fmt17(*c.tolerance));
  push("--time-kind", to_string(c.time_kind));
  push("--epsilon", fmt17(c.epsilon));
  push("--m", std::to_string(c.m));
  push("--u", fmt17(c.u));
  push("--level", std::to_string(c.level));
  return a;
}

namespace {

int run_oracle(const CliInvocation& inv, std::ostream& out) {
  const auto& c = inv.config;
  for (double tv : c.ts) {
    if (tv != std::floor(tv) || tv < 0) throw InvalidArgument("oracle steps must be nonnegative integers");
    const auto occ = enumerate_exact(c.law, c.width, static_cast<std::int64_t>(tv));
    out << "t=" << static_cast<std::int64_t>(tv) << " width=" << c.width << " p_single=" << occ.single[0] << " ("
        << fmt17(static_cast<double>(occ.single[0])) << ")\n";
    for (std::size_t x = 0; x < occ.pair.size(); ++x) {
      for (std::size_t y = x + 1; y < occ.pair.size(); ++y) {
        out << "  pair x=" << x << " y=" << y << " joint=" << occ.pair[x][y]
            << " product=" << occ.single[x] * occ.single[y] << '\n';
      }
    }
  }
  return kExitPass;
}

int run_metrics(const CliInvocation& inv, std::ostream& out) {
  PathSet sets[2];
  for (int k = 0; k < 2; ++k) {
    std::ifstream in(inv.path_files[static_cast<std::size_t>(k)]);
    if (!in) throw std::runtime_error("cannot read " + inv.path_files[static_cast<std::size_t>(k)]);
    sets[k] = read_path_set(in);
  }
  const auto h = hausdorff(sets[0], sets[1], inv.grid);
  out << "hausdorff " << fmt17(h.value) << " error_bound " << fmt17(h.error_bound) << '\n';
  if (sets[0].size() == 1 && sets[1].size() == 1) {
    const auto d = path_distance(sets[0][0], sets[1][0], inv.grid);
    out << "path_distance " << fmt17(d.value) << " error_bound " << fmt17(d.error_bound) << '\n';
  }
  return kExitPass;
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << body;
  f.close();
  if (!f) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

int execute(const CliInvocation& inv, std::ostream& out, std::ostream&) {
  if (inv.subcommand == "oracle") return run_oracle(inv, out);
  if (inv.subcommand == "metrics") return run_metrics(inv, out);
  const std::filesystem::path dir(inv.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("output directory " + inv.out_dir + " unusable");
  const auto report = run(inv.config);
  const std::string stem = to_string(inv.config.kind) + "_seed" + std::to_string(inv.config.seed);
  write_file(dir / (stem + ".csv"), report_csv(report));
  write_file(dir / (stem + ".json"), report_json(report));
  if (inv.format == "csv") write_file(dir / (stem + ".dat"), report_dat(report));
  for (const auto& c : report.cells) {
    out << '[' << to_string(c.verdict) << "] " << c.name;
    if (!c.params.empty()) out << " (" << c.params << ')';
    out << " estimate=" << fmt17(c.estimate) << " se=" << fmt17(c.se) << " reference=" << fmt17(c.reference)
        << " threshold=" << fmt17(c.threshold) << ' ' << c.provenance << '\n';
  }
  out << "runtime_seconds=" << report.runtime_seconds << '\n';
  if (!report.all_pass()) {
    out << "failing cells:";
    for (const auto& c : report.cells) {
      if (c.verdict == Verdict::fail) out << ' ' << c.name << (c.params.empty() ? "" : "[" + c.params + "]");
    }
    out << '\n';
    return kExitFail;
  }
  return kExitPass;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliInvocation inv;
  try {
    const char* env = std::getenv("COALWEB_SEED");
    inv = parse_cli(args, env ? std::optional<std::string>(env) : std::nullopt);
  } catch (const CliParseError& e) {
    if (std::string(e.what()) == "help requested") {
      out << e.usage;
      return kExitPass;
    }
    err << "error: " << e.what() << "\n\n" << e.usage;
    return kExitUsage;
  } catch (const GuardViolation& e) {
    err << "guard violation: " << e.what() << '\n';
    return kExitRuntime;
  }
  try {
    return execute(inv, out, err);
  } catch (const GuardViolation& e) {
    err << "guard violation: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitRuntime;
}

}  // namespace coalweb
