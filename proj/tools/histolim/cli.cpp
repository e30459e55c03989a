#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "histolim/conditions.hpp"
#include "histolim/diagnostics.hpp"
#include "histolim/error.hpp"
#include "histolim/samplers.hpp"
#include "histolim/serialization.hpp"

namespace histolim::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kEvaluators =
    "Condition evaluators (check, diagnose):\n"
    "  polya_tight              P-tight        sum of log(1 + b1/b0) along e o_m, every prefix\n"
    "  polya_leakage            P-tight        same sum along i_m (mass escaping to the right)\n"
    "  polya_weak               P-weak         sup_m of the level sums of prod E[V^2]/E[V]\n"
    "  gaussian_diagonal_vague  P-Gauss        max_A Sigma(A x A) -> 0 (diagonal covariances)\n"
    "  gaussian_spectral        P-Gauss        |alpha| tau_max(Sigma_alpha) bounded\n"
    "  gaussian_weak            P-weak-signed  sup_alpha sum_A sqrt(Sigma(A x A))\n"
    "  gaussian_trace           P-Gauss        trace of Sigma_alpha (reported, no verdict)\n"
    "  dirichlet_tight          P-tight        holds for every nonzero base measure\n"
    "  dirichlet_weak           P-weak         holds iff the base is purely atomic\n"
    "  leakage_tight            P-tight        outer mass delta escapes every compact\n"
    "Exit status: 0 success, 1 validation error, 2 numeric failure.\n";

struct Options {
  std::string system;
  std::string chain;
  int depth = -1;
  std::string depths;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string out;
  std::string format = "csv";
  bool force = false;
  std::string L_grid = "1,2,5,10,20";
  double delta = -1.0;
  std::size_t N = 10000;
};

ChainLimits limits_from_env() {
  ChainLimits limits;
  if (const char* env = std::getenv("HISTOLIM_MAX_DEPTH")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > CellIndex::kMaxLevel) {
      throw ValidationError("HISTOLIM_MAX_DEPTH must be an integer in 1..63");
    }
    limits.max_depth = static_cast<int>(v);
  }
  return limits;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw ValidationError("empty entry in list '" + text + "'");
    out.push_back(parse_number(Json(item)));
  }
  return out;
}

/// "2,3,5" or "2..10".
std::vector<int> parse_depths(const std::string& text) {
  std::vector<int> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (hi < lo) throw ValidationError("empty depth range '" + text + "'");
    for (int d = lo; d <= hi; ++d) out.push_back(d);
    return out;
  }
  for (double d : parse_list(text)) {
    if (d != static_cast<int>(d)) throw ValidationError("depths must be integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

HistogramSystem load_system(const Options& o) {
  if (o.system.empty()) throw ValidationError("--system is required");
  return system_from_json(read_json_file(o.system));
}

PartitionChain load_chain(const HistogramSystem& sys, const Options& o, int depth) {
  const ChainLimits limits = limits_from_env();
  if (depth > limits.max_depth) {
    throw CapacityError("depth " + std::to_string(depth) + " exceeds the limit " + std::to_string(limits.max_depth));
  }
  if (!o.chain.empty()) {
    PartitionChain chain = chain_from_json(read_json_file(o.chain), limits);
    if (depth > static_cast<int>(chain.depth())) throw ValidationError("depth exceeds the chain depth");
    return chain.truncated(static_cast<std::size_t>(depth));
  }
  if (const auto* l = std::get_if<LeakageSystem>(&sys)) return leakage_chain(depth, l->boundary, limits);
  Domain domain;
  if (const auto* p = std::get_if<PolyaTreeSystem>(&sys)) {
    if (const auto* d = std::get_if<DirichletRelationRule>(&p->rule)) domain = d->domain;
    if (p->p0 > 0.0) domain.lower_closed = true;
  }
  return dyadic_chain(domain, depth, limits);
}

void refuse_existing(const fs::path& path, bool force) {
  if (!force && fs::exists(path)) {
    throw ValidationError("'" + path.string() + "' exists; pass --force to overwrite", "output_exists");
  }
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write '" + path.string() + "'", "io");
  f << content;
  if (!f) throw ValidationError("write to '" + path.string() + "' failed", "io");
}

/// Writes to --out, or to stdout when no path is given.
void emit(const Options& o, std::ostream& out, const std::string& content) {
  if (o.out.empty() || o.out == "-") {
    out << content;
    return;
  }
  refuse_existing(o.out, o.force);
  write_file(o.out, content);
}

void require_seed(const CLI::Option* seed) {
  if (seed->count() == 0) throw ValidationError("--seed is required for stochastic subcommands", "missing_seed");
}

void require_format(const Options& o) {
  if (o.format != "csv" && o.format != "json") throw ValidationError("--format must be csv or json");
}

int require_depth(const Options& o) {
  if (o.depth < 0) throw ValidationError("--depth is required");
  return o.depth;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- commands

void cmd_sample(const Options& o, const CLI::Option* seed) {
  require_seed(seed);
  require_format(o);
  const HistogramSystem sys = load_system(o);
  const int depth = require_depth(o);
  const PartitionChain chain = load_chain(sys, o, depth);
  if (o.replicates < 1) throw ValidationError("--replicates must be positive");
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  const std::string ext = o.format == "json" ? ".json" : ".csv";
  for (std::size_t k = 0; k < o.replicates; ++k) {
    refuse_existing(dir / ("hist_" + std::to_string(k) + ext), o.force);
    refuse_existing(dir / ("path_" + std::to_string(k) + ".csv"), o.force);
  }
  const LevelSampler sampler(sys, chain, static_cast<std::size_t>(depth));
  std::vector<std::string> hist(o.replicates), path(o.replicates);
  parallel_for(o.replicates, o.jobs, [&](std::size_t k) {
    RandomStream s(o.seed, k);
    const Histogram h = sampler.draw(s);
    hist[k] = o.format == "json" ? dump(histogram_to_json(h)) : histogram_to_csv(h);
    path[k] = path_to_csv(path_from_histogram(h, true));
  });
  for (std::size_t k = 0; k < o.replicates; ++k) {
    write_file(dir / ("hist_" + std::to_string(k) + ext), hist[k]);
    write_file(dir / ("path_" + std::to_string(k) + ".csv"), path[k]);
  }
}

void cmd_mean(const Options& o, std::ostream& out) {
  require_format(o);
  const HistogramSystem sys = load_system(o);
  const int depth = require_depth(o);
  const PartitionChain chain = load_chain(sys, o, depth);
  const PartitionPtr& p = chain.level(static_cast<std::size_t>(depth));
  const Histogram mean = std::visit(
      [&](const auto& s) -> Histogram {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DirichletSystem>) {
          return dirichlet_mean(s, p);
        } else if constexpr (std::is_same_v<S, PolyaTreeSystem>) {
          return polya_mean_histogram(s, chain, static_cast<std::size_t>(depth));
        } else if constexpr (std::is_same_v<S, GaussianSystem>) {
          return Histogram(p, s.centre.on(*p), HistogramKind::kSigned);
        } else {
          return leakage_histogram(s, p);
        }
      },
      sys);
  emit(o, out, o.format == "json" ? dump(histogram_to_json(mean)) : histogram_to_csv(mean));
}

void cmd_path(const Options& o, const CLI::Option* seed, std::ostream& out) {
  require_seed(seed);
  const HistogramSystem sys = load_system(o);
  const int depth = require_depth(o);
  const PartitionChain chain = load_chain(sys, o, depth);
  const LevelSampler sampler(sys, chain, static_cast<std::size_t>(depth));
  RandomStream s(o.seed, 0);
  emit(o, out, path_to_csv(path_from_histogram(sampler.draw(s), true)));
}

void cmd_check(const Options& o, std::ostream& out) {
  const HistogramSystem sys = load_system(o);
  Json verdicts = Json::array();
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, PolyaTreeSystem>) {
          const int depth = o.depth < 0 ? kProductDepth : o.depth;
          verdicts.push_back(verdict_to_json(polya_tight_all_prefixes(s, depth)));
          verdicts.push_back(verdict_to_json(polya_leakage_condition(s, depth)));
          verdicts.push_back(verdict_to_json(polya_weak_condition(s, depth)));
        } else if constexpr (std::is_same_v<S, GaussianSystem>) {
          const int depth = o.depth < 0 ? kMatrixDepth : o.depth;
          const PartitionChain chain = load_chain(sys, o, depth);
          for (const auto& v : gaussian_conditions(s, chain, depth)) verdicts.push_back(verdict_to_json(v));
        } else if constexpr (std::is_same_v<S, DirichletSystem>) {
          const PartitionChain chain = load_chain(sys, o, 0);
          const Domain& domain = chain.level(0)->domain();
          verdicts.push_back(verdict_to_json(dirichlet_condition(s, domain)));
          verdicts.push_back(verdict_to_json(dirichlet_weak_condition(s, domain)));
        } else {
          verdicts.push_back(verdict_to_json(leakage_tight_condition(s, o.depth < 0 ? 12 : o.depth)));
        }
      },
      sys);
  emit(o, out, dump(verdicts));
}

void cmd_diagnose(const Options& o, const CLI::Option* seed, std::ostream& out) {
  require_seed(seed);
  require_format(o);
  if (o.N < kMinReplicates) {
    throw ValidationError("--N must be at least " + std::to_string(kMinReplicates), "insufficient_samples");
  }
  const HistogramSystem sys = load_system(o);
  PhaseConfig config;
  config.mc = MonteCarloConfig{o.seed, o.N, o.jobs};
  if (!o.depths.empty()) config.depths = parse_depths(o.depths);
  config.L_grid = parse_list(o.L_grid);
  if (o.delta >= 0.0) config.delta = o.delta;
  int depth = o.depth;
  if (depth < 0) depth = config.depths.empty() ? 10 : *std::max_element(config.depths.begin(), config.depths.end());
  const PartitionChain chain = load_chain(sys, o, depth);
  const PhaseReport report = phase_report(sys, chain, config);
  const Json j = phase_report_to_json(report, sys);
  if (o.format == "json" || o.out.empty() || o.out == "-") {
    emit(o, out, dump(j));
    return;
  }
  const fs::path dir(o.out);
  for (const char* name : {"report.json", "atomicity.csv", "domination.csv"}) refuse_existing(dir / name, o.force);
  write_file(dir / "report.json", dump(j));
  write_file(dir / "atomicity.csv", curve_to_csv(report.atomicity_curve, false));
  write_file(dir / "domination.csv", curve_to_csv(report.domination.curve, true));
}

void cmd_counterexample(const Options& o, std::ostream& out) {
  require_format(o);
  const double delta = o.delta < 0.0 ? 0.2 : o.delta;
  const int depth = o.depth < 0 ? 12 : o.depth;
  const ChainLimits limits = limits_from_env();
  if (depth > limits.max_depth) {
    throw CapacityError("depth " + std::to_string(depth) + " exceeds the limit " + std::to_string(limits.max_depth));
  }
  const LeakageReport report = leakage_counterexample(delta, depth);
  emit(o, out, o.format == "json" ? dump(leakage_report_to_json(report)) : leakage_report_to_csv(report));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coherent random histogram systems: sampling, condition checks and phase diagnostics", "histolim"};
  app.footer(kEvaluators);
  app.require_subcommand(1);
  Options o;

  const auto add_system = [&](CLI::App* c) {
    c->add_option("--system", o.system, "System spec (JSON file)");
    c->add_option("--chain", o.chain, "Chain spec (JSON file); default dyadic on the system's domain");
  };
  const auto add_output = [&](CLI::App* c, bool format) {
    c->add_option("--out", o.out, "Output file or directory");
    c->add_flag("--force", o.force, "Overwrite existing outputs");
    if (format) c->add_option("--format", o.format, "csv or json");
  };

  auto* sample = app.add_subcommand("sample", "Sample histograms; writes hist_<k> and path_<k> per replicate");
  add_system(sample);
  sample->add_option("--depth", o.depth, "Chain level to sample");
  sample->add_option("--replicates", o.replicates, "Number of samples");
  auto* sample_seed = sample->add_option("--seed", o.seed, "Random seed (required)");
  sample->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
  add_output(sample, true);

  auto* mean = app.add_subcommand("mean", "Closed-form mean measure at one level");
  add_system(mean);
  mean->add_option("--depth", o.depth, "Chain level");
  add_output(mean, true);

  auto* path = app.add_subcommand("path", "Cumulative path t -> P((a, t]) of one sample");
  add_system(path);
  path->add_option("--depth", o.depth, "Chain level");
  auto* path_seed = path->add_option("--seed", o.seed, "Random seed (required)");
  add_output(path, false);

  auto* check = app.add_subcommand("check", "Evaluate the existence conditions (JSON verdicts)");
  add_system(check);
  check->add_option("--depth", o.depth, "Evaluation depth");
  add_output(check, false);

  auto* diagnose = app.add_subcommand("diagnose", "Phase report with Monte-Carlo curves");
  add_system(diagnose);
  diagnose->add_option("--depth", o.depth, "Chain depth");
  diagnose->add_option("--depths", o.depths, "Curve depths, e.g. 2..10 or 2,4,6");
  diagnose->add_option("--N", o.N, "Replicates per curve (>= 1000)");
  auto* diagnose_seed = diagnose->add_option("--seed", o.seed, "Random seed (required)");
  diagnose->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
  diagnose->add_option("--L-grid", o.L_grid, "Truncation levels, comma separated");
  diagnose->add_option("--delta", o.delta, "Tail threshold for the domination curve");
  add_output(diagnose, true);

  auto* counter = app.add_subcommand("counterexample", "Leakage tables for the coherent system without a limit");
  counter->add_option("--delta", o.delta, "Escaping mass in [0, 1)");
  counter->add_option("--depth", o.depth, "Deepest level");
  add_output(counter, true);

  std::vector<const char*> argv{"histolim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: usage: " << e.what() << "\n";
    return 1;
  }

  try {
    if (sample->parsed()) {
      cmd_sample(o, sample_seed);
    } else if (mean->parsed()) {
      cmd_mean(o, out);
    } else if (path->parsed()) {
      cmd_path(o, path_seed, out);
    } else if (check->parsed()) {
      cmd_check(o, out);
    } else if (diagnose->parsed()) {
      cmd_diagnose(o, diagnose_seed, out);
    } else if (counter->parsed()) {
      cmd_counterexample(o, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return e.category() == ErrorCategory::kNumeric ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: io: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: validation: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    err << "error: validation: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace histolim::cli
