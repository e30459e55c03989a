#include "histolim/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "histolim/error.hpp"

namespace histolim {
namespace {

constexpr std::uint64_t kFineStreams = 0;
constexpr std::uint64_t kCoarseStreams = std::uint64_t{1} << 60;
constexpr std::uint64_t kCurveStreams = std::uint64_t{2} << 60;
constexpr std::size_t kBlock = 256;

// Sums per-replicate contributions in fixed blocks and then in block order,
// so the result does not depend on the number of workers.
std::vector<double> blocked_sum(std::size_t n, std::size_t width, int jobs,
                                const std::function<void(std::size_t, std::vector<double>&)>& add) {
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> partial(blocks);
  parallel_for(blocks, jobs, [&](std::size_t b) {
    std::vector<double> acc(width, 0.0);
    for (std::size_t r = b * kBlock; r < std::min(n, (b + 1) * kBlock); ++r) add(r, acc);
    partial[b] = std::move(acc);
  });
  std::vector<double> total(width, 0.0);
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < width; ++k) total[k] += p[k];
  }
  return total;
}

struct Moments {
  double mean;
  double se;
};

Moments moments(double sum, double sumsq, std::size_t n) {
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = n > 1 ? std::max(0.0, (sumsq - nn * mean * mean) / (nn - 1.0)) : 0.0;
  return {mean, std::sqrt(var / nn)};
}

double z_score(const Moments& a, const Moments& b) {
  const double diff = a.mean - b.mean;
  const double se = std::hypot(a.se, b.se);
  if (se > 0.0) return diff / se;
  const double scale = std::max({1.0, std::abs(a.mean), std::abs(b.mean)});
  return std::abs(diff) <= 1e-12 * scale ? 0.0 : std::copysign(INFINITY, diff);
}

std::vector<int> default_depths(const PartitionChain& chain) {
  std::vector<int> depths;
  for (int d = 2; d <= std::min<int>(10, static_cast<int>(chain.depth())); ++d) depths.push_back(d);
  return depths;
}

void check_depths(const std::vector<int>& depths, const PartitionChain& chain) {
  if (depths.empty()) throw ValidationError("no depths given");
  for (int d : depths) {
    if (d < 0 || d > static_cast<int>(chain.depth())) {
      throw ValidationError("depth " + std::to_string(d) + " outside the chain");
    }
  }
}

// Draws at the deepest requested level and projects to every requested depth.
struct MultiLevel {
  std::vector<int> depths;
  LevelSampler sampler;
  std::vector<RefinementMap> maps;

  MultiLevel(const HistogramSystem& sys, const PartitionChain& chain, std::vector<int> ds)
      : depths(std::move(ds)),
        sampler(sys, chain, static_cast<std::size_t>(*std::max_element(depths.begin(), depths.end()))) {
    const auto top = sampler.level();
    for (int d : depths) maps.push_back(chain.map(static_cast<std::size_t>(d), top));
  }

  std::vector<Histogram> draw(RandomStream& s) const {
    const Histogram fine = sampler.draw(s);
    std::vector<Histogram> out;
    out.reserve(maps.size());
    for (const auto& m : maps) out.push_back(project(fine, m));
    return out;
  }
};

const Verdict* find(const std::vector<Verdict>& verdicts, const std::string& condition) {
  for (const auto& v : verdicts) {
    if (v.condition == condition) return &v;
  }
  return nullptr;
}

bool holds(const Verdict* v) { return v && v->status == VerdictStatus::kHolds; }

}  // namespace

int default_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(jobs > 0 ? jobs : default_jobs()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------- coherence

CoherenceResult coherence_test(const HistogramSystem& sys, const PartitionChain& chain, std::size_t m,
                               const MonteCarloConfig& config, const std::optional<HistogramSystem>& coarse_oracle) {
  if (config.replicates < kMinReplicates) {
    throw ValidationError("coherence test needs at least " + std::to_string(kMinReplicates) + " replicates",
                          "insufficient_samples");
  }
  if (m < 1 || m > chain.depth()) throw ValidationError("coherence levels outside the chain");
  const LevelSampler fine(sys, chain, m);
  const LevelSampler coarse(coarse_oracle.value_or(sys), chain, m - 1);
  const RefinementMap& step = chain.step(m);
  const std::size_t n = chain.level(m - 1)->size();
  const std::size_t pairs = n * (n + 1) / 2;
  const std::size_t width = 2 * (n + pairs);

  const auto accumulate = [&](const std::vector<double>& x, std::vector<double>& acc) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i, ++k) {
      acc[k] += x[i];
      acc[width / 2 + k] += x[i] * x[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j, ++k) {
        const double v = x[i] * x[j];
        acc[k] += v;
        acc[width / 2 + k] += v * v;
      }
    }
  };
  const std::size_t N = config.replicates;
  const auto a = blocked_sum(N, width, config.jobs, [&](std::size_t r, std::vector<double>& acc) {
    RandomStream s(config.seed, kFineStreams | r);
    accumulate(project(fine.draw(s), step).values(), acc);
  });
  const auto b = blocked_sum(N, width, config.jobs, [&](std::size_t r, std::vector<double>& acc) {
    RandomStream s(config.seed, kCoarseStreams | r);
    accumulate(coarse.draw(s).values(), acc);
  });

  CoherenceResult result;
  result.seed = config.seed;
  result.coarse_level = m - 1;
  result.replicates = N;
  for (std::size_t k = 0; k < n + pairs; ++k) {
    const double z = z_score(moments(a[k], a[width / 2 + k], N), moments(b[k], b[width / 2 + k], N));
    (k < n ? result.z_first : result.z_second).push_back(z);
    result.max_abs_z = std::max(result.max_abs_z, std::abs(z));
  }
  result.pass = result.max_abs_z < kCoherenceThreshold;
  return result;
}

CoherenceMajority coherence_majority(const HistogramSystem& sys, const PartitionChain& chain, std::size_t m,
                                     const MonteCarloConfig& config,
                                     const std::optional<HistogramSystem>& coarse_oracle) {
  CoherenceMajority out;
  int passes = 0;
  for (std::uint64_t k = 0; k < 3; ++k) {
    MonteCarloConfig c = config;
    c.seed = config.seed + k;
    out.runs.push_back(coherence_test(sys, chain, m, c, coarse_oracle));
    passes += out.runs.back().pass ? 1 : 0;
  }
  out.pass = passes >= 2;
  return out;
}

// ---------------------------------------------------------------- curves

const char* to_string(AtomicityTrend t) {
  switch (t) {
    case AtomicityTrend::kDecreasing:
      return "decreasing";
    case AtomicityTrend::kPlateau:
      return "plateau";
    case AtomicityTrend::kIndeterminate:
      break;
  }
  return "indeterminate";
}

double max_cell_share(const Histogram& h) {
  double top = 0.0;
  double total = 0.0;
  for (double v : h.values()) {
    top = std::max(top, std::abs(v));
    total += std::abs(v);
  }
  return total > 0.0 ? top / total : 0.0;
}

std::vector<CurvePoint> atomicity_statistic(const HistogramSystem& sys, const PartitionChain& chain,
                                            const std::vector<int>& depths, const MonteCarloConfig& config) {
  check_depths(depths, chain);
  const MultiLevel sampler(sys, chain, depths);
  const std::size_t d = depths.size();
  const auto acc = blocked_sum(config.replicates, 2 * d, config.jobs, [&](std::size_t r, std::vector<double>& a) {
    RandomStream s(config.seed, kCurveStreams | r);
    const auto levels = sampler.draw(s);
    for (std::size_t k = 0; k < d; ++k) {
      const double v = max_cell_share(levels[k]);
      a[k] += v;
      a[d + k] += v * v;
    }
  });
  std::vector<CurvePoint> curve;
  for (std::size_t k = 0; k < d; ++k) {
    const Moments mo = moments(acc[k], acc[d + k], config.replicates);
    curve.push_back({depths[k], 0.0, mo.mean, mo.se, config.replicates, 0.0});
  }
  return curve;
}

AtomicityTrend atomicity_trend(const std::vector<CurvePoint>& curve) {
  if (curve.size() < 2) return AtomicityTrend::kIndeterminate;
  const CurvePoint& first = curve.front();
  const CurvePoint& last = curve.back();
  if (last.mean + 4.0 * last.stderr_ < first.mean / 4.0) return AtomicityTrend::kDecreasing;
  if (last.mean - 4.0 * last.stderr_ > first.mean / 2.0) return AtomicityTrend::kPlateau;
  return AtomicityTrend::kIndeterminate;
}

DominationResult domination_statistic(const HistogramSystem& sys, const PartitionChain& chain,
                                      const std::vector<int>& depths, const std::vector<double>& L_grid,
                                      double delta, const MonteCarloConfig& config) {
  check_depths(depths, chain);
  if (L_grid.empty()) throw ValidationError("empty L grid");
  for (double L : L_grid) {
    if (!(L >= 0.0) || !std::isfinite(L)) throw ValidationError("L values must be finite and nonnegative");
  }
  const MultiLevel sampler(sys, chain, depths);
  std::vector<Histogram> refs;
  for (int d : depths) refs.push_back(reference_histogram(sys, chain, static_cast<std::size_t>(d)));
  const std::size_t nd = depths.size();
  const std::size_t nl = L_grid.size();
  const std::size_t cells = nd * nl;
  // Layout: sums, squares, tail counts, then one uncovered counter per depth.
  const auto acc = blocked_sum(config.replicates, 3 * cells + nd, config.jobs,
                               [&](std::size_t r, std::vector<double>& a) {
                                 RandomStream s(config.seed, kCurveStreams | r);
                                 const auto levels = sampler.draw(s);
                                 for (std::size_t k = 0; k < nd; ++k) {
                                   std::vector<double> abs_values(levels[k].size());
                                   bool uncovered = false;
                                   for (std::size_t i = 0; i < abs_values.size(); ++i) {
                                     abs_values[i] = std::abs(levels[k][i]);
                                     if (abs_values[i] > 0.0 && refs[k][i] == 0.0) uncovered = true;
                                   }
                                   const Histogram p(levels[k].partition(), std::move(abs_values),
                                                     HistogramKind::kPositive);
                                   for (std::size_t l = 0; l < nl; ++l) {
                                     const double v = truncation_statistic(p, refs[k], L_grid[l]);
                                     const std::size_t c = k * nl + l;
                                     a[c] += v;
                                     a[cells + c] += v * v;
                                     a[2 * cells + c] += v > delta ? 1.0 : 0.0;
                                   }
                                   if (uncovered) a[3 * cells + k] += 1.0;
                                 }
                               });
  DominationResult out;
  const double nn = static_cast<double>(config.replicates);
  for (std::size_t k = 0; k < nd; ++k) {
    for (std::size_t l = 0; l < nl; ++l) {
      const std::size_t c = k * nl + l;
      const Moments mo = moments(acc[c], acc[cells + c], config.replicates);
      out.curve.push_back({depths[k], L_grid[l], mo.mean, mo.se, config.replicates, acc[2 * cells + c] / nn});
    }
    if (acc[3 * cells + k] > 0.0) out.uncovered_depths.push_back(depths[k]);
  }
  return out;
}

std::vector<double> tv_martingale_curve(const Density& p, const PartitionChain& chain, int depth) {
  if (depth < 1 || depth > static_cast<int>(chain.depth())) throw ValidationError("depth outside the chain");
  const Domain& domain = chain.level(0)->domain();
  if (!domain.bounded()) throw ValidationError("Lebesgue reference needs a bounded domain", "not_dominated");
  const LebesgueReference ref{domain.lower.to_double(), domain.upper.to_double()};
  std::vector<double> curve;
  for (int m = 1; m <= depth; ++m) {
    const PartitionPtr& part = chain.level(static_cast<std::size_t>(m));
    const Histogram mass = integrate_lebesgue(p, part, HistogramKind::kSigned);
    PiecewiseDensity avg{part, std::vector<double>(part->size(), 0.0)};
    for (std::size_t i = 0; i < part->size(); ++i) {
      const double len = part->cell(i).length();
      if (len > 0.0) {
        avg.cell_values[i] = mass[i] / len;
      } else if (mass[i] != 0.0) {
        throw ValidationError("density charges a Lebesgue-null cell", "not_dominated");
      }
    }
    curve.push_back(tv_distance_density(p, avg, ref));
  }
  return curve;
}

double quadratic_variation(const std::vector<PathPoint>& path) {
  if (path.size() < 2) throw ValidationError("quadratic variation needs at least 2 points");
  double qv = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double d = path[i].value - path[i - 1].value;
    qv += d * d;
  }
  return qv;
}

// ---------------------------------------------------------------- phases

const char* to_string(Phase p) {
  switch (p) {
    case Phase::kAbsolutelyContinuous:
      return "absolutely-continuous";
    case Phase::kFixedAtomic:
      return "fixed-atomic";
    case Phase::kContinuousSingular:
      return "continuous-singular";
    case Phase::kRandomAtomic:
      return "random-atomic";
    case Phase::kInconclusive:
      break;
  }
  return "inconclusive";
}

PhaseReport phase_report(const HistogramSystem& sys, const PartitionChain& chain, const PhaseConfig& config) {
  validate(sys);
  PhaseReport report;
  report.family = family_name(sys);
  report.completely_random = completely_random(sys);
  const Domain& domain = chain.level(0)->domain();
  const int depth = static_cast<int>(chain.depth());

  std::string tight_name;
  std::string weak_name;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, DirichletSystem>) {
          report.verdicts.push_back(dirichlet_condition(s, domain));
          report.verdicts.push_back(dirichlet_weak_condition(s, domain));
          tight_name = "dirichlet_tight";
          weak_name = "dirichlet_weak";
        } else if constexpr (std::is_same_v<S, PolyaTreeSystem>) {
          report.verdicts.push_back(polya_tight_all_prefixes(s));
          report.verdicts.push_back(polya_weak_condition(s));
          tight_name = "polya_tight";
          weak_name = "polya_weak";
        } else if constexpr (std::is_same_v<S, GaussianSystem>) {
          report.verdicts = gaussian_conditions(s, chain, std::min(kMatrixDepth, depth));
          tight_name = "gaussian_diagonal_vague";
          weak_name = "gaussian_weak";
        } else {
          report.verdicts.push_back(leakage_tight_condition(s, std::max(depth, 2)));
          tight_name = "leakage_tight";
        }
      },
      sys);

  if (config.monte_carlo) {
    const std::vector<int> depths = config.depths.empty() ? default_depths(chain) : config.depths;
    if (!depths.empty()) {
      report.atomicity_curve = atomicity_statistic(sys, chain, depths, config.mc);
      report.atomicity_trend = atomicity_trend(report.atomicity_curve);
      const auto* g = std::get_if<GaussianSystem>(&sys);
      if (!g || g->centred()) {
        report.domination = domination_statistic(sys, chain, depths, config.L_grid, config.delta, config.mc);
      }
    }
  }

  const Verdict* tight = find(report.verdicts, tight_name);
  const Verdict* weak = weak_name.empty() ? nullptr : find(report.verdicts, weak_name);
  const bool is_polya = std::holds_alternative<PolyaTreeSystem>(sys);
  const bool dominated = holds(weak) && (!is_polya || holds(tight));
  const auto* gauss = std::get_if<GaussianSystem>(&sys);

  if (dominated) {
    report.anchor = weak->anchor;
    if (report.completely_random) {
      report.declared_phase = Phase::kFixedAtomic;
      report.rationale =
          "dominated by the mean measure and completely random: in nu = nu_n + nu_f + nu_r only the fixed "
          "atoms nu_f remain";
    } else {
      report.declared_phase = Phase::kAbsolutelyContinuous;
      report.rationale = "dominated by the mean measure: weak condition holds (" + weak->argument + ")";
      if (gauss && std::holds_alternative<ConstantCovariance>(gauss->covariance)) {
        report.rationale += "; the limit draws random multiples of Lebesgue measure";
      }
    }
  } else if (holds(tight)) {
    report.anchor = tight->anchor;
    const bool atomic_evidence =
        !report.atomicity_trend || *report.atomicity_trend != AtomicityTrend::kDecreasing;
    if (report.completely_random && atomic_evidence) {
      report.declared_phase = Phase::kRandomAtomic;
      report.random_atomic = true;
      report.rationale =
          "limit exists and masses are completely random: nu = nu_n + nu_f + nu_r has a purely atomic random "
          "part nu_r";
    } else {
      report.declared_phase = Phase::kContinuousSingular;
      report.rationale = "limit exists (" + tight->argument + ") without domination by the mean measure";
      if (report.completely_random) {
        report.rationale += "; completely random but the atomicity curve decreases, so the random-atomic flag is off";
      }
    }
  } else if (tight && tight->status == VerdictStatus::kFails) {
    report.anchor = tight->anchor;
    report.rationale = "no tight limit: " + tight->argument;
  } else {
    report.anchor = tight ? tight->anchor : "P-tight";
    report.rationale = "no condition verdict decides a phase";
  }
  return report;
}

}  // namespace histolim
