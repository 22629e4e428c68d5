#include "seisnet/subset_sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

namespace seisnet {

void SsConfig::validate() const {
  if (!(p0 > 0.0 && p0 < 1.0)) throw InvalidArgumentError("p0 must lie in (0, 1)");
  if (n == 0) throw InvalidArgumentError("n must be positive");
  const double seeds = p0 * static_cast<double>(n);
  if (seeds < 1.0 - 1e-9 || std::abs(seeds - std::round(seeds)) > 1e-9) {
    throw InvalidArgumentError("n * p0 must be a positive integer");
  }
  if (max_levels < 1) throw InvalidArgumentError("max_levels must be at least 1");
}

std::size_t SsConfig::seeds_per_level() const {
  return static_cast<std::size_t>(std::llround(p0 * static_cast<double>(n)));
}

double quantile_threshold(std::span<const double> values, double p0) {
  if (values.empty()) throw InvalidArgumentError("quantile of an empty sample");
  const auto rank = static_cast<std::size_t>(
      std::max(1.0, std::ceil(p0 * static_cast<double>(values.size()) - 1e-9)));
  std::vector<double> copy(values.begin(), values.end());
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(rank - 1), copy.end());
  const double q = copy[rank - 1];
  // a quantile tied with the largest value cannot shrink the domain (binary
  // g, or an all-perfect +inf majority): treat it as the final level
  const double top = *std::max_element(copy.begin() + static_cast<std::ptrdiff_t>(rank - 1), copy.end());
  return q <= 0.0 || q >= top ? 0.0 : q;
}

std::vector<std::size_t> lowest_indices(std::span<const double> values, std::size_t count) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  count = std::min(count, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return values[a] < values[b] || (values[a] == values[b] && a < b);
                    });
  idx.resize(count);
  return idx;
}

Descent descend_to_failure(std::vector<ChainState>& population, const LimitStateFn& limit_state,
                           const GaussianMap& map, const SsConfig& config,
                           std::uint64_t& level_tag, std::size_t max_new_levels) {
  Descent out;
  const std::size_t n = population.size();
  const std::size_t n_seeds = config.seeds_per_level();
  std::vector<double> values(n);
  double acceptance = 1.0;
  std::size_t level_evaluations = 0;

  for (std::size_t new_levels = 0;; ++new_levels) {
    for (std::size_t j = 0; j < n; ++j) values[j] = population[j].g;
    const double threshold = quantile_threshold(values, config.p0);

    if (threshold == 0.0) {
      const auto failures = static_cast<std::size_t>(
          std::count_if(values.begin(), values.end(), [](double g) { return g <= 0.0; }));
      const double fraction = static_cast<double>(failures) / static_cast<double>(n);
      out.levels.push_back({0.0, fraction, level_evaluations, acceptance});
      out.probability *= fraction;
      out.converged = true;
      out.zero_failures = failures == 0;
      return out;
    }
    if (new_levels == max_new_levels) {
      const auto failures = static_cast<std::size_t>(
          std::count_if(values.begin(), values.end(), [](double g) { return g <= 0.0; }));
      const double fraction = static_cast<double>(failures) / static_cast<double>(n);
      out.levels.push_back({threshold, fraction, level_evaluations, acceptance});
      out.probability *= fraction;
      return out;
    }

    out.levels.push_back({threshold, config.p0, level_evaluations, acceptance});
    out.probability *= config.p0;

    std::vector<ChainState> seeds;
    seeds.reserve(n_seeds);
    for (const std::size_t i : lowest_indices(values, n_seeds)) seeds.push_back(population[i]);
    PopulateResult next = populate_level(map, seeds, n, limit_state, threshold, config.t_f,
                                         config.seed, level_tag++, std::move(population));
    level_evaluations = next.evaluations;
    acceptance = next.evaluations == 0 ? 1.0
                                       : static_cast<double>(next.accepted) /
                                             static_cast<double>(next.evaluations);
    out.evaluations += next.evaluations;
    population = std::move(next.states);
  }
}

SsResult run_ss(const LimitStateFn& limit_state, const GaussianMap& map, const SsConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  LimitStateFn g = limit_state;
  RngStream rng(config.seed, 0);
  std::vector<ChainState> population = sample_unconditional(map, config.n, rng, &g);
  std::uint64_t level_tag = 1;
  Descent descent =
      descend_to_failure(population, g, map, config, level_tag, config.max_levels - 1);
  descent.levels.front().evaluations = config.n;

  SsResult result;
  result.p_hat = descent.probability;
  result.levels = std::move(descent.levels);
  result.n_g = config.n + descent.evaluations;
  result.seed = config.seed;
  result.zero_failures = descent.zero_failures;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!descent.converged) {
    throw NoConvergenceError("subset simulation did not reach the failure domain within " +
                                 std::to_string(config.max_levels) + " levels",
                             std::move(result));
  }
  return result;
}

std::uint64_t repetition_seed(std::uint64_t master, std::size_t rep) {
  return derive_seed(master, 0xC0FFEEULL, rep);
}

RepeatSummary summarize_runs(std::vector<SsResult> runs) {
  RepeatSummary s;
  const double count = static_cast<double>(runs.size());
  if (runs.empty()) return s;
  for (const auto& r : runs) {
    s.mean_p += r.p_hat;
    s.mean_n_g += static_cast<double>(r.n_g);
    s.mean_wall_seconds += r.wall_seconds;
  }
  s.mean_p /= count;
  s.mean_n_g /= count;
  s.mean_wall_seconds /= count;
  if (runs.size() >= 2) {
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.p_hat - s.mean_p) * (r.p_hat - s.mean_p);
    s.std_p = std::sqrt(ss / (count - 1.0));
    s.cov = s.mean_p > 0.0 ? s.std_p / s.mean_p : 0.0;
  } else {
    s.std_p = std::numeric_limits<double>::quiet_NaN();
    s.cov = std::numeric_limits<double>::quiet_NaN();
  }
  s.eff = s.cov * std::sqrt(s.mean_n_g);
  s.runs = std::move(runs);
  return s;
}

namespace {

std::vector<SsResult> run_repetitions(const LimitStateFn& limit_state, const GaussianMap& map,
                                      const SsConfig& config, std::size_t reps, bool parallel,
                                      std::size_t& failed) {
  if (reps == 0) throw InvalidArgumentError("at least one repetition is required");
  config.validate();
  std::vector<SsResult> results(reps);
  std::vector<std::uint8_t> ok(reps, 1);
  std::exception_ptr failure;

#pragma omp parallel if (parallel)
  {
    LimitStateFn local = limit_state;
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(reps); ++ri) {
      const auto r = static_cast<std::size_t>(ri);
      SsConfig cfg = config;
      cfg.seed = repetition_seed(config.seed, r);
      try {
        results[r] = run_ss(local, map, cfg);
      } catch (const NoConvergenceError& e) {
        results[r] = e.partial();
        ok[r] = 0;
      } catch (...) {
#pragma omp critical(seisnet_repeat_error)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SsResult> kept;
  failed = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    if (ok[r]) {
      kept.push_back(std::move(results[r]));
    } else {
      ++failed;
    }
  }
  return kept;
}

}  // namespace

RepeatSummary repeat_ss(const LimitStateFn& limit_state, const GaussianMap& map,
                        const SsConfig& config, std::size_t reps) {
  std::size_t failed = 0;
  RepeatSummary s = summarize_runs(run_repetitions(limit_state, map, config, reps, true, failed));
  s.failed_runs = failed;
  return s;
}

RepeatSummary repeat_ss_serial(const LimitStateFn& limit_state, const GaussianMap& map,
                               const SsConfig& config, std::size_t reps) {
  std::size_t failed = 0;
  RepeatSummary s = summarize_runs(run_repetitions(limit_state, map, config, reps, false, failed));
  s.failed_runs = failed;
  return s;
}

}  // namespace seisnet
