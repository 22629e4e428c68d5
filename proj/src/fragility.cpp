#include "seisnet/fragility.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace seisnet {

namespace {

constexpr double kGridTol = 1e-9;

bool is_multiple(double span, double step) {
  const double ratio = span / step;
  return std::abs(ratio - std::round(ratio)) < 1e-6;
}

std::size_t steps_in(double span, double step) {
  return static_cast<std::size_t>(std::llround(span / step));
}

}  // namespace

MagnitudeGrid::MagnitudeGrid(double mw_max, double mw_min, double step,
                             std::vector<MagnitudeInterval> intervals)
    : mw_max_(mw_max), mw_min_(mw_min), step_(step), intervals_(std::move(intervals)) {
  if (!(mw_max_ > mw_min_)) throw InvalidArgumentError("grid needs Mw_max > Mw_min");
  if (!(step_ > 0.0)) throw InvalidArgumentError("grid step must be positive");
  if (!is_multiple(mw_max_ - mw_min_, step_)) {
    throw InvalidArgumentError("grid step does not divide [Mw_min, Mw_max]");
  }
  if (intervals_.empty()) intervals_.push_back({mw_max_, mw_min_});
  double expected_hi = mw_max_;
  for (const auto& iv : intervals_) {
    if (std::abs(iv.hi - expected_hi) > kGridTol) {
      throw InvalidArgumentError("intervals must be contiguous and start at Mw_max");
    }
    if (!(iv.hi > iv.lo)) throw InvalidArgumentError("interval needs hi > lo");
    if (!is_multiple(iv.hi - iv.lo, step_)) {
      throw InvalidArgumentError("grid step does not divide interval span");
    }
    expected_hi = iv.lo;
  }
  if (std::abs(expected_hi - mw_min_) > kGridTol) {
    throw InvalidArgumentError("intervals must end at Mw_min");
  }
}

std::vector<double> MagnitudeGrid::magnitudes() const {
  const std::size_t count = steps_in(mw_max_ - mw_min_, step_) + 1;
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = mw_max_ - static_cast<double>(k) * step_;
  return out;
}

std::vector<double> MagnitudeGrid::interval_magnitudes(std::size_t interval) const {
  const MagnitudeInterval& iv = intervals_.at(interval);
  const bool last = interval + 1 == intervals_.size();
  std::vector<double> out;
  for (const double mw : magnitudes()) {
    const bool below_top = mw <= iv.hi + kGridTol;
    const bool above_bottom = last ? mw >= iv.lo - kGridTol : mw > iv.lo + kGridTol;
    if (below_top && above_bottom) out.push_back(mw);
  }
  return out;
}

void DamageStateSet::validate() const {
  if (states.empty()) throw InvalidArgumentError("damage-state set is empty");
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (!(states[i].capacity_median > states[i - 1].capacity_median)) {
      throw InvalidArgumentError("damage-state capacity medians must strictly increase");
    }
  }
}

DamageStateSet DamageStateSet::hazus4() {
  return {{{"slight", 0.58, 0.69},
           {"moderate", 0.98, 0.69},
           {"extensive", 1.48, 0.69},
           {"collapse", 2.08, 0.69}}};
}

LimitStateFn shifted_limit_state(LimitStateFn base, std::size_t k, Eigen::VectorXd dz) {
  if (k <= 1) return base;
  Eigen::VectorXd offset = static_cast<double>(k - 1) * dz;
  Eigen::VectorXd shifted(offset.size());
  return [base = std::move(base), offset = std::move(offset),
          shifted = std::move(shifted)](std::span<const double> z) mutable {
    for (Eigen::Index i = 0; i < offset.size(); ++i) {
      shifted(i) = z[static_cast<std::size_t>(i)] + offset(i);
    }
    return base(as_span(shifted));
  };
}

FragilityCurve run_specialized_ss(const LimitStateFactory& factory,
                                  const MarginDistribution& dist, std::span<const double> mws,
                                  const SsConfig& config) {
  config.validate();
  if (mws.empty()) throw InvalidArgumentError("empty magnitude grid");
  double step = 0.0;
  if (mws.size() > 1) {
    step = mws[0] - mws[1];
    if (!(step > 0.0)) throw InvalidArgumentError("magnitudes must descend");
    for (std::size_t k = 1; k < mws.size(); ++k) {
      if (std::abs((mws[k - 1] - mws[k]) - step) > 1e-9) {
        throw InvalidArgumentError("magnitude grid must be equally spaced");
      }
    }
  }

  const GaussianMap map(dist, mws[0]);
  const Eigen::VectorXd dz = dist.margin_shift(-step);
  const std::size_t n_seeds = config.seeds_per_level();

  FragilityCurve curve;
  curve.seed = config.seed;

  LimitStateFn current = factory(mws[0]);
  RngStream rng(config.seed, 0);
  std::vector<ChainState> population = sample_unconditional(map, config.n, rng, &current);
  std::uint64_t level_tag = 1;

  Descent first = descend_to_failure(population, current, map, config, level_tag,
                                     config.max_levels - 1);
  std::size_t cumulative = config.n + first.evaluations;
  if (!first.converged) {
    throw PartialCurveError("no failure samples at Mw = " + std::to_string(mws[0]), curve);
  }
  double p = first.probability;
  curve.points.push_back({mws[0], p, cumulative, cumulative, first.levels.size() - 1, 0});

  // Seed selection among failures uses its own stream so that chain streams
  // are untouched by it.
  RngStream selector(config.seed, derive_seed(0x5E1EC7ULL, 0));

  for (std::size_t k = 1; k < mws.size(); ++k) {
    std::vector<std::size_t> failures;
    for (std::size_t j = 0; j < population.size(); ++j) {
      if (population[j].g <= 0.0) failures.push_back(j);
    }
    if (failures.empty()) {
      throw PartialCurveError("empty conditional population at Mw = " + std::to_string(mws[k]),
                              curve);
    }
    // Uniform subset of the failure samples (partial Fisher–Yates).
    const std::size_t take = std::min(n_seeds, failures.size());
    std::vector<ChainState> seeds;
    seeds.reserve(take);
    for (std::size_t s = 0; s < take; ++s) {
      const std::size_t pick = s + selector.index(failures.size() - s);
      std::swap(failures[s], failures[pick]);
      seeds.push_back(population[failures[s]]);
    }

    PopulateResult grown =
        populate_level(map, seeds, config.n, current, 0.0, config.t_f, config.seed, level_tag++,
                       std::move(population));
    population = std::move(grown.states);
    std::size_t step_evaluations = grown.evaluations;

    current = shifted_limit_state(factory(mws[k]), k + 1, dz);
    for (auto& state : population) state.g = current(as_span(state.z));
    curve.reevaluations += population.size();

    Descent descent =
        descend_to_failure(population, current, map, config, level_tag, config.max_levels - 1);
    step_evaluations += descent.evaluations;
    cumulative += step_evaluations;
    if (!descent.converged) {
      throw PartialCurveError("no failure samples at Mw = " + std::to_string(mws[k]), curve);
    }
    p *= descent.probability;
    curve.points.push_back({mws[k], p, step_evaluations, cumulative, descent.levels.size() - 1, 0});
  }
  return curve;
}

FragilityCurve run_specialized_ss(const LimitStateFactory& factory,
                                  const MarginDistribution& dist, const MagnitudeGrid& grid,
                                  const SsConfig& config) {
  const std::vector<double> mws = grid.magnitudes();
  return run_specialized_ss(factory, dist, mws, config);
}

std::uint64_t interval_seed(std::uint64_t master, std::size_t interval) {
  return interval == 0 ? master : derive_seed(master, 0x1D7E2FULL, interval);
}

FragilityCurve run_divided(const LimitStateFactory& factory, const MarginDistribution& dist,
                           const MagnitudeGrid& grid, const SsConfig& config) {
  FragilityCurve out;
  out.seed = config.seed;
  std::size_t cumulative = 0;
  for (std::size_t i = 0; i < grid.intervals().size(); ++i) {
    SsConfig cfg = config;
    cfg.seed = interval_seed(config.seed, i);
    const std::vector<double> mws = grid.interval_magnitudes(i);
    FragilityCurve part;
    try {
      part = run_specialized_ss(factory, dist, mws, cfg);
    } catch (const PartialCurveError& e) {
      FragilityCurve partial = out;
      for (FragilityPoint pt : e.partial().points) {
        cumulative += pt.n_g;
        pt.n_g_cum = cumulative;
        pt.interval = i;
        partial.points.push_back(pt);
      }
      throw PartialCurveError(e.what(), partial);
    }
    out.reevaluations += part.reevaluations;
    for (FragilityPoint pt : part.points) {
      cumulative += pt.n_g;
      pt.n_g_cum = cumulative;
      pt.interval = i;
      out.points.push_back(pt);
    }
  }
  return out;
}

std::vector<FragilityCurve> multi_state_curves(const Network& network, const SeismicModel& model,
                                               const LimitStateSpec& spec,
                                               const DamageStateSet& damage_states,
                                               const MagnitudeGrid& grid, const SsConfig& config,
                                               double mw_ref) {
  damage_states.validate();
  std::vector<FragilityCurve> curves;
  for (const DamageState& ds : damage_states.states) {
    const Network damaged = network.with_capacity(ds.capacity_median, ds.capacity_log_std);
    const MarginDistribution dist = build_margin_distribution(damaged, model, mw_ref);
    const LimitStateFactory factory = make_limit_state_factory(damaged, spec, dist);
    FragilityCurve curve = run_divided(factory, dist, grid, config);
    curve.damage_state = ds.label;
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::vector<FragilityCurve> repeat_curves(const CurveRunner& runner, const SsConfig& config,
                                          std::size_t reps) {
  std::vector<FragilityCurve> curves(reps);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(reps); ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    SsConfig cfg = config;
    cfg.seed = repetition_seed(config.seed, r);
    try {
      curves[r] = runner(cfg);
    } catch (...) {
#pragma omp critical(seisnet_curve_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return curves;
}

namespace {

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace

std::vector<CurveStatistics> curve_statistics(std::span<const FragilityCurve> curves) {
  std::vector<CurveStatistics> out;
  if (curves.empty()) return out;
  const std::size_t points = curves.front().points.size();
  const double count = static_cast<double>(curves.size());
  for (std::size_t k = 0; k < points; ++k) {
    CurveStatistics s;
    s.mw = curves.front().points[k].mw;
    std::vector<double> values;
    values.reserve(curves.size());
    for (const auto& c : curves) {
      if (c.points.size() != points) {
        throw InvalidArgumentError("curves do not share a magnitude grid");
      }
      values.push_back(c.points[k].p_hat);
      s.mean_n_g += static_cast<double>(c.points[k].n_g);
      s.mean_n_g_cum += static_cast<double>(c.points[k].n_g_cum);
    }
    for (const double v : values) s.mean_p += v;
    s.mean_p /= count;
    s.mean_n_g /= count;
    s.mean_n_g_cum /= count;
    if (curves.size() >= 2) {
      double ss = 0.0;
      for (const double v : values) ss += (v - s.mean_p) * (v - s.mean_p);
      s.cov = s.mean_p > 0.0 ? std::sqrt(ss / (count - 1.0)) / s.mean_p : 0.0;
    }
    s.p_lo = percentile(values, 0.025);
    s.p_hi = percentile(values, 0.975);
    out.push_back(s);
  }
  return out;
}

}  // namespace seisnet
