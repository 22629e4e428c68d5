#include "seisnet/reference.hpp"

#include "seisnet/error.hpp"
#include "seisnet/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <numbers>

namespace seisnet {

namespace {

std::size_t batch_failures(LimitStateFn& g, const GaussianMap& map, std::uint64_t seed,
                           std::size_t batch_index, std::size_t count) {
  RngStream rng(seed, batch_index);
  Eigen::VectorXd u(static_cast<Eigen::Index>(map.dim()));
  Eigen::VectorXd z(u.size());
  std::size_t failures = 0;
  for (std::size_t j = 0; j < count; ++j) {
    rng.fill_normal(u);
    map.map_into(u, z);
    if (g(as_span(z)) <= 0.0) ++failures;
  }
  return failures;
}

McsResult finish(std::size_t failures, std::size_t n, std::uint64_t seed) {
  McsResult r;
  r.failures = failures;
  r.n_used = n;
  r.seed = seed;
  r.p_hat = n == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(n);
  r.standard_error = n == 0 ? 0.0 : std::sqrt(r.p_hat * (1.0 - r.p_hat) / static_cast<double>(n));
  return r;
}

// Runs batches [first, last) and returns the failure count.
template <bool Parallel>
std::size_t run_batches(const LimitStateFn& limit_state, const GaussianMap& map,
                        std::uint64_t seed, std::size_t first, std::size_t last,
                        std::size_t batch, std::size_t n_total) {
  std::size_t failures = 0;
  if constexpr (Parallel) {
    std::exception_ptr failure;
#pragma omp parallel
    {
      LimitStateFn local = limit_state;
#pragma omp for schedule(dynamic) reduction(+ : failures)
      for (std::ptrdiff_t bi = static_cast<std::ptrdiff_t>(first);
           bi < static_cast<std::ptrdiff_t>(last); ++bi) {
        const auto b = static_cast<std::size_t>(bi);
        const std::size_t count = std::min(batch, n_total - b * batch);
        try {
          failures += batch_failures(local, map, seed, b, count);
        } catch (...) {
#pragma omp critical(seisnet_mcs_error)
          if (!failure) failure = std::current_exception();
        }
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    LimitStateFn local = limit_state;
    for (std::size_t b = first; b < last; ++b) {
      const std::size_t count = std::min(batch, n_total - b * batch);
      failures += batch_failures(local, map, seed, b, count);
    }
  }
  return failures;
}

template <bool Parallel>
McsResult crude_mcs_impl(const LimitStateFn& limit_state, const GaussianMap& map,
                         const McsTarget& target, std::uint64_t seed) {
  if (target.batch == 0) throw InvalidArgumentError("MCS batch size must be positive");
  if (target.n) {
    const std::size_t n = *target.n;
    if (n == 0) throw InvalidArgumentError("MCS sample size must be positive");
    const std::size_t batches = (n + target.batch - 1) / target.batch;
    return finish(run_batches<Parallel>(limit_state, map, seed, 0, batches, target.batch, n), n,
                  seed);
  }
  if (!target.cov || !(*target.cov > 0.0)) {
    throw InvalidArgumentError("MCS target needs n or a positive c.o.v.");
  }
  const std::size_t round = target.batch * std::max<std::size_t>(1, target.batches_per_round);
  std::size_t failures = 0;
  std::size_t used = 0;
  std::size_t next_batch = 0;
  for (;;) {
    const std::size_t n_total = std::min(target.cap, used + round);
    if (n_total <= used) break;
    const std::size_t last_batch = (n_total + target.batch - 1) / target.batch;
    failures += run_batches<Parallel>(limit_state, map, seed, next_batch, last_batch,
                                      target.batch, n_total);
    used = n_total;
    next_batch = last_batch;
    const McsResult r = finish(failures, used, seed);
    if (failures > 0 && r.cov() <= *target.cov) return r;
    if (used >= target.cap) break;
  }
  McsResult r = finish(failures, used, seed);
  r.cap_reached = true;
  return r;
}

}  // namespace

McsResult crude_mcs(const LimitStateFn& limit_state, const GaussianMap& map,
                    const McsTarget& target, std::uint64_t seed) {
  return crude_mcs_impl<true>(limit_state, map, target, seed);
}

McsResult crude_mcs_serial(const LimitStateFn& limit_state, const GaussianMap& map,
                           const McsTarget& target, std::uint64_t seed) {
  return crude_mcs_impl<false>(limit_state, map, target, seed);
}

std::vector<McsResult> crude_mcs_sweep(const LimitStateFn& limit_state,
                                       const MarginDistribution& dist,
                                       std::span<const double> mws, std::size_t n,
                                       std::uint64_t seed, std::size_t batch) {
  if (n == 0 || batch == 0) throw InvalidArgumentError("MCS sample and batch size must be positive");
  const GaussianMap map(dist, dist.mw_ref);
  std::vector<Eigen::VectorXd> shifts;
  for (const double mw : mws) shifts.push_back(dist.margin_shift(mw - dist.mw_ref));
  const std::size_t m = mws.size();
  const std::size_t batches = (n + batch - 1) / batch;
  std::vector<std::size_t> failures(m, 0);
  std::exception_ptr failure;

#pragma omp parallel
  {
    LimitStateFn local = limit_state;
    std::vector<std::size_t> mine(m, 0);
    Eigen::VectorXd u(static_cast<Eigen::Index>(map.dim()));
    Eigen::VectorXd z(u.size());
    Eigen::VectorXd zk(u.size());
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(batches); ++bi) {
      const auto b = static_cast<std::size_t>(bi);
      const std::size_t count = std::min(batch, n - b * batch);
      try {
        RngStream rng(seed, b);
        for (std::size_t j = 0; j < count; ++j) {
          rng.fill_normal(u);
          map.map_into(u, z);
          for (std::size_t k = 0; k < m; ++k) {
            zk = z + shifts[k];
            if (local(as_span(zk)) <= 0.0) ++mine[k];
          }
        }
      } catch (...) {
#pragma omp critical(seisnet_sweep_error)
        if (!failure) failure = std::current_exception();
      }
    }
#pragma omp critical(seisnet_sweep_reduce)
    for (std::size_t k = 0; k < m; ++k) failures[k] += mine[k];
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<McsResult> out;
  for (std::size_t k = 0; k < m; ++k) out.push_back(finish(failures[k], n, seed));
  return out;
}

namespace {

constexpr std::size_t kOrder = 12;
constexpr double kLowerLimit = -8.5;

struct GaussLegendre {
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};

  GaussLegendre() {
    for (std::size_t i = 0; i < kOrder; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(kOrder) + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= kOrder; ++k) {
          const double kk = static_cast<double>(k);
          const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
          p0 = p1;
          p1 = p2;
        }
        dp = static_cast<double>(kOrder) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre& rule() {
  static const GaussLegendre gl;
  return gl;
}

struct BivariateDensity {
  double rho;
  double scale;  // 1 / (2 pi sqrt(1 - rho^2))
  double inv;    // 1 / (1 - rho^2)

  explicit BivariateDensity(double r)
      : rho(r),
        scale(1.0 / (2.0 * std::numbers::pi * std::sqrt(1.0 - r * r))),
        inv(1.0 / (1.0 - r * r)) {}

  double operator()(double x, double y) const {
    return scale * std::exp(-0.5 * inv * (x * x - 2.0 * rho * x * y + y * y));
  }
};

double rectangle(const BivariateDensity& f, double x0, double x1, double y0, double y1) {
  const GaussLegendre& gl = rule();
  const double hx = 0.5 * (x1 - x0);
  const double cx = 0.5 * (x1 + x0);
  const double hy = 0.5 * (y1 - y0);
  const double cy = 0.5 * (y1 + y0);
  double sum = 0.0;
  for (std::size_t i = 0; i < kOrder; ++i) {
    const double x = cx + hx * gl.nodes[i];
    double inner = 0.0;
    for (std::size_t j = 0; j < kOrder; ++j) inner += gl.weights[j] * f(x, cy + hy * gl.nodes[j]);
    sum += gl.weights[i] * inner;
  }
  return sum * hx * hy;
}

double adaptive(const BivariateDensity& f, double x0, double x1, double y0, double y1,
                double whole, double tol, int depth) {
  const double xm = 0.5 * (x0 + x1);
  const double ym = 0.5 * (y0 + y1);
  const double q00 = rectangle(f, x0, xm, y0, ym);
  const double q01 = rectangle(f, x0, xm, ym, y1);
  const double q10 = rectangle(f, xm, x1, y0, ym);
  const double q11 = rectangle(f, xm, x1, ym, y1);
  const double refined = q00 + q01 + q10 + q11;
  if (depth >= 40 || std::abs(refined - whole) <= tol) return refined;
  const double t = 0.25 * tol;
  return adaptive(f, x0, xm, y0, ym, q00, t, depth + 1) +
         adaptive(f, x0, xm, ym, y1, q01, t, depth + 1) +
         adaptive(f, xm, x1, y0, ym, q10, t, depth + 1) +
         adaptive(f, xm, x1, ym, y1, q11, t, depth + 1);
}

}  // namespace

double bivariate_normal_cdf(double h, double k, double rho, double abs_tol) {
  if (std::abs(rho) > 1.0 - 1e-6) {
    throw NearSingularError("|rho| too close to 1 for bivariate quadrature");
  }
  const double upper = -kLowerLimit;
  h = std::min(h, upper);
  k = std::min(k, upper);
  if (h <= kLowerLimit || k <= kLowerLimit) return 0.0;
  const BivariateDensity f(rho);
  const double whole = rectangle(f, kLowerLimit, h, kLowerLimit, k);
  return adaptive(f, kLowerLimit, h, kLowerLimit, k, whole, abs_tol, 0);
}

double exact_two_component(const TwoComponentSystem& system) {
  const double both = bivariate_normal_cdf(-system.beta1, -system.beta2, system.rho);
  if (system.kind == SystemKind::parallel) return both;
  return std_normal_cdf(-system.beta1) + std_normal_cdf(-system.beta2) - both;
}

}  // namespace seisnet
