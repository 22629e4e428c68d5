#include "seisnet/sampler.hpp"

#include "seisnet/error.hpp"

#include <cmath>
#include <exception>

namespace seisnet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0xD1B54A32D192ED03ULL));
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(derive_seed(seed, stream, 0x5EEDULL)) {}

std::size_t RngStream::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

void RngStream::fill_normal(Eigen::Ref<Eigen::VectorXd> out) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = normal_(engine_);
}

GaussianMap::GaussianMap(Eigen::VectorXd mu, const Eigen::MatrixXd& covariance)
    : mu_(std::move(mu)) {
  if (covariance.rows() != mu_.size() || covariance.cols() != mu_.size()) {
    throw DimensionMismatchError("covariance does not match mean dimension");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedCorrelationError("covariance is not positive definite");
  }
  chol_ = llt.matrixL();
}

GaussianMap::GaussianMap(const MarginDistribution& dist, double mw)
    : GaussianMap(dist.mean_at(mw), dist.covariance()) {}

void GaussianMap::map_into(const Eigen::VectorXd& u, Eigen::VectorXd& z) const {
  z.noalias() = chol_.triangularView<Eigen::Lower>() * u;
  z += mu_;
}

GaussianMap GaussianMap::with_mean(Eigen::VectorXd mu) const {
  if (mu.size() != mu_.size()) throw DimensionMismatchError("mean dimension changed");
  GaussianMap copy;
  copy.mu_ = std::move(mu);
  copy.chol_ = chol_;
  return copy;
}

std::vector<ChainState> sample_unconditional(const GaussianMap& map, std::size_t n,
                                             RngStream& rng, LimitStateFn* limit_state) {
  const auto dim = static_cast<Eigen::Index>(map.dim());
  std::vector<ChainState> states(n);
  for (std::size_t j = 0; j < n; ++j) {
    ChainState& s = states[j];
    s.u.resize(dim);
    rng.fill_normal(s.u);
    map.map_into(s.u, s.z);
    s.g = limit_state ? (*limit_state)(as_span(s.z)) : std::nan("");
    s.chain = j;
  }
  return states;
}

namespace {

// One rotation step from `from` into `to`; `p` is scratch momentum.  Rejected
// proposals copy `from` back, so `to` always holds the chain's next state.
bool advance(const GaussianMap& map, const ChainState& from, ChainState& to, Eigen::VectorXd& p,
             LimitStateFn& limit_state, double threshold, double t_f, RngStream& rng) {
  rng.fill_normal(p);
  to.u = std::cos(t_f) * from.u + std::sin(t_f) * p;
  map.map_into(to.u, to.z);
  to.g = limit_state(as_span(to.z));
  to.chain = from.chain;
  if (to.g <= threshold) return true;
  to.u = from.u;
  to.z = from.z;
  to.g = from.g;
  return false;
}

}  // namespace

StepResult hmc_conditional_step(const GaussianMap& map, const ChainState& state,
                                LimitStateFn& limit_state, double threshold, double t_f,
                                RngStream& rng) {
  Eigen::VectorXd p(state.u.size());
  StepResult out;
  out.accepted = advance(map, state, out.state, p, limit_state, threshold, t_f, rng);
  return out;
}

PopulateResult populate_level(const GaussianMap& map, std::span<const ChainState> seeds,
                              std::size_t n, const LimitStateFn& limit_state, double threshold,
                              double t_f, std::uint64_t seed, std::uint64_t level_tag,
                              std::vector<ChainState> storage) {
  if (seeds.empty()) throw CannotAdvanceLevelError("no seed states to grow the next level from");
  const std::size_t chains = seeds.size();
  const std::size_t base = n / chains;
  const std::size_t extra = n % chains;

  std::vector<std::size_t> offset(chains + 1, 0);
  for (std::size_t c = 0; c < chains; ++c) offset[c + 1] = offset[c] + base + (c < extra ? 1 : 0);

  PopulateResult result;
  result.states = std::move(storage);
  result.states.resize(offset[chains]);
  std::size_t evaluations = 0;
  std::size_t accepted = 0;
  std::exception_ptr failure;

#pragma omp parallel
  {
    LimitStateFn local = limit_state;
#pragma omp for schedule(static) reduction(+ : evaluations, accepted)
    for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(chains); ++ci) {
      const auto c = static_cast<std::size_t>(ci);
      const std::size_t begin = offset[c];
      const std::size_t end = offset[c + 1];
      if (begin == end) continue;
      try {
        RngStream rng(seed, derive_seed(level_tag, c));
        Eigen::VectorXd p(static_cast<Eigen::Index>(map.dim()));
        result.states[begin] = seeds[c];
        result.states[begin].chain = c;
        for (std::size_t j = begin + 1; j < end; ++j) {
          if (advance(map, result.states[j - 1], result.states[j], p, local, threshold, t_f, rng)) {
            ++accepted;
          }
          ++evaluations;
        }
      } catch (...) {
#pragma omp critical(seisnet_populate_error)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  result.evaluations = evaluations;
  result.accepted = accepted;
  return result;
}

}  // namespace seisnet
