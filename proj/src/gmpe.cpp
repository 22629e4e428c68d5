#include "seisnet/gmpe.hpp"

#include "seisnet/error.hpp"
#include "seisnet/network.hpp"

#include <cmath>

namespace seisnet {

double distance_km(const Point& a, const Point& b) {
  return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
}

void SeismicModel::validate() const {
  if (!(sigma_eta > 0.0)) throw InvalidArgumentError("sigma_eta must be positive");
  if (!(sigma_eps > 0.0)) throw InvalidArgumentError("sigma_eps must be positive");
  if (!(gmpe.h_km > 0.0)) throw InvalidArgumentError("gmpe h must be positive");
}

double ln_mean_pga(double r_km, double mw, const GmpeCoefficients& c) {
  const double r2 = r_km * r_km + c.h_km * c.h_km;
  return c.c0 + c.c1 * std::sqrt(r2) + std::log(r2) * (c.c2 + c.c3 * (mw - c.reference_magnitude));
}

double ln_mean_pga_magnitude_slope(double r_km, const GmpeCoefficients& c) {
  return c.c3 * std::log(r_km * r_km + c.h_km * c.h_km);
}

double intra_event_correlation(double delta_km, const SpatialCorrelation& c) {
  return std::exp(-c.a * std::pow(delta_km, c.b));
}

double margin_std(double capacity_log_std, const SeismicModel& model) {
  const double var = capacity_log_std * capacity_log_std + model.residual_variance();
  if (!(var > 0.0)) throw DegenerateVarianceError("safety-margin variance is zero");
  return std::sqrt(var);
}

double reliability_index(const Component& component, double ln_mean_demand,
                         const SeismicModel& model) {
  if (component.perfect) {
    throw InvalidArgumentError("reliability index requested for perfect component '" +
                               component.id + "'");
  }
  return (std::log(component.capacity_median) - ln_mean_demand) /
         margin_std(component.capacity_log_std, model);
}

double margin_correlation(const Component& a, const Component& b, bool same,
                          const SeismicModel& model) {
  if (same) return 1.0;
  const double delta = distance_km(a.position, b.position);
  const double cov = model.sigma_eta * model.sigma_eta +
                     model.sigma_eps * model.sigma_eps *
                         intra_event_correlation(delta, model.correlation);
  return cov / (margin_std(a.capacity_log_std, model) * margin_std(b.capacity_log_std, model));
}

double approx_reliability_index(double capacity_mean, double capacity_cov,
                                double ln_mean_demand, const SeismicModel& model) {
  if (!(capacity_mean > 0.0)) throw InvalidArgumentError("capacity mean must be positive");
  if (capacity_cov < 0.0) throw InvalidArgumentError("capacity c.o.v. must be non-negative");
  return (std::log(capacity_mean) - 0.5 * capacity_cov * capacity_cov - ln_mean_demand) /
         margin_std(capacity_cov, model);
}

double approx_margin_correlation(double capacity_cov_a, double capacity_cov_b, double delta_km,
                                 bool same, const SeismicModel& model) {
  if (same) return 1.0;
  const double cov = model.sigma_eta * model.sigma_eta +
                     model.sigma_eps * model.sigma_eps *
                         intra_event_correlation(delta_km, model.correlation);
  return cov / (margin_std(capacity_cov_a, model) * margin_std(capacity_cov_b, model));
}

Eigen::VectorXd MarginDistribution::margin_shift(double delta_mw) const {
  return -delta_mw * mw_sensitivity;
}

Eigen::VectorXd MarginDistribution::mean_at(double mw) const {
  return mu + margin_shift(mw - mw_ref);
}

Eigen::VectorXd MarginDistribution::reliability_indices(double mw) const {
  return mean_at(mw).cwiseQuotient(sigma);
}

Eigen::MatrixXd MarginDistribution::covariance() const {
  return sigma.asDiagonal() * corr * sigma.asDiagonal();
}

double repair_correlation(Eigen::MatrixXd& corr) {
  const Eigen::MatrixXd original = corr;
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd candidate = original;
    candidate.diagonal().array() += jitter;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(candidate, Eigen::EigenvaluesOnly);
    const Eigen::LLT<Eigen::MatrixXd> llt(candidate);
    if (eig.eigenvalues().minCoeff() >= 0.0 && llt.info() == Eigen::Success) {
      corr = std::move(candidate);
      return jitter;
    }
    jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0;
    if (jitter > 1e-8 * (1.0 + 1e-9)) {
      throw IllConditionedCorrelationError(
          "margin correlation matrix is not positive definite within jitter cap 1e-8");
    }
  }
}

MarginDistribution build_margin_distribution(const Network& network, const SeismicModel& model,
                                             double mw_ref) {
  model.validate();
  const std::size_t n = network.random_count();
  if (n == 0) throw InvalidArgumentError("network has no failure-prone components");

  MarginDistribution dist;
  dist.mw_ref = mw_ref;
  dist.mu.resize(static_cast<Eigen::Index>(n));
  dist.sigma.resize(static_cast<Eigen::Index>(n));
  dist.mw_sensitivity.resize(static_cast<Eigen::Index>(n));
  dist.corr.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

  const auto random = network.random_nodes();
  for (std::size_t i = 0; i < n; ++i) {
    const Component& c = network.node(random[i]);
    const double r = distance_km(model.epicenter, c.position);
    const auto ii = static_cast<Eigen::Index>(i);
    dist.ids.push_back(c.id);
    dist.node_index.push_back(random[i]);
    dist.mu(ii) = std::log(c.capacity_median) - ln_mean_pga(r, mw_ref, model.gmpe);
    dist.sigma(ii) = margin_std(c.capacity_log_std, model);
    dist.mw_sensitivity(ii) = ln_mean_pga_magnitude_slope(r, model.gmpe);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    dist.corr(ii, ii) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double rho =
          margin_correlation(network.node(random[i]), network.node(random[j]), false, model);
      dist.corr(ii, jj) = rho;
      dist.corr(jj, ii) = rho;
    }
  }
  dist.jitter = repair_correlation(dist.corr);
  return dist;
}

}  // namespace seisnet
