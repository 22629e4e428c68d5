#pragma once

// Ground-motion model: maps an earthquake scenario and the site geometry of a
// network to the joint Gaussian distribution of logarithmic safety margins
//
//   z_i = ln C_i - ln D_i ,   z ~ N(mu(Mw), diag(sigma) R_zz diag(sigma)).
//
// Only the mean depends on the moment magnitude; sigma and R_zz do not.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace seisnet {

class Network;

struct Point {
  double x_km = 0.0;
  double y_km = 0.0;
};

double distance_km(const Point& a, const Point& b);

/// ln PGA attenuation coefficients; defaults are the Boore–Atkinson style fit
/// used for the bridge examples.
struct GmpeCoefficients {
  double c0 = -0.5265;
  double c1 = -0.0115;
  double c2 = -0.3303;
  double c3 = 0.0599;
  double h_km = 1.35;
  double reference_magnitude = 4.5;
};

/// Intra-event residual correlation rho(Delta) = exp(-a * Delta^b).
struct SpatialCorrelation {
  double a = 0.27;
  double b = 0.40;
};

struct SeismicModel {
  Point epicenter;
  double sigma_eta = 0.265;  ///< inter-event residual std (ln PGA)
  double sigma_eps = 0.502;  ///< intra-event residual std (ln PGA)
  GmpeCoefficients gmpe;
  SpatialCorrelation correlation;

  /// Throws InvalidArgumentError unless sigma_eta > 0, sigma_eps > 0, h > 0.
  void validate() const;
  [[nodiscard]] double residual_variance() const {
    return sigma_eta * sigma_eta + sigma_eps * sigma_eps;
  }
};

/// A seismically vulnerable network element with a lognormal capacity.
struct Component {
  std::string id;
  Point position;
  double capacity_median = 1.0;   ///< median capacity, g
  double capacity_log_std = 0.0;  ///< lognormal standard deviation zeta
  bool perfect = false;           ///< never fails; not part of the margin vector
  /// Unused explanatory variables of the attenuation relation, carried through
  /// for alternative models.
  std::vector<double> extra_predictors;
};

/// Mean of ln PGA at epicentral distance `r_km` for moment magnitude `mw`.
double ln_mean_pga(double r_km, double mw, const GmpeCoefficients& c = {});

/// d(ln mean PGA)/d(Mw) at epicentral distance `r_km`.
double ln_mean_pga_magnitude_slope(double r_km, const GmpeCoefficients& c = {});

double intra_event_correlation(double delta_km, const SpatialCorrelation& c = {});

/// sigma_z = sqrt(zeta^2 + sigma_eta^2 + sigma_eps^2); throws DegenerateVarianceError on zero.
double margin_std(double capacity_log_std, const SeismicModel& model);

/// beta = (ln C_median - ln D_mean) / sigma_z.  Component must not be perfect.
double reliability_index(const Component& component, double ln_mean_demand,
                         const SeismicModel& model);

/// Correlation of the safety margins of two components.  `same` selects the
/// Kronecker-delta term (i == j).
double margin_correlation(const Component& a, const Component& b, bool same,
                          const SeismicModel& model);

/// First/second-order moment approximations for non-lognormal capacities,
/// parameterized by the capacity mean and coefficient of variation.
double approx_reliability_index(double capacity_mean, double capacity_cov,
                                double ln_mean_demand, const SeismicModel& model);
double approx_margin_correlation(double capacity_cov_a, double capacity_cov_b,
                                 double delta_km, bool same, const SeismicModel& model);

struct MarginDistribution {
  std::vector<std::string> ids;         ///< non-perfect components, network order
  std::vector<std::size_t> node_index;  ///< position of each component in the network
  double mw_ref = 0.0;
  Eigen::VectorXd mu;              ///< mean margins at mw_ref
  Eigen::VectorXd sigma;           ///< margin standard deviations
  Eigen::VectorXd mw_sensitivity;  ///< d(ln D_mean)/d(Mw) per component
  Eigen::MatrixXd corr;            ///< R_zz, after jitter if any was needed
  double jitter = 0.0;             ///< diagonal jitter added during PSD repair

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(mu.size()); }
  /// Change of the mean margins for a magnitude change `delta_mw`.
  [[nodiscard]] Eigen::VectorXd margin_shift(double delta_mw) const;
  [[nodiscard]] Eigen::VectorXd mean_at(double mw) const;
  [[nodiscard]] Eigen::VectorXd reliability_indices(double mw) const;
  [[nodiscard]] Eigen::MatrixXd covariance() const;
};

/// Assembles mean, standard deviations and correlation of the margin vector.
/// Throws IllConditionedCorrelationError if R_zz needs more than 1e-8 jitter.
MarginDistribution build_margin_distribution(const Network& network, const SeismicModel& model,
                                             double mw_ref);

/// Smallest diagonal jitter in {0, 1e-12, 1e-11, ..., 1e-8} making `corr`
/// positive definite; the matrix is modified in place.
double repair_correlation(Eigen::MatrixXd& corr);

}  // namespace seisnet
