#include "support.hpp"

#include "seisnet/error.hpp"
#include "seisnet/normal.hpp"

#include <doctest.h>

#include <cmath>

using namespace seisnet;

namespace {

Component bridge(const std::string& id, Point p, double median = 0.98, double zeta = 0.69) {
  return {id, p, median, zeta, false, {}};
}

}  // namespace

TEST_CASE("ln mean PGA at hand-evaluated points") {
  const double r2h2 = 3.46 * 3.46 + 1.35 * 1.35;
  CHECK(ln_mean_pga(3.46, 4.5) ==
        doctest::Approx(-0.5265 - 0.0115 * std::sqrt(r2h2) - 0.3303 * std::log(r2h2)));
  CHECK(ln_mean_pga(3.46, 4.5) == doctest::Approx(-1.4359983).epsilon(1e-7));
  CHECK(ln_mean_pga(3.46, 5.0) == doctest::Approx(-1.3574).epsilon(1e-4));
  CHECK(ln_mean_pga(9.28, 7.0) == doctest::Approx(-1.4426).epsilon(1e-4));
  CHECK(ln_mean_pga_magnitude_slope(3.46) == doctest::Approx(0.0599 * std::log(r2h2)));
}

TEST_CASE("intra-event correlation decays from one") {
  CHECK(intra_event_correlation(0.0) == 1.0);
  CHECK(intra_event_correlation(11.12) == doctest::Approx(0.4928).epsilon(1e-4));
  double previous = 1.0;
  for (double d = 0.5; d < 500.0; d *= 1.7) {
    const double rho = intra_event_correlation(d);
    CHECK(rho < previous);
    CHECK(rho > 0.0);
    previous = rho;
  }
  CHECK(intra_event_correlation(1e6) < 1e-10);
}

TEST_CASE("reliability index and its degenerate cases") {
  const SeismicModel model;
  const Component c = bridge("1", {3.46, 0.0});
  const double beta = reliability_index(c, -1.3574022, model);
  CHECK(beta == doctest::Approx(1.4966).epsilon(1e-4));
  CHECK(std_normal_cdf(-beta) == doctest::Approx(0.0672).epsilon(1e-3));
  CHECK(reliability_index(c, std::log(0.98), model) == doctest::Approx(0.0));

  SeismicModel zero = model;
  zero.sigma_eta = 0.0;
  zero.sigma_eps = 0.0;
  CHECK_THROWS_AS(reliability_index(bridge("x", {}, 1.0, 0.0), 0.0, zero),
                  DegenerateVarianceError);
  CHECK(margin_std(0.69, model) == doctest::Approx(std::sqrt(0.798329)).epsilon(1e-9));
}

TEST_CASE("margin correlation closed form") {
  const SeismicModel model;
  const Component a = bridge("1", {3.46, 0.0});
  const Component b = bridge("2", {-3.6942774566, 8.5129732804});
  CHECK(margin_correlation(a, a, true, model) == doctest::Approx(1.0));
  CHECK(distance_km(a.position, b.position) == doctest::Approx(11.12).epsilon(1e-8));
  CHECK(margin_correlation(a, b, false, model) == doctest::Approx(0.2435).epsilon(1e-3));
  const Component far = bridge("3", {1e6, 0.0});
  CHECK(margin_correlation(a, far, false, model) ==
        doctest::Approx(0.070225 / 0.798329).epsilon(1e-6));
}

TEST_CASE("approximate reliability index and correlation") {
  const SeismicModel model;
  const double ld = ln_mean_pga(3.46, 5.0);
  const Component rigid = bridge("r", {3.46, 0.0}, 0.98, 0.0);
  CHECK(approx_reliability_index(0.98, 0.0, ld, model) ==
        doctest::Approx(reliability_index(rigid, ld, model)));

  // mean of the lognormal capacity, with delta taken equal to zeta
  const double mean = 0.98 * std::exp(0.5 * 0.69 * 0.69);
  const double exact = reliability_index(bridge("1", {3.46, 0.0}), ld, model);
  CHECK(std::abs(approx_reliability_index(mean, 0.69, ld, model) - exact) < 0.05 * exact);
  // the exact lognormal c.o.v. is further off: the first-order form is only
  // accurate for small dispersion
  const double cov = std::sqrt(std::exp(0.69 * 0.69) - 1.0);
  CHECK(approx_reliability_index(mean, cov, ld, model) < exact);
  CHECK(approx_margin_correlation(0.3, 0.3, 0.0, true, model) == doctest::Approx(1.0));
}

TEST_CASE("margin distribution of the two-component system") {
  const Scenario s = two_component_system(SystemKind::parallel);
  const MarginDistribution d = build_margin_distribution(s.network, s.model, 5.0);
  REQUIRE(d.dim() == 2);
  CHECK(d.ids == std::vector<std::string>{"1", "2"});
  CHECK(d.mu(0) == doctest::Approx(1.3372).epsilon(1e-3));
  // direct evaluation at R2 = 9.28 km; see the design notes in the README
  CHECK(d.mu(1) == doctest::Approx(1.9587).epsilon(1e-3));
  CHECK(d.corr(0, 1) == doctest::Approx(0.2435279).epsilon(1e-6));
  CHECK(d.corr(0, 0) == 1.0);
  CHECK(d.corr(1, 1) == 1.0);
  CHECK(d.jitter == 0.0);
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(d.sigma(i) * d.sigma(i) == doctest::Approx(0.69 * 0.69 + 0.265 * 0.265 + 0.502 * 0.502));
  }
  const Eigen::VectorXd beta = d.reliability_indices(5.0);
  CHECK(beta(0) == doctest::Approx(1.4965984).epsilon(1e-6));
}

TEST_CASE("single-component distribution is one-by-one") {
  const Network net({bridge("only", {2.0, 0.0})}, {});
  const MarginDistribution d = build_margin_distribution(net, SeismicModel{}, 6.0);
  CHECK(d.corr.rows() == 1);
  CHECK(d.corr(0, 0) == 1.0);
}

TEST_CASE("margin shift is linear in magnitude and leaves correlation alone") {
  const Scenario s = two_component_system(SystemKind::parallel);
  const MarginDistribution d = build_margin_distribution(s.network, s.model, 7.0);
  CHECK(d.margin_shift(0.0).isZero());
  CHECK(d.margin_shift(-0.5)(0) == doctest::Approx(0.0786).epsilon(1e-4));
  CHECK((d.margin_shift(-0.5).array() > 0.0).all());
  CHECK((d.margin_shift(0.7) + d.margin_shift(-0.7)).isZero());
  const Eigen::VectorXd diff = d.mean_at(5.5) - d.mean_at(7.0);
  CHECK((diff - d.margin_shift(-1.5)).cwiseAbs().maxCoeff() < 1e-14);

  const MarginDistribution d3 = build_margin_distribution(s.network, s.model, 3.0);
  CHECK(d3.corr == d.corr);  // bit-equal
  CHECK(d3.sigma == d.sigma);
  CHECK((d3.mu - d.mean_at(3.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("correlation repair adds bounded jitter") {
  Eigen::MatrixXd ok = Eigen::MatrixXd::Identity(3, 3);
  CHECK(repair_correlation(ok) == 0.0);

  // rank-deficient: one eigenvalue is zero up to rounding
  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  const double jitter = repair_correlation(singular);
  CHECK(jitter > 0.0);
  CHECK(jitter <= 1e-8);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(singular).info() == Eigen::Success);

  Eigen::MatrixXd bad(3, 3);
  bad << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
  CHECK_THROWS_AS(repair_correlation(bad), IllConditionedCorrelationError);
}

TEST_CASE("closed-form correlation matches direct simulation of the residuals") {
  const auto check = testing::margin_correlation_match(17, 400'000);
  INFO(check.detail);
  CHECK(check.ok);
}

TEST_CASE("model validation") {
  SeismicModel m;
  m.sigma_eta = 0.0;
  CHECK_THROWS_AS(m.validate(), InvalidArgumentError);
  m = SeismicModel{};
  m.gmpe.h_km = -1.0;
  CHECK_THROWS_AS(m.validate(), InvalidArgumentError);
}
