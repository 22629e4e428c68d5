#include "seisnet/normal.hpp"

#include <cmath>
#include <numbers>

namespace seisnet {

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_log_cdf(double x) {
  if (x > -30.0) return std::log(std_normal_cdf(x));
  // Asymptotic expansion; erfc underflows below about -37.
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

}  // namespace seisnet
