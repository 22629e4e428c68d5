#pragma once

namespace seisnet {

double std_normal_pdf(double x);
double std_normal_cdf(double x);
/// ln Phi(x), accurate in the far lower tail.
double std_normal_log_cdf(double x);

}  // namespace seisnet
