#pragma once

#include "remeasure/model.hpp"

namespace remeasure {

/// Joint Gaussian log-likelihood of the remeasurement model.
///
/// Kept in the unscaled form
///   -n1' log s1^2 - n1' log s2^2 - n1' log(1-rho^2) - Q_pair / (1-rho^2)
///   - (n1-n1') log s1^2 - sum_rest (e/s1)^2 - n2 log s2^2 - sum_T2 (e/s2)^2
/// i.e. twice the usual log-density without the 2*pi constant.
double log_likelihood(const Dataset& data, const ParameterVector& theta);

/// Block means and residual cross-products that drive every coordinate update.
struct SufficientStats {
  double r1 = 0.0;       // mean over S1 of y - z'b
  double r2 = 0.0;       // mean over T2 of y - z'b
  double r3 = 0.0;       // mean over C2 of y - z'b
  double w_s1 = 0.0;     // sum over S1 of (y - mu1)^2
  double w_c2 = 0.0;     // sum over C2 of (y - mu3)^2
  double w_cross = 0.0;  // sum over pairs of (y - mu1)(y' - mu3)
  double w_rest = 0.0;   // sum over C1\S1 of (y - mu1)^2
  double w_t2 = 0.0;     // sum over T2 of (y - mu2)^2
};

SufficientStats sufficient_stats(const Dataset& data, const ParameterVector& theta);

/// Analytic gradient of log_likelihood, ordered (a0, a1, b..., rho, sigma1, sigma2).
VectorXd score(const Dataset& data, const ParameterVector& theta);

/// Packs theta in the same order as score().
VectorXd pack(const ParameterVector& theta);
ParameterVector unpack(const VectorXd& v, Index p);

}  // namespace remeasure
