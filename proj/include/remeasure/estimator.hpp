#pragma once

#include <optional>
#include <vector>

#include "remeasure/likelihood.hpp"
#include "remeasure/model.hpp"

namespace remeasure {

enum class InitStrategy {
  kLeastSquares,  // OLS on C1 u T2 with a group indicator, per-batch SDs, paired-residual correlation
  kWarmStart,     // caller supplies theta
};

struct FitConfig {
  double tol_loglik = 1e-10;  // relative change in log-likelihood
  double tol_score = 1e-6;    // max |score| accepted as converged
  int max_iter = 500;
  double rho_clip = 1e-4;     // rho kept in [-1 + clip, 1 - clip]
  InitStrategy init = InitStrategy::kLeastSquares;
  bool record_trace = false;  // keep the log-likelihood after every sweep

  void check() const;
};

struct FitResult {
  ParameterVector theta;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_score = 0.0;            // max |score| at theta
  std::vector<double> loglik_trace;  // filled when FitConfig::record_trace
};

/// Linear system S b = t whose solution maximizes the log-likelihood over b
/// with (a0, a1) profiled out, for fixed (rho, sigma1, sigma2).
struct CoefficientSystem {
  MatrixXd s;
  VectorXd t;
};

struct Location {
  double a0 = 0.0;
  double a1 = 0.0;
};

/// a1 = R3 - (rho s2 / s1) R1 and a0 = R2 - a1.
Location update_location(const SufficientStats& stats, double rho, double sigma1, double sigma2);

/// Maximizer of the rho-profile among the real roots of
///   n1' rho (1 - rho^2) = rho (W_S1/s1^2 + W_C2/s2^2) - (1 + rho^2) W_cross / (s1 s2)
/// lying in [-1 + clip, 1 - clip].
double solve_rho(const SufficientStats& stats, double sigma1, double sigma2, Index n1_prime,
                 double rho_clip = 1e-4);

/// Positive root of n1 (1-rho^2) s1^2 + (rho W_cross / s2) s1 - [W_S1 + (1-rho^2) W_rest] = 0.
double solve_sigma1(const SufficientStats& stats, double rho, double sigma2, Index n1);

/// Positive root of (n1'+n2)(1-rho^2) s2^2 + (rho W_cross / s1) s2 - [W_C2 + (1-rho^2) W_T2] = 0.
double solve_sigma2(const SufficientStats& stats, double rho, double sigma1, Index n1_prime,
                    Index n2);

CoefficientSystem coefficient_system(const Dataset& data, double rho, double sigma1,
                                     double sigma2);

/// Solves the coefficient system by Cholesky.
VectorXd update_b(const Dataset& data, double rho, double sigma1, double sigma2);

/// Starting point used by InitStrategy::kLeastSquares.
ParameterVector initial_estimate(const Dataset& data, const FitConfig& config = {});

/// Alternating coordinate ascent: rho, sigma1, sigma2, (a0, a1), b until the
/// relative log-likelihood change and the score both fall below tolerance.
FitResult fit_mle(const Dataset& data, const FitConfig& config = {},
                  const std::optional<ParameterVector>& start = std::nullopt);

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 (c3 != 0), ascending.
std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0);

}  // namespace remeasure
