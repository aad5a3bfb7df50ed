#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace remeasure {

/// Effect estimate together with its test. Shared by all methods.
struct TestResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;  // z or t
  double p_value = 1.0;
  std::string method;
  int bootstrap_replicates = 0;  // 0 unless a bootstrap p-value
  double df = 0.0;               // residual df for t-tests, 0 for normal tests
};

/// Homoscedastic ordinary least squares.
struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd std_error;
  double sigma2 = 0.0;  // residual variance, RSS / df
  double df = 0.0;
};

/// Throws InputError(rank_message) when x is rank deficient or df < 1.
OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
           const std::string& rank_message = "rank deficient design");

/// Two-sided t-test on coefficient j.
TestResult t_test(const OlsFit& fit, Eigen::Index j, std::string method);

double normal_cdf(double x);
double normal_quantile(double p);
/// 2 * Phi(-|z|).
double two_sided_normal_p(double z);
/// 2 * P(T_df > |t|).
double two_sided_t_p(double t, double df);

/// Benjamini-Hochberg adjusted p-values, same order as the input.
std::vector<double> bh_adjust(std::span<const double> p_values);

}  // namespace remeasure
