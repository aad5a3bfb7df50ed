#include "remeasure/regression.hpp"

#include <gsl/gsl_cdf.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "remeasure/error.hpp"
#include "remeasure/model.hpp"

namespace remeasure {

OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& rank_message) {
  if (x.rows() != y.size()) throw InputError("ols: row count mismatch");
  if (!has_full_column_rank(x)) throw InputError(rank_message);
  const double df = static_cast<double>(x.rows() - x.cols());
  if (df < 1.0) throw InputError("ols: no residual degrees of freedom");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  OlsFit fit;
  fit.coef = qr.solve(y);
  fit.df = df;
  fit.sigma2 = (y - x * fit.coef).squaredNorm() / df;
  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  fit.std_error = (fit.sigma2 * xtx_inv.diagonal().array()).sqrt();
  return fit;
}

TestResult t_test(const OlsFit& fit, Eigen::Index j, std::string method) {
  TestResult r;
  r.estimate = fit.coef(j);
  r.std_error = fit.std_error(j);
  r.df = fit.df;
  r.method = std::move(method);
  if (r.std_error > 0.0) {
    r.statistic = r.estimate / r.std_error;
    r.p_value = two_sided_t_p(r.statistic, fit.df);
  } else {
    // Perfect fit: any nonzero effect is certain, a zero one is not evidence.
    r.statistic = r.estimate == 0.0 ? 0.0 : std::copysign(INFINITY, r.estimate);
    r.p_value = r.estimate == 0.0 ? 1.0 : 0.0;
  }
  return r;
}

double normal_cdf(double x) { return gsl_cdf_ugaussian_P(x); }

double normal_quantile(double p) { return gsl_cdf_ugaussian_Pinv(p); }

double two_sided_normal_p(double z) {
  if (std::isnan(z)) return 1.0;
  return std::min(1.0, 2.0 * gsl_cdf_ugaussian_P(-std::abs(z)));
}

double two_sided_t_p(double t, double df) {
  if (std::isnan(t)) return 1.0;
  return std::min(1.0, 2.0 * gsl_cdf_tdist_Q(std::abs(t), df));
}

std::vector<double> bh_adjust(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] > p_values[b]; });
  std::vector<double> q(m);
  double running = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t rank = m - k;  // 1-based rank in ascending order
    const double v = p_values[order[k]] * static_cast<double>(m) / static_cast<double>(rank);
    running = std::min(running, v);
    q[order[k]] = running;
  }
  return q;
}

}  // namespace remeasure
