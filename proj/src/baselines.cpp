#include "remeasure/baselines.hpp"

#include <cmath>

namespace remeasure {

namespace {

double sample_sd(const VectorXd& v) {
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

// [indicator | z] over the given row blocks.
MatrixXd with_indicator(const MatrixXd& z, const VectorXd& indicator) {
  MatrixXd x(z.rows(), z.cols() + 1);
  x.col(0) = indicator;
  x.rightCols(z.cols()) = z;
  return x;
}

TestResult controls_vs_cases(const VectorXd& y_ctrl, const MatrixXd& z_ctrl, const Dataset& data,
                             const char* method) {
  const Index nc = y_ctrl.size(), n2 = data.n2();
  VectorXd y(nc + n2);
  y << y_ctrl, data.y_t2();
  MatrixXd z(nc + n2, data.p());
  z << z_ctrl, data.z_t2();
  VectorXd x = VectorXd::Zero(nc + n2);
  x.tail(n2).setOnes();
  return t_test(ols(with_indicator(z, x), y), 0, method);
}

}  // namespace

TestResult fit_batch2(const Dataset& data) {
  if (data.n1_prime() < 1) throw InputError("no controls in batch 2");
  return controls_vs_cases(data.y_c2(), data.z_c2(), data, "batch2");
}

TestResult fit_ignore(const Dataset& data) {
  return controls_vs_cases(data.y_c1(), data.z_c1(), data, "ignore");
}

TestResult fit_naive(const Dataset& data) {
  if (data.n1_prime() < 1) throw InputError("x and batch collinear");
  const Index n = data.design().n_rows();
  MatrixXd x(n, data.p() + 2);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = data.group(i);
    x(i, 1) = data.batch(i) == 2 ? 1.0 : 0.0;
  }
  x.rightCols(data.p()) = data.z();
  return t_test(ols(x, data.y(), "x and batch collinear"), 0, "naive");
}

VectorXd location_scale_adjust(const Dataset& data, bool use_all_controls) {
  if (data.n1_prime() < 2) throw InputError("location-scale matching needs at least two remeasured samples");
  if (use_all_controls && data.n1() < 2) throw InputError("location-scale matching needs n1 >= 2");
  const VectorXd c1 = data.y_c1(), s1 = data.y_s1(), c2 = data.y_c2();
  const double sd1 = sample_sd(use_all_controls ? c1 : s1);
  const double sd2 = sample_sd(c2);
  if (!(sd1 > 0.0) || !(sd2 > 0.0)) throw NumericalError("zero sample SD");
  const double m_c1 = c1.mean();
  return ((sd2 / sd1) * (c1.array() - m_c1) + m_c1 + c2.mean() - s1.mean()).matrix();
}

TestResult fit_ls(const Dataset& data) {
  return controls_vs_cases(location_scale_adjust(data, false), data.z_c1(), data, "ls");
}

TestResult fit_lsind(const Dataset& data) {
  return controls_vs_cases(location_scale_adjust(data, true), data.z_c1(), data, "lsind");
}

}  // namespace remeasure
