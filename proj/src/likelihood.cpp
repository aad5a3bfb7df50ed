#include "remeasure/likelihood.hpp"

#include <cmath>

namespace remeasure {

namespace {

// Residual vectors for each block at theta.
struct Residuals {
  VectorXd s1, rest, t2, c2;
};

Residuals residuals(const Dataset& data, const ParameterVector& theta) {
  if (theta.b.size() != data.p()) throw InputError("coefficient vector length differs from p");
  Residuals r;
  r.s1 = data.y_s1() - data.z_s1() * theta.b;
  r.rest = data.y_rest() - data.z_rest() * theta.b;
  r.t2 = (data.y_t2() - data.z_t2() * theta.b).array() - (theta.a0 + theta.a1);
  r.c2 = (data.y_c2() - data.z_c2() * theta.b).array() - theta.a1;
  return r;
}

}  // namespace

double log_likelihood(const Dataset& data, const ParameterVector& theta) {
  const auto r = residuals(data, theta);
  const double n1 = static_cast<double>(data.n1());
  const double n2 = static_cast<double>(data.n2());
  const double np = static_cast<double>(data.n1_prime());
  const double s1 = theta.sigma1, s2 = theta.sigma2, rho = theta.rho;
  const double om = 1.0 - rho * rho;

  const double uu = r.s1.squaredNorm() / (s1 * s1);
  const double vv = r.c2.squaredNorm() / (s2 * s2);
  const double uv = r.s1.dot(r.c2) / (s1 * s2);

  double l = -np * std::log(s1 * s1) - np * std::log(s2 * s2) - np * std::log(om);
  l -= (uu - 2.0 * rho * uv + vv) / om;
  l -= (n1 - np) * std::log(s1 * s1) + r.rest.squaredNorm() / (s1 * s1);
  l -= n2 * std::log(s2 * s2) + r.t2.squaredNorm() / (s2 * s2);
  return l;
}

SufficientStats sufficient_stats(const Dataset& data, const ParameterVector& theta) {
  const auto r = residuals(data, theta);
  SufficientStats st;
  const auto np = data.n1_prime();
  if (np > 0) {
    st.r1 = r.s1.mean();
    st.r3 = r.c2.mean() + theta.a1;
  }
  st.r2 = r.t2.mean() + theta.a0 + theta.a1;
  st.w_s1 = r.s1.squaredNorm();
  st.w_c2 = r.c2.squaredNorm();
  st.w_cross = r.s1.dot(r.c2);
  st.w_rest = r.rest.squaredNorm();
  st.w_t2 = r.t2.squaredNorm();
  return st;
}

VectorXd score(const Dataset& data, const ParameterVector& theta) {
  const auto r = residuals(data, theta);
  const Index p = data.p();
  const double n1 = static_cast<double>(data.n1());
  const double n2 = static_cast<double>(data.n2());
  const double np = static_cast<double>(data.n1_prime());
  const double s1 = theta.sigma1, s2 = theta.sigma2, rho = theta.rho;
  const double om = 1.0 - rho * rho;

  const VectorXd u = r.s1 / s1;
  const VectorXd v = r.c2 / s2;
  const double uu = u.squaredNorm(), vv = v.squaredNorm(), uv = u.dot(v);
  const double q = uu - 2.0 * rho * uv + vv;

  // d(-Q/om)/du_i = -(2u_i - 2 rho v_i)/om, similarly for v.
  const VectorXd du = (2.0 * (u - rho * v)) / om;
  const VectorXd dv = (2.0 * (v - rho * u)) / om;

  VectorXd g(p + 5);
  g(0) = 2.0 * r.t2.sum() / (s2 * s2);
  g(1) = g(0) + dv.sum() / s2;
  g.segment(2, p) = data.z_s1().transpose() * du / s1 + data.z_c2().transpose() * dv / s2 +
                    2.0 * data.z_rest().transpose() * r.rest / (s1 * s1) +
                    2.0 * data.z_t2().transpose() * r.t2 / (s2 * s2);
  g(p + 2) = 2.0 * np * rho / om + 2.0 * uv / om - 2.0 * rho * q / (om * om);
  g(p + 3) = -2.0 * n1 / s1 + (2.0 * uu - 2.0 * rho * uv) / (s1 * om) +
             2.0 * r.rest.squaredNorm() / (s1 * s1 * s1);
  g(p + 4) = -2.0 * (np + n2) / s2 + (2.0 * vv - 2.0 * rho * uv) / (s2 * om) +
             2.0 * r.t2.squaredNorm() / (s2 * s2 * s2);
  return g;
}

VectorXd pack(const ParameterVector& theta) {
  const Index p = theta.b.size();
  VectorXd v(p + 5);
  v(0) = theta.a0;
  v(1) = theta.a1;
  v.segment(2, p) = theta.b;
  v(p + 2) = theta.rho;
  v(p + 3) = theta.sigma1;
  v(p + 4) = theta.sigma2;
  return v;
}

ParameterVector unpack(const VectorXd& v, Index p) {
  ParameterVector t;
  t.a0 = v(0);
  t.a1 = v(1);
  t.b = v.segment(2, p);
  t.rho = v(p + 2);
  t.sigma1 = v(p + 3);
  t.sigma2 = v(p + 4);
  return t;
}

}  // namespace remeasure
