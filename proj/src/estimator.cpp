#include "remeasure/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace remeasure {

void FitConfig::check() const {
  if (!(tol_loglik > 0.0) || !(tol_score > 0.0)) throw InputError("fit config: tolerances must be > 0");
  if (max_iter < 1) throw InputError("fit config: max_iter must be >= 1");
  if (!(rho_clip > 0.0 && rho_clip < 0.5)) throw InputError("fit config: rho_clip must lie in (0, 0.5)");
}

Location update_location(const SufficientStats& stats, double rho, double sigma1, double sigma2) {
  Location loc;
  loc.a1 = stats.r3 - rho * sigma2 / sigma1 * stats.r1;
  loc.a0 = stats.r2 - loc.a1;
  return loc;
}

std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0) {
  const double b = c2 / c3, c = c1 / c3, d = c0 / c3;
  const double shift = -b / 3.0;
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double disc = q * q / 4.0 + p * p * p / 27.0;

  std::vector<double> roots;
  if (p == 0.0 && q == 0.0) {
    roots.push_back(shift);
  } else if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + sq);
    const double v = std::cbrt(-q / 2.0 - sq);
    roots.push_back(u + v + shift);
    // The conjugate pair -(u+v)/2 +- i sqrt(3)/2 (u-v) counts as real when
    // its imaginary part is negligible.
    if (std::sqrt(3.0) / 2.0 * std::abs(u - v) < 1e-9) roots.push_back(-(u + v) / 2.0 + shift);
  } else {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots.push_back(m * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift);
  }

  // Newton polish; the closed forms lose digits near multiple roots.
  for (auto& x : roots) {
    for (int it = 0; it < 3; ++it) {
      const double f = ((c3 * x + c2) * x + c1) * x + c0;
      const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
      if (df == 0.0) break;
      const double step = f / df;
      if (!std::isfinite(step) || std::abs(step) > 1e-6 * (1.0 + std::abs(x))) break;
      x -= step;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

namespace {

double rho_profile(double rho, double a, double c, double np) {
  const double om = 1.0 - rho * rho;
  return -np * std::log(om) - (a - 2.0 * rho * c) / om;
}

double positive_quadratic_root(double qa, double qb, double qc) {
  // qa > 0, qc < 0: exactly one positive root.
  const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
  return qb >= 0.0 ? -2.0 * qc / (qb + disc) : (-qb + disc) / (2.0 * qa);
}

}  // namespace

double solve_rho(const SufficientStats& stats, double sigma1, double sigma2, Index n1_prime,
                 double rho_clip) {
  if (n1_prime < 2) throw InputError("correlation unidentifiable: need at least two remeasured pairs");
  const double np = static_cast<double>(n1_prime);
  const double a = stats.w_s1 / (sigma1 * sigma1) + stats.w_c2 / (sigma2 * sigma2);
  const double c = stats.w_cross / (sigma1 * sigma2);
  const double lo = -1.0 + rho_clip, hi = 1.0 - rho_clip;

  // n1' rho^3 - c rho^2 + (a - n1') rho - c = 0
  std::vector<double> candidates;
  for (double r : real_cubic_roots(np, -c, a - np, -c))
    if (r > lo && r < hi) candidates.push_back(r);
  if (candidates.empty()) candidates = {lo, hi};

  double best = candidates.front();
  double best_val = rho_profile(best, a, c, np);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double val = rho_profile(candidates[i], a, c, np);
    const double tie = 1e-12 * (1.0 + std::abs(best_val));
    if (val > best_val + tie || (std::abs(val - best_val) <= tie && std::abs(candidates[i]) < std::abs(best))) {
      best = candidates[i];
      best_val = val;
    }
  }
  return best;
}

double solve_sigma1(const SufficientStats& stats, double rho, double sigma2, Index n1) {
  const double om = 1.0 - rho * rho;
  const double rhs = stats.w_s1 + om * stats.w_rest;
  if (!(rhs > 0.0)) throw NumericalError("degenerate variance: batch-1 residuals are all zero");
  return positive_quadratic_root(static_cast<double>(n1) * om, rho * stats.w_cross / sigma2, -rhs);
}

double solve_sigma2(const SufficientStats& stats, double rho, double sigma1, Index n1_prime,
                    Index n2) {
  const double om = 1.0 - rho * rho;
  const double rhs = stats.w_c2 + om * stats.w_t2;
  if (!(rhs > 0.0)) throw NumericalError("degenerate variance: batch-2 residuals are all zero");
  return positive_quadratic_root(static_cast<double>(n1_prime + n2) * om,
                                 rho * stats.w_cross / sigma1, -rhs);
}

namespace {

// Cross-products that do not change across iterations. The profiled objective
// in b is a sum of squares over four row blocks:
//   batch-1 controls      (y - Zb) / s1
//   cases, centered       (y_c - Z_c b) / s2
//   pairs, centered       (w_c - k Z_c b) / sqrt(1 - rho^2),
//                         w = y_C2 / s2 - rho y_S1 / s1,  k = 1/s2 - rho/s1
struct Moments {
  MatrixXd zz_c1, zz_t2c, zz_s1c;
  VectorXd zy_c1, zy_t2c, zy_s1c_c2, zy_s1c_s1;

  explicit Moments(const Dataset& data) {
    const MatrixXd zc1 = data.z_c1();
    zz_c1 = zc1.transpose() * zc1;
    zy_c1 = zc1.transpose() * data.y_c1();

    MatrixXd zt = data.z_t2();
    zt.rowwise() -= zt.colwise().mean();
    zz_t2c = zt.transpose() * zt;
    zy_t2c = zt.transpose() * data.y_t2();

    MatrixXd zs = data.z_s1();
    if (zs.rows() > 0) zs.rowwise() -= zs.colwise().mean();
    zz_s1c = zs.transpose() * zs;
    zy_s1c_c2 = zs.transpose() * data.y_c2();
    zy_s1c_s1 = zs.transpose() * data.y_s1();
  }

  CoefficientSystem system(double rho, double s1, double s2) const {
    const double om = 1.0 - rho * rho;
    const double k = 1.0 / s2 - rho / s1;
    CoefficientSystem cs;
    cs.s = zz_c1 / (s1 * s1) + zz_t2c / (s2 * s2) + (k * k / om) * zz_s1c;
    cs.t = zy_c1 / (s1 * s1) + zy_t2c / (s2 * s2) + (k / om) * (zy_s1c_c2 / s2 - rho * zy_s1c_s1 / s1);
    return cs;
  }
};

VectorXd solve_system(const CoefficientSystem& cs) {
  Eigen::LLT<MatrixXd> llt(cs.s);
  if (llt.info() != Eigen::Success) throw NumericalError("design collinear under current weights");
  VectorXd b = llt.solve(cs.t);
  if (!b.allFinite()) throw NumericalError("design collinear under current weights");
  return b;
}

}  // namespace

CoefficientSystem coefficient_system(const Dataset& data, double rho, double sigma1, double sigma2) {
  return Moments(data).system(rho, sigma1, sigma2);
}

VectorXd update_b(const Dataset& data, double rho, double sigma1, double sigma2) {
  return solve_system(coefficient_system(data, rho, sigma1, sigma2));
}

ParameterVector initial_estimate(const Dataset& data, const FitConfig& config) {
  const Index n1 = data.n1(), n2 = data.n2(), np = data.n1_prime(), p = data.p();

  MatrixXd x(n1 + n2, p + 1);
  x.topLeftCorner(n1 + n2, p) = data.z().topRows(n1 + n2);
  x.col(p).setZero();
  x.col(p).tail(n2).setOnes();
  const VectorXd yo = data.y().head(n1 + n2);
  const VectorXd coef = x.colPivHouseholderQr().solve(yo);

  ParameterVector theta;
  theta.b = coef.head(p);
  const VectorXd e1 = data.y_c1() - data.z_c1() * theta.b;
  const VectorXd et = data.y_t2() - data.z_t2() * theta.b;
  VectorXd ec2 = data.y_c2() - data.z_c2() * theta.b;
  const VectorXd e_s1 = e1.head(np);

  const double s1 = std::sqrt(e1.squaredNorm() / static_cast<double>(n1));
  const VectorXd et_c = et.array() - et.mean();
  if (np > 0) ec2.array() -= ec2.mean();
  const double s2 = std::sqrt((et_c.squaredNorm() + ec2.squaredNorm()) / static_cast<double>(n2 + np));
  theta.sigma1 = s1 > 0.0 ? s1 : 1.0;
  theta.sigma2 = s2 > 0.0 ? s2 : 1.0;

  double rho = 0.0;
  if (np >= 2) {
    const VectorXd a = e_s1.array() - e_s1.mean();
    const double den = std::sqrt(a.squaredNorm() * ec2.squaredNorm());
    if (den > 0.0) rho = a.dot(ec2) / den;
  }
  theta.rho = std::clamp(rho, -1.0 + config.rho_clip, 1.0 - config.rho_clip);

  theta.a0 = theta.a1 = 0.0;
  const auto loc = update_location(sufficient_stats(data, theta), theta.rho, theta.sigma1, theta.sigma2);
  theta.a0 = loc.a0;
  theta.a1 = loc.a1;
  return theta;
}

FitResult fit_mle(const Dataset& data, const FitConfig& config,
                  const std::optional<ParameterVector>& start) {
  config.check();
  if (data.n1_prime() < 2)
    throw InputError("correlation unidentifiable: need at least two remeasured pairs (use Batch2)");

  ParameterVector theta;
  if (start) {
    theta = *start;
    theta.check();
    if (theta.b.size() != data.p()) throw InputError("warm start has wrong coefficient length");
    theta.rho = std::clamp(theta.rho, -1.0 + config.rho_clip, 1.0 - config.rho_clip);
  } else {
    if (config.init == InitStrategy::kWarmStart) throw InputError("warm-start fit needs a starting theta");
    theta = initial_estimate(data, config);
  }

  const Moments moments(data);
  const Index n1 = data.n1(), n2 = data.n2(), np = data.n1_prime();

  FitResult res;
  double loglik = log_likelihood(data, theta);
  if (config.record_trace) res.loglik_trace.push_back(loglik);

  for (int it = 1; it <= config.max_iter; ++it) {
    const auto st = sufficient_stats(data, theta);
    theta.rho = solve_rho(st, theta.sigma1, theta.sigma2, np, config.rho_clip);
    theta.sigma1 = solve_sigma1(st, theta.rho, theta.sigma2, n1);
    theta.sigma2 = solve_sigma2(st, theta.rho, theta.sigma1, np, n2);
    auto loc = update_location(st, theta.rho, theta.sigma1, theta.sigma2);
    theta.a0 = loc.a0;
    theta.a1 = loc.a1;

    theta.b = solve_system(moments.system(theta.rho, theta.sigma1, theta.sigma2));
    loc = update_location(sufficient_stats(data, theta), theta.rho, theta.sigma1, theta.sigma2);
    theta.a0 = loc.a0;
    theta.a1 = loc.a1;

    const double next = log_likelihood(data, theta);
    if (!std::isfinite(next)) throw NumericalError("log-likelihood became non-finite");
    if (config.record_trace) res.loglik_trace.push_back(next);
    const double rel = std::abs(next - loglik) / std::max(1.0, std::abs(loglik));
    loglik = next;
    res.iterations = it;
    if (rel < config.tol_loglik) {
      res.max_score = score(data, theta).cwiseAbs().maxCoeff();
      if (res.max_score < config.tol_score) {
        res.converged = true;
        break;
      }
    }
  }
  if (!res.converged) res.max_score = score(data, theta).cwiseAbs().maxCoeff();
  res.theta = std::move(theta);
  res.loglik = loglik;
  return res;
}

}  // namespace remeasure
