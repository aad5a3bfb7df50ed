#include "remeasure/inference.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "remeasure/rng.hpp"

namespace remeasure {

double VarianceDecomposition::combine(const Dataset& data) const {
  return c1.dot(data.y_s1()) + c2.dot(data.y_t2()) + c3.dot(data.y_c2()) + c4.dot(data.y_rest());
}

VarianceDecomposition variance_weights(const Dataset& data, double rho, double sigma1, double sigma2) {
  const Index np = data.n1_prime(), n2 = data.n2();
  if (np < 1) throw InputError("variance of a0 needs remeasured samples");
  const double g = rho * sigma2 / sigma1;
  const double k = 1.0 / sigma2 - rho / sigma1;
  const double om = 1.0 - rho * rho;

  MatrixXd zt = data.z_t2();
  const VectorXd zbar_t2 = zt.colwise().mean();
  zt.rowwise() -= zbar_t2.transpose();
  MatrixXd zs = data.z_s1();
  const VectorXd zbar_s1 = zs.colwise().mean();
  zs.rowwise() -= zbar_s1.transpose();

  const MatrixXd zc1 = data.z_c1();
  MatrixXd s = zc1.transpose() * zc1 / (sigma1 * sigma1) + zt.transpose() * zt / (sigma2 * sigma2) +
               (k * k / om) * (zs.transpose() * zs);
  Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("coefficient matrix is singular");

  // a0_hat = mean(y_T2) - mean(y_C2) + g mean(y_S1) + h'b_hat, b_hat linear in y.
  const VectorXd h = -zbar_t2 + (1.0 - g) * zbar_s1;
  const VectorXd v = llt.solve(h);

  const VectorXd zs1v = data.z_s1() * v;
  const VectorXd zsv = zs * v;
  VarianceDecomposition out;
  out.c1 = (g / static_cast<double>(np)) + (zs1v / (sigma1 * sigma1) - (k * rho / (om * sigma1)) * zsv).array();
  out.c2 = (1.0 / static_cast<double>(n2)) + (zt * v / (sigma2 * sigma2)).array();
  out.c3 = (-1.0 / static_cast<double>(np)) + ((k / (om * sigma2)) * zsv).array();
  out.c4 = data.z_rest() * v / (sigma1 * sigma1);
  out.var_a0 = sigma1 * sigma1 * (out.c1.squaredNorm() + out.c4.squaredNorm()) +
               sigma2 * sigma2 * (out.c2.squaredNorm() + out.c3.squaredNorm()) +
               2.0 * rho * sigma1 * sigma2 * out.c1.dot(out.c3);
  if (!(out.var_a0 > 0.0)) throw NumericalError("non-positive variance of a0");
  return out;
}

VarianceDecomposition variance_a0(const Dataset& data, const FitResult& fit) {
  const auto& t = fit.theta;
  return variance_weights(data, t.rho, t.sigma1, t.sigma2);
}

TestResult z_test(const FitResult& fit, const VarianceDecomposition& var) {
  TestResult r;
  r.method = "remeasure";
  r.estimate = fit.theta.a0;
  r.std_error = std::sqrt(var.var_a0);
  r.statistic = r.estimate / r.std_error;
  r.p_value = two_sided_normal_p(r.statistic);
  return r;
}

namespace {

struct BootstrapSetup {
  VectorXd fitted;  // per row, in dataset order
  VectorXd e_c1;    // batch-1 control residuals, S1 first
  VectorXd e_t2;
  VectorXd e_c2;
  double z_obs = 0.0;
};

BootstrapSetup prepare(const Dataset& data, const FitResult& fit) {
  if (!fit.converged) throw InputError("bootstrap requires a converged fit");
  const auto& t = fit.theta;
  const Index n1 = data.n1(), n2 = data.n2(), np = data.n1_prime();
  BootstrapSetup s;
  s.fitted = data.z() * t.b;
  s.fitted.segment(n1, n2).array() += t.a0 + t.a1;
  s.fitted.tail(np).array() += t.a1;
  const VectorXd e = data.y() - s.fitted;
  s.e_c1 = e.head(n1);
  s.e_t2 = e.segment(n1, n2);
  s.e_c2 = e.tail(np);
  s.z_obs = fit.theta.a0 / std::sqrt(variance_a0(data, fit).var_a0);
  return s;
}

struct ReplicateOutcome {
  double z = 0.0;
  long attempts = 0;
  bool ok = false;
};

ReplicateOutcome run_replicate(const Dataset& data, const FitResult& fit, const BootstrapSetup& s,
                               const BootstrapOptions& opt, int b, long attempt_cap) {
  const Index n1 = data.n1(), n2 = data.n2(), np = data.n1_prime();
  ReplicateOutcome out;
  VectorXd y(data.y().size());
  for (long attempt = 0; attempt < attempt_cap; ++attempt) {
    ++out.attempts;
    Rng rng = make_stream(opt.seed, static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(attempt));
    std::uniform_int_distribution<Index> pick_pair(0, np - 1);
    std::uniform_int_distribution<Index> pick_c1(0, n1 - 1);
    std::uniform_int_distribution<Index> pick_t2(0, n2 - 1);
    for (Index i = 0; i < np; ++i) {
      const Index j = pick_pair(rng);
      y(i) = s.fitted(i) + s.e_c1(j);
      y(n1 + n2 + i) = s.fitted(n1 + n2 + i) + s.e_c2(j);
    }
    for (Index i = np; i < n1; ++i) y(i) = s.fitted(i) + s.e_c1(pick_c1(rng));
    for (Index i = 0; i < n2; ++i) y(n1 + i) = s.fitted(n1 + i) + s.e_t2(pick_t2(rng));

    try {
      const Dataset boot = data.with_response(y);
      const FitResult bf = fit_mle(boot, opt.fit, fit.theta);
      if (!bf.converged) continue;
      const double var = variance_a0(boot, bf).var_a0;
      out.z = (bf.theta.a0 - fit.theta.a0) / std::sqrt(var);
      if (!std::isfinite(out.z)) continue;
      out.ok = true;
      return out;
    } catch (const std::exception&) {
      continue;
    }
  }
  return out;
}

TestResult finish(const FitResult& fit, const BootstrapSetup& s, const BootstrapOptions& opt,
                  const std::vector<ReplicateOutcome>& reps) {
  long attempts = 0;
  long exceed = 0;
  for (const auto& r : reps) {
    attempts += r.attempts;
    if (!r.ok) throw NumericalError("bootstrap instability: a replicate could not be refitted");
    if (std::abs(r.z) > std::abs(s.z_obs)) ++exceed;
  }
  if (attempts > 10L * opt.replicates) throw NumericalError("bootstrap instability: too many failed refits");
  TestResult res;
  res.method = "remeasure_boot";
  res.estimate = fit.theta.a0;
  res.std_error = s.z_obs != 0.0 ? fit.theta.a0 / s.z_obs : 0.0;
  res.statistic = s.z_obs;
  res.p_value = static_cast<double>(exceed) / static_cast<double>(opt.replicates);
  res.bootstrap_replicates = opt.replicates;
  return res;
}

void check_options(const BootstrapOptions& opt) {
  if (opt.replicates < 100) throw InputError("bootstrap needs at least 100 replicates");
  opt.fit.check();
}

}  // namespace

TestResult residual_bootstrap_serial(const Dataset& data, const FitResult& fit,
                                     const BootstrapOptions& options) {
  check_options(options);
  const auto setup = prepare(data, fit);
  const long cap = 10L * options.replicates;
  std::vector<ReplicateOutcome> reps(static_cast<std::size_t>(options.replicates));
  for (int b = 0; b < options.replicates; ++b)
    reps[static_cast<std::size_t>(b)] = run_replicate(data, fit, setup, options, b, cap);
  return finish(fit, setup, options, reps);
}

TestResult residual_bootstrap(const Dataset& data, const FitResult& fit, const BootstrapOptions& options) {
  check_options(options);
  const auto setup = prepare(data, fit);
  const long cap = 10L * options.replicates;
  std::vector<ReplicateOutcome> reps(static_cast<std::size_t>(options.replicates));
#pragma omp parallel for schedule(dynamic, 8)
  for (int b = 0; b < options.replicates; ++b)
    reps[static_cast<std::size_t>(b)] = run_replicate(data, fit, setup, options, b, cap);
  return finish(fit, setup, options, reps);
}

}  // namespace remeasure
