#include "remeasure/generic_fit.hpp"

#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <memory>

namespace remeasure {

namespace {

struct Problem {
  const Dataset* data;
  Index p;
  double rho_max;
};

ParameterVector from_free(const gsl_vector* x, const Problem& pr) {
  ParameterVector t;
  t.a0 = gsl_vector_get(x, 0);
  t.a1 = gsl_vector_get(x, 1);
  t.b.resize(pr.p);
  for (Index j = 0; j < pr.p; ++j) t.b(j) = gsl_vector_get(x, static_cast<std::size_t>(2 + j));
  const auto k = static_cast<std::size_t>(pr.p + 2);
  t.rho = std::clamp(std::tanh(gsl_vector_get(x, k)), -pr.rho_max, pr.rho_max);
  t.sigma1 = std::exp(gsl_vector_get(x, k + 1));
  t.sigma2 = std::exp(gsl_vector_get(x, k + 2));
  return t;
}

double objective(const gsl_vector* x, void* params) {
  const auto& pr = *static_cast<const Problem*>(params);
  const double l = log_likelihood(*pr.data, from_free(x, pr));
  return std::isfinite(l) ? -l : GSL_POSINF;
}

void gradient(const gsl_vector* x, void* params, gsl_vector* g) {
  const std::size_t n = x->size;
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> w(gsl_vector_alloc(n), gsl_vector_free);
  gsl_vector_memcpy(w.get(), x);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = gsl_vector_get(x, i);
    const double h = 1e-6 * std::max(1.0, std::abs(xi));
    gsl_vector_set(w.get(), i, xi + h);
    const double fp = objective(w.get(), params);
    gsl_vector_set(w.get(), i, xi - h);
    const double fm = objective(w.get(), params);
    gsl_vector_set(w.get(), i, xi);
    gsl_vector_set(g, i, (fp - fm) / (2.0 * h));
  }
}

void objective_and_gradient(const gsl_vector* x, void* params, double* f, gsl_vector* g) {
  *f = objective(x, params);
  gradient(x, params, g);
}

}  // namespace

FitResult fit_generic(const Dataset& data, const FitConfig& config,
                      const std::optional<ParameterVector>& start) {
  config.check();
  if (data.n1_prime() < 2)
    throw InputError("correlation unidentifiable: need at least two remeasured pairs (use Batch2)");

  ParameterVector theta0 = start ? *start : initial_estimate(data, config);
  theta0.check();
  Problem pr{&data, data.p(), 1.0 - config.rho_clip};
  const auto n = static_cast<std::size_t>(data.p() + 5);

  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), gsl_vector_free);
  gsl_vector_set(x.get(), 0, theta0.a0);
  gsl_vector_set(x.get(), 1, theta0.a1);
  for (Index j = 0; j < data.p(); ++j) gsl_vector_set(x.get(), static_cast<std::size_t>(2 + j), theta0.b(j));
  const auto k = static_cast<std::size_t>(data.p() + 2);
  gsl_vector_set(x.get(), k, std::atanh(std::clamp(theta0.rho, -pr.rho_max, pr.rho_max)));
  gsl_vector_set(x.get(), k + 1, std::log(theta0.sigma1));
  gsl_vector_set(x.get(), k + 2, std::log(theta0.sigma2));

  gsl_multimin_function_fdf fdf;
  fdf.n = n;
  fdf.f = &objective;
  fdf.df = &gradient;
  fdf.fdf = &objective_and_gradient;
  fdf.params = &pr;

  gsl_set_error_handler_off();
  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> solver(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n),
      gsl_multimin_fdfminimizer_free);
  gsl_multimin_fdfminimizer_set(solver.get(), &fdf, x.get(), 0.01, 0.1);

  FitResult res;
  const int max_iter = std::max(config.max_iter, 2000);
  int status = GSL_CONTINUE;
  int it = 0;
  while (status == GSL_CONTINUE && it < max_iter) {
    ++it;
    if (gsl_multimin_fdfminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    status = gsl_multimin_test_gradient(solver->gradient, 1e-6);
  }
  const double gnorm = gsl_blas_dnrm2(solver->gradient);

  res.theta = from_free(solver->x, pr);
  res.loglik = log_likelihood(data, res.theta);
  res.iterations = it;
  res.converged = status == GSL_SUCCESS || gnorm < 1e-4;
  res.max_score = score(data, res.theta).cwiseAbs().maxCoeff();
  return res;
}

}  // namespace remeasure
