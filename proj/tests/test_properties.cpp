#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "remeasure/inference.hpp"
#include "support.hpp"

using namespace remeasure;

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Anderson-Darling test against a fully specified N(0, 1); p-value from the
// Marsaglia & Marsaglia (2004) approximation of the limiting distribution.
double anderson_darling_p(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::clamp(phi(x[i]), 1e-300, 1.0 - 1e-16);
    const double g = std::clamp(phi(x[x.size() - 1 - i]), 1e-300, 1.0 - 1e-16);
    s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(f) + std::log1p(-g));
  }
  const double z = -n - s / n;
  double cdf;
  if (z < 2.0) {
    cdf = std::exp(-1.2337141 / z) / std::sqrt(z) *
          (2.00012 + (.247105 - (.0649821 - (.0347962 - (.011672 - .00168691 * z) * z) * z) * z) * z);
  } else {
    cdf = std::exp(-std::exp(1.0776 - (2.30695 - (.43424 - (.082433 - (.008056 - .0003146 * z) * z) * z) * z) * z));
  }
  return 1.0 - cdf;
}

// One-sample Kolmogorov-Smirnov test against U(0, 1), asymptotic p-value.
double ks_uniform_p(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - u[i], u[i] - static_cast<double>(i) / n});
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

double mean_error(Index n, Index np, int reps) {
  Scenario sc = Scenario::standard(n, n, np, 0.6, 2.0, 0.5);
  sc.seed = 808;
  const VectorXd truth = pack(sc.truth);
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    const FitResult f = fit_mle(generate_dataset(sc, static_cast<std::uint64_t>(r)));
    REQUIRE(f.converged);
    sum += (pack(f.theta) - truth).norm();
  }
  return sum / reps;
}

}  // namespace

TEST_CASE("the estimator is consistent") {
  CHECK(mean_error(400, 400, 500) < mean_error(50, 50, 500));
}

TEST_CASE("the standardized estimate is asymptotically normal") {
  Scenario sc = Scenario::standard(200, 200, 100, 0.6, 2.0, 0.5);
  sc.seed = 909;
  std::vector<double> z;
  for (int r = 0; r < 2000; ++r) {
    const Dataset d = generate_dataset(sc, static_cast<std::uint64_t>(r));
    const FitResult f = fit_mle(d);
    REQUIRE(f.converged);
    z.push_back((f.theta.a0 - sc.truth.a0) / std::sqrt(variance_a0(d, f).var_a0));
  }
  CHECK(anderson_darling_p(z) > 0.01);
}

TEST_CASE("null p-values are uniform") {
  Scenario sc = Scenario::standard(50, 50, 25, 0.6, 2.0, 0.0);
  sc.seed = 1010;
  std::vector<double> p;
  for (int r = 0; r < 2000; ++r) {
    const Dataset d = generate_dataset(sc, static_cast<std::uint64_t>(r));
    const FitResult f = fit_mle(d);
    REQUIRE(f.converged);
    p.push_back(z_test(f, variance_a0(d, f)).p_value);
  }
  CHECK(ks_uniform_p(p) > 0.01);
}

TEST_CASE("the test statistics themselves are sane") {
  std::vector<double> shifted(500);
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = (static_cast<double>(i) + 0.5) / 500.0;
  CHECK(ks_uniform_p(shifted) > 0.99);
  for (auto& v : shifted) v = v * v;
  CHECK(ks_uniform_p(shifted) < 1e-6);
}
