#pragma once

#include <random>

#include "remeasure/model.hpp"
#include "remeasure/simulate.hpp"

namespace testing {

using namespace remeasure;

// Default simulation configuration: sigma1 = 2, rho = 0.6, n1 = n2 = 50.
inline Dataset standard_dataset(std::uint64_t seed, Index n1 = 50, Index n2 = 50, Index np = 25,
                                double rho = 0.6, double sigma1 = 2.0, double a0 = 0.5) {
  Scenario sc = Scenario::standard(n1, n2, np, rho, sigma1, a0);
  sc.seed = seed;
  return generate_dataset(sc, 0);
}

// Intercept plus `extra` standard-normal covariates, random responses.
inline Dataset random_dataset(std::uint64_t seed, Index n1, Index n2, Index np, Index extra = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const Index p = 1 + extra;
  auto covs = [&](Index rows) {
    MatrixXd z(rows, p);
    for (Index i = 0; i < rows; ++i) {
      z(i, 0) = 1.0;
      for (Index j = 1; j < p; ++j) z(i, j) = nd(rng);
    }
    return z;
  };
  auto draws = [&](Index n, double shift) {
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = shift + nd(rng);
    return v;
  };
  const MatrixXd zc1 = covs(n1), zt2 = covs(n2);
  const VectorXd ys1 = draws(np, 0.0);
  VectorXd yc2 = draws(np, 0.3);
  yc2 += 0.7 * ys1;
  return Dataset::from_blocks(ys1, draws(n1 - np, 0.0), draws(n2, 1.0), yc2, zc1, zt2);
}

inline ParameterVector random_theta(std::uint64_t seed, Index p) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParameterVector t;
  t.a0 = u(rng);
  t.a1 = u(rng);
  t.b = VectorXd(p);
  for (Index j = 0; j < p; ++j) t.b(j) = u(rng);
  t.rho = 0.8 * u(rng);
  t.sigma1 = 0.5 + std::abs(u(rng));
  t.sigma2 = 0.5 + std::abs(u(rng));
  return t;
}

}  // namespace testing
