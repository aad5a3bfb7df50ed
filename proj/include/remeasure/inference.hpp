#pragma once

#include <cstdint>

#include "remeasure/estimator.hpp"
#include "remeasure/regression.hpp"

namespace remeasure {

/// a0_hat written as c1'y_S1 + c2'y_T2 + c3'y_C2 + c4'y_{C1\S1}, and the
/// plug-in variance of that linear combination.
struct VarianceDecomposition {
  VectorXd c1, c2, c3, c4;
  double var_a0 = 0.0;

  /// The linear combination applied to the responses of `data`.
  double combine(const Dataset& data) const;
};

/// Weights and variance for given (rho, sigma1, sigma2). Depends on the
/// covariates only, so it also yields the oracle variance when the true
/// parameters are substituted.
VarianceDecomposition variance_weights(const Dataset& data, double rho, double sigma1, double sigma2);

VarianceDecomposition variance_a0(const Dataset& data, const FitResult& fit);

/// Two-sided normal test of a0 = 0.
TestResult z_test(const FitResult& fit, const VarianceDecomposition& var);

struct BootstrapOptions {
  int replicates = 1000;
  std::uint64_t seed = 1;
  FitConfig fit;
};

/// Residual bootstrap p-value for a0 = 0. Remeasured (S1, C2) residuals are
/// drawn jointly as pairs; the other batch-1 controls draw from all batch-1
/// residuals and cases from the case residuals. Replicates run on the OpenMP
/// pool; the result depends only on the inputs and the seed.
TestResult residual_bootstrap(const Dataset& data, const FitResult& fit,
                              const BootstrapOptions& options);

/// Single-threaded reference for residual_bootstrap; bit-identical output.
TestResult residual_bootstrap_serial(const Dataset& data, const FitResult& fit,
                                     const BootstrapOptions& options);

}  // namespace remeasure
