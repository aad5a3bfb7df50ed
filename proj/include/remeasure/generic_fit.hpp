#pragma once

#include <optional>

#include "remeasure/estimator.hpp"

namespace remeasure {

/// General-purpose maximum likelihood: BFGS on the unconstrained
/// reparameterization (a0, a1, b, atanh rho, log sigma1, log sigma2) with
/// central finite-difference gradients. Serves as a correctness oracle and
/// timing baseline for fit_mle; it knows nothing about the model structure.
FitResult fit_generic(const Dataset& data, const FitConfig& config = {},
                      const std::optional<ParameterVector>& start = std::nullopt);

}  // namespace remeasure
