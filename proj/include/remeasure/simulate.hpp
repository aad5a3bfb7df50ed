#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "remeasure/methods.hpp"
#include "remeasure/model.hpp"
#include "remeasure/rng.hpp"

namespace remeasure {

enum class NoiseFamily {
  kGaussian,
  kCenteredGamma,  // Gamma(shape 2, scale 1) minus its mean
  kStudentT,       // t with 6 degrees of freedom
};

NoiseFamily parse_noise(const std::string& s);
const char* to_string(NoiseFamily f);

/// Draw from `family` standardized to mean 0 and variance 1.
double standardized_draw(NoiseFamily family, Rng& rng);

/// A data-generating setting for the remeasurement model.
struct Scenario {
  StudyDesign design{50, 50, 25, 2};
  ParameterVector truth;
  NoiseFamily noise = NoiseFamily::kGaussian;
  /// Fixed covariates for the n1 + n2 original samples (first column ones).
  /// When empty, every replicate draws one standard-normal covariate plus the
  /// intercept.
  std::optional<MatrixXd> covariates;
  std::uint64_t seed = 1;

  /// Defaults used in the published simulations: a0 = a1 = 0.5, b = (0, -0.5),
  /// sigma2 = 1.
  static Scenario standard(Index n1, Index n2, Index n1_prime, double rho, double sigma1, double a0,
                           double a1 = 0.5);

  void check() const;
};

/// Replicate `replicate` of the scenario; deterministic given (seed, replicate).
Dataset generate_dataset(const Scenario& scenario, std::uint64_t replicate = 0);

struct McOptions {
  std::vector<Method> methods{Method::kRemeasure};
  int replicates = 1000;
  double alpha = 0.05;
  int bootstrap_replicates = 300;
  FitConfig fit;
  bool keep_replicates = false;
};

struct ReplicateRecord {
  int replicate = 0;
  bool ok = false;
  double estimate = 0.0;
  double std_error = 0.0;
  double p_value = 1.0;
};

struct MethodSummary {
  Method method = Method::kRemeasure;
  int successes = 0;
  int failures = 0;
  double rejection_rate = 0.0;
  double mse = 0.0;
  double mean_estimate = 0.0;
  double sd_estimate = 0.0;
  double sem_estimate = 0.0;        // sd / sqrt(successes)
  double mean_variance = 0.0;       // mean of std_error^2
  std::vector<ReplicateRecord> replicates;  // when McOptions::keep_replicates
};

struct McSummary {
  int replicates = 0;
  double alpha = 0.05;
  double truth_a0 = 0.0;
  std::vector<MethodSummary> methods;
  std::vector<std::string> warnings;

  const MethodSummary& at(Method m) const;
};

/// Replicates on the OpenMP pool; output identical to monte_carlo_serial.
McSummary monte_carlo(const Scenario& scenario, const McOptions& options);

/// Single-threaded reference implementation.
McSummary monte_carlo_serial(const Scenario& scenario, const McOptions& options);

}  // namespace remeasure
