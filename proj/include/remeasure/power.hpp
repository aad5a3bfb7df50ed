#pragma once

#include <optional>
#include <string>
#include <vector>

#include "remeasure/model.hpp"

namespace remeasure {

/// Inputs of the analytic power calculation. sigma2 is fixed at 1 so that
/// `effect` is Cohen's d.
struct PowerQuery {
  Index n1 = 50;
  Index n2 = 50;
  Index n1_prime = 50;
  double effect = 0.5;
  double rho = 0.5;
  double alpha = 0.05;
  double sigma1 = 1.0;
  double a1 = 0.0;  // batch location effect; does not enter the power

  /// Throws InputError naming the offending field.
  void check() const;
};

struct PowerResult {
  double absolute_power = 0.0;
  double optimal_power = 0.0;  // at n1' = n1
  double relative_power = 0.0;
  double oracle_sd = 0.0;
};

struct PowerPoint {
  Index n1_prime = 0;
  PowerResult power;
};

enum class PowerMode { kAbsolute, kRelative };

PowerMode parse_power_mode(const std::string& s);
const char* to_string(PowerMode mode);

/// sd(a0_hat) from the plug-in variance with the true (rho, sigma1, 1) and an
/// intercept-only design of the query's sizes.
double oracle_sd_a0(const PowerQuery& query);

/// Rejection probability of the two-sided level-alpha z-test when a0 = d:
///   Phi(-z + d/sd) + Phi(-z - d/sd),  z = z_{1 - alpha/2}.
double power_at(double effect, double sd, double alpha);

PowerResult theoretical_power(const PowerQuery& query);

/// Smallest n1' in [2, n1] reaching `target`, by exhaustive scan. nullopt when
/// even n1' = n1 falls short (absolute mode only).
std::optional<Index> min_remeasured(const PowerQuery& query, double target, PowerMode mode);

/// theoretical_power for every n1' in [lo, hi].
std::vector<PowerPoint> power_curve(const PowerQuery& query, Index lo, Index hi);

}  // namespace remeasure
