#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "remeasure/estimator.hpp"
#include "remeasure/regression.hpp"

namespace remeasure {

enum class Method { kRemeasure, kRemeasureBoot, kBatch2, kIgnore, kNaive, kLs, kLsind };

Method parse_method(const std::string& name);
const char* to_string(Method m);
/// Comma-separated list, e.g. "remeasure,batch2,ls".
std::vector<Method> parse_methods(const std::string& list);

struct MethodOptions {
  FitConfig fit;
  int bootstrap_replicates = 1000;
  std::uint64_t bootstrap_seed = 1;
  bool parallel_bootstrap = false;
};

/// Estimate and test a0 = 0 with the given procedure. For kRemeasure a
/// non-converged fit raises NumericalError.
TestResult run_method(Method method, const Dataset& data, const MethodOptions& options = {});

}  // namespace remeasure
