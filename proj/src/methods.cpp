#include "remeasure/methods.hpp"

#include <sstream>

#include "remeasure/baselines.hpp"
#include "remeasure/inference.hpp"

namespace remeasure {

Method parse_method(const std::string& name) {
  if (name == "remeasure") return Method::kRemeasure;
  if (name == "remeasure_boot" || name == "bootstrap") return Method::kRemeasureBoot;
  if (name == "batch2") return Method::kBatch2;
  if (name == "ignore") return Method::kIgnore;
  if (name == "naive") return Method::kNaive;
  if (name == "ls") return Method::kLs;
  if (name == "lsind") return Method::kLsind;
  throw InputError("unknown method '" + name + "'");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::kRemeasure: return "remeasure";
    case Method::kRemeasureBoot: return "remeasure_boot";
    case Method::kBatch2: return "batch2";
    case Method::kIgnore: return "ignore";
    case Method::kNaive: return "naive";
    case Method::kLs: return "ls";
    case Method::kLsind: return "lsind";
  }
  return "?";
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) throw InputError("no methods given");
  return out;
}

TestResult run_method(Method method, const Dataset& data, const MethodOptions& options) {
  switch (method) {
    case Method::kRemeasure:
    case Method::kRemeasureBoot: {
      const FitResult fit = fit_mle(data, options.fit);
      if (!fit.converged) throw NumericalError("maximum likelihood fit did not converge");
      if (method == Method::kRemeasure) return z_test(fit, variance_a0(data, fit));
      BootstrapOptions bo;
      bo.replicates = options.bootstrap_replicates;
      bo.seed = options.bootstrap_seed;
      bo.fit = options.fit;
      return options.parallel_bootstrap ? residual_bootstrap(data, fit, bo)
                                        : residual_bootstrap_serial(data, fit, bo);
    }
    case Method::kBatch2: return fit_batch2(data);
    case Method::kIgnore: return fit_ignore(data);
    case Method::kNaive: return fit_naive(data);
    case Method::kLs: return fit_ls(data);
    case Method::kLsind: return fit_lsind(data);
  }
  throw InputError("unknown method");
}

}  // namespace remeasure
