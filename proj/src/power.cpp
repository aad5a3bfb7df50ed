#include "remeasure/power.hpp"

#include <cmath>

#include "remeasure/inference.hpp"
#include "remeasure/regression.hpp"

namespace remeasure {

void PowerQuery::check() const {
  if (n1 < 2) throw InputError("n1: must be >= 2");
  if (n2 < 2) throw InputError("n2: must be >= 2");
  if (n1_prime < 2 || n1_prime > n1) throw InputError("n1_prime: must lie in [2, n1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha: must lie in (0, 1)");
  if (!(std::abs(rho) < 1.0)) throw InputError("rho: must satisfy |rho| < 1");
  if (!(sigma1 > 0.0) || !std::isfinite(sigma1)) throw InputError("sigma1: must be > 0");
  if (!std::isfinite(effect)) throw InputError("d: must be finite");
  if (!std::isfinite(a1)) throw InputError("a1: must be finite");
}

PowerMode parse_power_mode(const std::string& s) {
  if (s == "absolute") return PowerMode::kAbsolute;
  if (s == "relative") return PowerMode::kRelative;
  throw InputError("mode: must be 'absolute' or 'relative'");
}

const char* to_string(PowerMode mode) { return mode == PowerMode::kAbsolute ? "absolute" : "relative"; }

namespace {

Dataset intercept_design(Index n1, Index n2, Index n1_prime) {
  StudyDesign d{n1, n2, n1_prime, 1};
  return Dataset(d, VectorXd::Zero(d.n_rows()), MatrixXd::Ones(d.n_rows(), 1));
}

}  // namespace

double oracle_sd_a0(const PowerQuery& query) {
  query.check();
  const Dataset design = intercept_design(query.n1, query.n2, query.n1_prime);
  return std::sqrt(variance_weights(design, query.rho, query.sigma1, 1.0).var_a0);
}

double power_at(double effect, double sd, double alpha) {
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double shift = effect / sd;
  return normal_cdf(-z + shift) + normal_cdf(-z - shift);
}

PowerResult theoretical_power(const PowerQuery& query) {
  query.check();
  PowerResult r;
  r.oracle_sd = oracle_sd_a0(query);
  r.absolute_power = power_at(query.effect, r.oracle_sd, query.alpha);
  if (query.n1_prime == query.n1) {
    r.optimal_power = r.absolute_power;
  } else {
    PowerQuery full = query;
    full.n1_prime = query.n1;
    r.optimal_power = power_at(query.effect, oracle_sd_a0(full), query.alpha);
  }
  r.relative_power = r.absolute_power / r.optimal_power;
  return r;
}

std::optional<Index> min_remeasured(const PowerQuery& query, double target, PowerMode mode) {
  if (!(target > 0.0 && target < 1.0)) throw InputError("target: must lie in (0, 1)");
  PowerQuery q = query;
  q.n1_prime = q.n1;
  q.check();
  for (const auto& pt : power_curve(q, 2, q.n1)) {
    const double v = mode == PowerMode::kAbsolute ? pt.power.absolute_power : pt.power.relative_power;
    if (v >= target) return pt.n1_prime;
  }
  return std::nullopt;
}

std::vector<PowerPoint> power_curve(const PowerQuery& query, Index lo, Index hi) {
  PowerQuery q = query;
  q.n1_prime = q.n1;
  q.check();
  if (lo < 2 || hi > q.n1 || lo > hi) throw InputError("n1_prime range: must satisfy 2 <= lo <= hi <= n1");
  const double optimal = power_at(q.effect, oracle_sd_a0(q), q.alpha);
  std::vector<PowerPoint> out;
  out.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (Index m = lo; m <= hi; ++m) {
    q.n1_prime = m;
    PowerPoint pt;
    pt.n1_prime = m;
    pt.power.oracle_sd = oracle_sd_a0(q);
    pt.power.absolute_power = power_at(q.effect, pt.power.oracle_sd, q.alpha);
    pt.power.optimal_power = optimal;
    pt.power.relative_power = pt.power.absolute_power / optimal;
    out.push_back(pt);
  }
  return out;
}

}  // namespace remeasure
