#include "remeasure/simulate.hpp"

#include <cmath>
#include <sstream>

#include "remeasure/rng.hpp"

namespace remeasure {

NoiseFamily parse_noise(const std::string& s) {
  if (s == "gaussian") return NoiseFamily::kGaussian;
  if (s == "centered_gamma" || s == "gamma") return NoiseFamily::kCenteredGamma;
  if (s == "student_t" || s == "t") return NoiseFamily::kStudentT;
  throw InputError("unknown noise family '" + s + "'");
}

const char* to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::kGaussian: return "gaussian";
    case NoiseFamily::kCenteredGamma: return "centered_gamma";
    case NoiseFamily::kStudentT: return "student_t";
  }
  return "?";
}

double standardized_draw(NoiseFamily family, Rng& rng) {
  switch (family) {
    case NoiseFamily::kGaussian:
      return std::normal_distribution<double>(0.0, 1.0)(rng);
    case NoiseFamily::kCenteredGamma:
      // shape 2, scale 1: mean 2, variance 2
      return (std::gamma_distribution<double>(2.0, 1.0)(rng) - 2.0) / std::sqrt(2.0);
    case NoiseFamily::kStudentT:
      // df 6: variance 6/4
      return std::student_t_distribution<double>(6.0)(rng) / std::sqrt(1.5);
  }
  return 0.0;
}

Scenario Scenario::standard(Index n1, Index n2, Index n1_prime, double rho, double sigma1, double a0,
                            double a1) {
  Scenario s;
  s.design = StudyDesign{n1, n2, n1_prime, 2};
  s.truth.a0 = a0;
  s.truth.a1 = a1;
  s.truth.b = VectorXd(2);
  s.truth.b << 0.0, -0.5;
  s.truth.rho = rho;
  s.truth.sigma1 = sigma1;
  s.truth.sigma2 = 1.0;
  return s;
}

void Scenario::check() const {
  design.check();
  truth.check();
  if (truth.b.size() != design.p) throw InputError("scenario: truth.b must have p entries");
  if (noise != NoiseFamily::kGaussian && truth.rho < 0.0)
    throw InputError("scenario: negative rho is only supported with gaussian noise");
  if (covariates) {
    if (covariates->rows() != design.n_original() || covariates->cols() != design.p)
      throw InputError("scenario: covariate matrix must be (n1 + n2) x p");
  } else if (design.p != 2) {
    throw InputError("scenario: generated covariates have p = 2 (intercept + one covariate)");
  }
}

Dataset generate_dataset(const Scenario& sc, std::uint64_t replicate) {
  sc.check();
  const Index n1 = sc.design.n1, n2 = sc.design.n2, np = sc.design.n1_prime;
  Rng rng = make_stream(sc.seed, replicate);
  std::normal_distribution<double> normal(0.0, 1.0);

  MatrixXd z;
  if (sc.covariates) {
    z = *sc.covariates;
  } else {
    z.resize(n1 + n2, 2);
    z.col(0).setOnes();
    for (Index i = 0; i < n1 + n2; ++i) z(i, 1) = normal(rng);
  }

  const auto& t = sc.truth;
  const double rho = t.rho;
  VectorXd y_s1(np), y_c2(np), y_rest(n1 - np), y_t2(n2);
  for (Index i = 0; i < np; ++i) {
    double u1, u2;
    if (sc.noise == NoiseFamily::kGaussian) {
      const double a = normal(rng), b = normal(rng);
      u1 = a;
      u2 = rho * a + std::sqrt(1.0 - rho * rho) * b;
    } else {
      // Common shock: corr = rho for rho >= 0, unit variances preserved.
      const double w = standardized_draw(sc.noise, rng);
      const double e1 = standardized_draw(sc.noise, rng);
      const double e2 = standardized_draw(sc.noise, rng);
      u1 = std::sqrt(rho) * w + std::sqrt(1.0 - rho) * e1;
      u2 = std::sqrt(rho) * w + std::sqrt(1.0 - rho) * e2;
    }
    const double mu = z.row(i).dot(t.b);
    y_s1(i) = mu + t.sigma1 * u1;
    y_c2(i) = mu + t.a1 + t.sigma2 * u2;
  }
  for (Index i = np; i < n1; ++i)
    y_rest(i - np) = z.row(i).dot(t.b) + t.sigma1 * standardized_draw(sc.noise, rng);
  for (Index i = 0; i < n2; ++i)
    y_t2(i) = z.row(n1 + i).dot(t.b) + t.a0 + t.a1 + t.sigma2 * standardized_draw(sc.noise, rng);

  return Dataset::from_blocks(y_s1, y_rest, y_t2, y_c2, z.topRows(n1), z.bottomRows(n2));
}

const MethodSummary& McSummary::at(Method m) const {
  for (const auto& s : methods)
    if (s.method == m) return s;
  throw InputError(std::string("method not in summary: ") + to_string(m));
}

namespace {

constexpr std::uint64_t kBootstrapStream = 0xb007;

void check_options(const McOptions& o) {
  if (o.replicates < 1) throw InputError("empty experiment: replicates must be >= 1");
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (o.methods.empty()) throw InputError("no methods requested");
  o.fit.check();
}

std::vector<ReplicateRecord> run_replicate(const Scenario& sc, const McOptions& o, int rep) {
  std::vector<ReplicateRecord> out(o.methods.size());
  for (auto& r : out) r.replicate = rep;
  std::optional<Dataset> data;
  try {
    data.emplace(generate_dataset(sc, static_cast<std::uint64_t>(rep)));
  } catch (const InputError&) {
    return out;  // e.g. a rank-deficient covariate draw; counted as failures
  }

  MethodOptions mo;
  mo.fit = o.fit;
  mo.bootstrap_replicates = o.bootstrap_replicates;
  mo.bootstrap_seed = stream_seed(sc.seed, static_cast<std::uint64_t>(rep), kBootstrapStream);
  for (std::size_t k = 0; k < o.methods.size(); ++k) {
    auto& r = out[k];
    try {
      const TestResult t = run_method(o.methods[k], *data, mo);
      if (!std::isfinite(t.estimate) || std::isnan(t.p_value)) continue;
      r.estimate = t.estimate;
      r.std_error = t.std_error;
      r.p_value = t.p_value;
      r.ok = true;
    } catch (const std::exception&) {
    }
  }
  return out;
}

McSummary aggregate(const Scenario& sc, const McOptions& o,
                    const std::vector<std::vector<ReplicateRecord>>& records) {
  McSummary s;
  s.replicates = o.replicates;
  s.alpha = o.alpha;
  s.truth_a0 = sc.truth.a0;
  for (std::size_t k = 0; k < o.methods.size(); ++k) {
    MethodSummary m;
    m.method = o.methods[k];
    double sum = 0.0, sq_err = 0.0, var_sum = 0.0;
    int reject = 0;
    for (const auto& rep : records) {
      const auto& r = rep[k];
      if (!r.ok) {
        ++m.failures;
        continue;
      }
      ++m.successes;
      sum += r.estimate;
      sq_err += (r.estimate - sc.truth.a0) * (r.estimate - sc.truth.a0);
      var_sum += r.std_error * r.std_error;
      if (r.p_value < o.alpha) ++reject;
    }
    if (m.successes > 0) {
      const double n = m.successes;
      m.mean_estimate = sum / n;
      m.mse = sq_err / n;
      m.mean_variance = var_sum / n;
      m.rejection_rate = reject / n;
      double ss = 0.0;
      for (const auto& rep : records)
        if (rep[k].ok) ss += (rep[k].estimate - m.mean_estimate) * (rep[k].estimate - m.mean_estimate);
      m.sd_estimate = m.successes > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      m.sem_estimate = m.sd_estimate / std::sqrt(n);
    }
    if (m.failures > 0.01 * o.replicates) {
      std::ostringstream w;
      w << to_string(m.method) << ": " << m.failures << " of " << o.replicates
        << " replicates failed and were excluded";
      s.warnings.push_back(w.str());
    }
    if (o.keep_replicates) {
      m.replicates.reserve(records.size());
      for (const auto& rep : records) m.replicates.push_back(rep[k]);
    }
    s.methods.push_back(std::move(m));
  }
  return s;
}

}  // namespace

McSummary monte_carlo_serial(const Scenario& scenario, const McOptions& options) {
  scenario.check();
  check_options(options);
  std::vector<std::vector<ReplicateRecord>> records(static_cast<std::size_t>(options.replicates));
  for (int rep = 0; rep < options.replicates; ++rep)
    records[static_cast<std::size_t>(rep)] = run_replicate(scenario, options, rep);
  return aggregate(scenario, options, records);
}

McSummary monte_carlo(const Scenario& scenario, const McOptions& options) {
  scenario.check();
  check_options(options);
  std::vector<std::vector<ReplicateRecord>> records(static_cast<std::size_t>(options.replicates));
#pragma omp parallel for schedule(dynamic, 4)
  for (int rep = 0; rep < options.replicates; ++rep)
    records[static_cast<std::size_t>(rep)] = run_replicate(scenario, options, rep);
  return aggregate(scenario, options, records);
}

}  // namespace remeasure
