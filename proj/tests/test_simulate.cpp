#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "remeasure/simulate.hpp"
#include "support.hpp"

using namespace remeasure;

namespace {

// Standardized paired errors (S1, C2) pooled over replicates.
std::pair<std::vector<double>, std::vector<double>> paired_errors(const Scenario& sc, int reps) {
  std::vector<double> u, v;
  const auto& t = sc.truth;
  for (int r = 0; r < reps; ++r) {
    const Dataset d = generate_dataset(sc, static_cast<std::uint64_t>(r));
    for (Index i = 0; i < d.n1_prime(); ++i) {
      u.push_back((d.y_s1()(i) - d.z_s1().row(i).dot(t.b)) / t.sigma1);
      v.push_back((d.y_c2()(i) - d.z_c2().row(i).dot(t.b) - t.a1) / t.sigma2);
    }
  }
  return {u, v};
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const Eigen::Map<const VectorXd> x(a.data(), static_cast<Index>(a.size())), y(b.data(), static_cast<Index>(b.size()));
  const VectorXd xc = x.array() - x.mean(), yc = y.array() - y.mean();
  return xc.dot(yc) / std::sqrt(xc.squaredNorm() * yc.squaredNorm());
}

Scenario big_pairs(double rho, NoiseFamily noise = NoiseFamily::kGaussian) {
  Scenario sc = Scenario::standard(1000, 2, 1000, rho, 2.0, 0.5);
  sc.noise = noise;
  sc.seed = 77;
  return sc;
}

}  // namespace

TEST_CASE("generated datasets are valid and paired") {
  for (auto noise : {NoiseFamily::kGaussian, NoiseFamily::kCenteredGamma, NoiseFamily::kStudentT}) {
    Scenario sc = Scenario::standard(20, 15, 8, 0.6, 2.0, 0.5);
    sc.noise = noise;
    const Dataset d = generate_dataset(sc, 3);
    CHECK(d.z_s1() == d.z_c2());
    const Dataset again = validate_dataset(to_table(d));
    CHECK(again.y() == d.y());
  }
}

TEST_CASE("generation is deterministic per (seed, replicate)") {
  const Scenario sc = Scenario::standard(20, 15, 8, 0.6, 2.0, 0.5);
  CHECK(generate_dataset(sc, 4).y() == generate_dataset(sc, 4).y());
  CHECK(generate_dataset(sc, 4).y() != generate_dataset(sc, 5).y());
}

TEST_CASE("paired errors have the requested correlation") {
  auto [u, v] = paired_errors(big_pairs(0.9), 100);
  REQUIRE(u.size() == 100000);
  CHECK(std::abs(correlation(u, v) - 0.9) < 0.01);
  for (auto noise : {NoiseFamily::kCenteredGamma, NoiseFamily::kStudentT}) {
    auto [a, b] = paired_errors(big_pairs(0.9, noise), 100);
    CHECK(std::abs(correlation(a, b) - 0.9) < 0.01);
  }
}

TEST_CASE("paired errors are uncorrelated at rho = 0") {
  auto [u, v] = paired_errors(big_pairs(0.0), 100);
  CHECK(std::abs(correlation(u, v)) < 0.02);
}

TEST_CASE("error SD matches sigma1 for every noise family") {
  for (auto noise : {NoiseFamily::kGaussian, NoiseFamily::kCenteredGamma, NoiseFamily::kStudentT}) {
    Scenario sc = Scenario::standard(100000, 2, 0, 0.0, 2.0, 0.0, 0.0);
    sc.noise = noise;
    sc.design.p = 1;
    sc.truth.b = VectorXd::Zero(1);
    sc.covariates = MatrixXd::Ones(100002, 1);
    double sum = 0, sq = 0;
    long n = 0;
    for (int r = 0; r < 10; ++r) {
      const Dataset d = generate_dataset(sc, static_cast<std::uint64_t>(r));
      sum += d.y_c1().sum();
      sq += d.y_c1().squaredNorm();
      n += d.n1();
    }
    const double m = sum / n;
    const double sd = std::sqrt(sq / n - m * m);
    CHECK(std::abs(sd / 2.0 - 1.0) < 0.01);
    CHECK(std::abs(m) < 0.01);
  }
}

TEST_CASE("negative rho needs gaussian noise") {
  Scenario sc = Scenario::standard(20, 15, 8, -0.3, 2.0, 0.5);
  CHECK_NOTHROW(generate_dataset(sc));
  sc.noise = NoiseFamily::kStudentT;
  CHECK_THROWS_AS(generate_dataset(sc), InputError);
  CHECK(parse_noise("centered_gamma") == NoiseFamily::kCenteredGamma);
  CHECK_THROWS_AS(parse_noise("cauchy"), InputError);
}

TEST_CASE("Monte Carlo output does not depend on the worker count") {
  const Scenario sc = Scenario::standard(50, 50, 10, 0.6, 2.0, 0.0);
  McOptions o;
  o.methods = {Method::kRemeasure, Method::kBatch2, Method::kLs};
  o.replicates = 60;
  o.keep_replicates = true;
  const McSummary serial = monte_carlo_serial(sc, o);
  for (int threads : {1, 3, 4}) {
    omp_set_num_threads(threads);
    const McSummary par = monte_carlo(sc, o);
    for (std::size_t k = 0; k < o.methods.size(); ++k) {
      CHECK(par.methods[k].rejection_rate == serial.methods[k].rejection_rate);
      CHECK(par.methods[k].mse == serial.methods[k].mse);
      CHECK(par.methods[k].mean_variance == serial.methods[k].mean_variance);
      for (std::size_t r = 0; r < serial.methods[k].replicates.size(); ++r)
        CHECK(par.methods[k].replicates[r].p_value == serial.methods[k].replicates[r].p_value);
    }
  }
}

TEST_CASE("Monte Carlo summary invariants") {
  const Scenario sc = Scenario::standard(50, 50, 10, 0.6, 2.0, 0.5);
  McOptions o;
  o.methods = {Method::kRemeasure, Method::kBatch2};
  o.replicates = 100;
  const McSummary s = monte_carlo(sc, o);
  for (const auto& m : s.methods) {
    CHECK(m.successes + m.failures == 100);
    CHECK(m.rejection_rate >= 0.0);
    CHECK(m.rejection_rate <= 1.0);
    CHECK(m.sem_estimate == doctest::Approx(m.sd_estimate / std::sqrt(m.successes)));
  }
  CHECK(s.warnings.empty());
  o.replicates = 0;
  CHECK_THROWS_WITH_AS(monte_carlo(sc, o), doctest::Contains("empty experiment"), InputError);
}

TEST_CASE("failing replicates are counted and reported") {
  const Scenario sc = Scenario::standard(50, 50, 10, 0.6, 2.0, 0.5);
  McOptions o;
  o.methods = {Method::kRemeasure, Method::kBatch2};
  o.replicates = 20;
  o.fit.max_iter = 1;
  const McSummary s = monte_carlo(sc, o);
  CHECK(s.at(Method::kRemeasure).failures == 20);
  CHECK(s.at(Method::kBatch2).failures == 0);
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("remeasure") != std::string::npos);
}

TEST_CASE("at low correlation ReMeasure and Batch2 have similar MSE") {
  for (Index np : {15, 30}) {
    Scenario sc = Scenario::standard(50, 50, np, 0.3, 2.0, 0.5);
    sc.seed = 404;
    McOptions o;
    o.methods = {Method::kRemeasure, Method::kBatch2};
    const McSummary s = monte_carlo(sc, o);
    const double b2 = s.at(Method::kBatch2).mse;
    CHECK(std::abs(s.at(Method::kRemeasure).mse - b2) / b2 < 0.15);
  }
}

TEST_CASE("naive regression has less power than ReMeasure") {
  Scenario sc = Scenario::standard(50, 50, 25, 0.9, 2.0, 0.5);
  sc.seed = 505;
  McOptions o;
  o.methods = {Method::kRemeasure, Method::kNaive};
  const McSummary s = monte_carlo(sc, o);
  CHECK(s.at(Method::kNaive).rejection_rate < s.at(Method::kRemeasure).rejection_rate);
}
