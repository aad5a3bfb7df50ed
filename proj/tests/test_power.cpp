#include <doctest.h>

#include <cmath>

#include "remeasure/inference.hpp"
#include "remeasure/power.hpp"
#include "support.hpp"

using namespace remeasure;

namespace {

PowerQuery shiny(Index np = 50) {
  PowerQuery q;
  q.n1 = 50;
  q.n2 = 50;
  q.n1_prime = np;
  q.rho = 0.6;
  q.effect = 0.6;
  q.alpha = 0.05;
  return q;
}

double closed_form_sd(const PowerQuery& q) {
  const double n1 = static_cast<double>(q.n1), n2 = static_cast<double>(q.n2), np = static_cast<double>(q.n1_prime);
  return std::sqrt(1.0 / n2 + 1.0 / np - q.rho * q.rho * (1.0 / np - 1.0 / n1));
}

}  // namespace

TEST_CASE("oracle sd matches the intercept-only closed form") {
  for (double rho : {-0.4, 0.0, 0.3, 0.6, 0.95})
    for (double s1 : {0.5, 1.0, 2.0})
      for (Index np : {2, 7, 30, 50}) {
        PowerQuery q = shiny(np);
        q.rho = rho;
        q.sigma1 = s1;
        CHECK(oracle_sd_a0(q) == doctest::Approx(closed_form_sd(q)).epsilon(1e-12));
      }
}

TEST_CASE("rho = 0 gives the two-sample variance") {
  PowerQuery q = shiny(20);
  q.rho = 0.0;
  CHECK(std::abs(oracle_sd_a0(q) * oracle_sd_a0(q) - (1.0 / 50 + 1.0 / 20)) < 1e-10);
}

TEST_CASE("null power is the level") {
  PowerQuery q = shiny(20);
  q.effect = 0.0;
  CHECK(std::abs(theoretical_power(q).absolute_power - 0.05) < 1e-10);
  q.alpha = 0.01;
  CHECK(std::abs(theoretical_power(q).absolute_power - 0.01) < 1e-10);
}

TEST_CASE("relative power is one when every control is remeasured") {
  const auto r = theoretical_power(shiny(50));
  CHECK(r.relative_power == 1.0);
  CHECK(r.absolute_power == r.optimal_power);
}

TEST_CASE("absolute power never exceeds optimal power") {
  for (Index np = 2; np <= 50; ++np) {
    const auto r = theoretical_power(shiny(np));
    CHECK(r.absolute_power <= r.optimal_power + 1e-12);
    CHECK(r.relative_power >= 0.0);
  }
}

TEST_CASE("35 remeasured samples for 80% absolute power") {
  CHECK(theoretical_power(shiny(35)).absolute_power >= 0.80);
  CHECK(theoretical_power(shiny(34)).absolute_power < 0.80);
  const auto n = min_remeasured(shiny(), 0.8, PowerMode::kAbsolute);
  REQUIRE(n);
  CHECK(std::abs(*n - 35) <= 2);
}

TEST_CASE("19 remeasured samples for 80% of the optimal power") {
  const auto n = min_remeasured(shiny(), 0.8, PowerMode::kRelative);
  REQUIRE(n);
  CHECK(std::abs(*n - 19) <= 2);
}

TEST_CASE("a relative target close to one needs every control") {
  CHECK(min_remeasured(shiny(), 1.0 - 1e-12, PowerMode::kRelative) == Index{50});
}

TEST_CASE("unachievable absolute target") {
  PowerQuery q = shiny();
  q.effect = 0.1;
  CHECK_FALSE(min_remeasured(q, 0.9, PowerMode::kAbsolute).has_value());
  CHECK_THROWS_AS(min_remeasured(q, 1.5, PowerMode::kAbsolute), InputError);
}

TEST_CASE("min_remeasured agrees with a linear scan") {
  for (double rho : {0.3, 0.6, 0.9})
    for (double d : {0.3, 0.6, 1.0})
      for (double target : {0.5, 0.8, 0.95})
        for (auto mode : {PowerMode::kAbsolute, PowerMode::kRelative}) {
          PowerQuery q = shiny();
          q.rho = rho;
          q.effect = d;
          std::optional<Index> scan;
          for (Index m = 2; m <= q.n1 && !scan; ++m) {
            q.n1_prime = m;
            const auto r = theoretical_power(q);
            if ((mode == PowerMode::kAbsolute ? r.absolute_power : r.relative_power) >= target) scan = m;
          }
          CHECK(min_remeasured(q, target, mode) == scan);
        }
}

TEST_CASE("power curve is consistent, monotone, and ordered in rho") {
  PowerQuery lo = shiny();
  lo.rho = 0.3;
  PowerQuery hi = shiny();
  hi.rho = 0.9;
  const auto a = power_curve(lo, 2, 50);
  const auto b = power_curve(hi, 2, 50);
  REQUIRE(a.size() == 49);
  CHECK(a.front().n1_prime == 2);
  CHECK(a.back().n1_prime == 50);
  PowerQuery q = lo;
  q.n1_prime = 2;
  CHECK(a.front().power.absolute_power == theoretical_power(q).absolute_power);
  q.n1_prime = 50;
  CHECK(a.back().power.absolute_power == theoretical_power(q).absolute_power);
  for (std::size_t i = 1; i < a.size(); ++i) {
    CHECK(a[i].power.absolute_power >= a[i - 1].power.absolute_power);
    CHECK(a[i].power.oracle_sd <= a[i - 1].power.oracle_sd);
  }
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i].power.absolute_power >= a[i].power.absolute_power);
  CHECK_THROWS_AS(power_curve(lo, 1, 50), InputError);
  CHECK_THROWS_AS(power_curve(lo, 10, 51), InputError);
}

TEST_CASE("power is symmetric in the effect") {
  for (double d : {0.1, 0.5, 1.3}) {
    PowerQuery a = shiny(20), b = shiny(20);
    a.effect = d;
    b.effect = -d;
    CHECK(theoretical_power(a).absolute_power == doctest::Approx(theoretical_power(b).absolute_power).epsilon(1e-15));
  }
}

TEST_CASE("the fraction to remeasure falls as rho grows") {
  for (double target : {0.6, 0.8, 0.9}) {
    Index prev = 51;
    for (double rho : {0.3, 0.6, 0.9}) {
      PowerQuery q = shiny();
      q.rho = rho;
      const auto n = min_remeasured(q, target, PowerMode::kRelative);
      REQUIRE(n);
      CHECK(*n <= prev);
      prev = *n;
    }
  }
}

TEST_CASE("the batch location effect does not change power or the estimate") {
  PowerQuery q = shiny(20);
  const double base = theoretical_power(q).absolute_power;
  Scenario sc = Scenario::standard(50, 50, 20, 0.6, 1.0, 0.6, 0.0);
  sc.seed = 3;
  const Dataset d0 = generate_dataset(sc, 0);
  const double a0 = fit_mle(d0).theta.a0;
  for (double a1 : {0.0, 0.5, 5.0}) {
    q.a1 = a1;
    CHECK(theoretical_power(q).absolute_power == base);
    VectorXd y = d0.y();
    y.tail(d0.n2() + d0.n1_prime()).array() += a1;
    CHECK(fit_mle(d0.with_response(y)).theta.a0 == doctest::Approx(a0).epsilon(1e-7));
  }
}

TEST_CASE("oracle sd agrees with the Monte Carlo sd of the estimate") {
  Scenario sc = Scenario::standard(50, 50, 25, 0.6, 2.0, 0.6);
  sc.design.p = 1;
  sc.truth.b = VectorXd::Zero(1);
  sc.covariates = MatrixXd::Ones(100, 1);
  sc.seed = 2024;
  const int reps = 10000;
  double sum = 0, sq = 0;
  for (int r = 0; r < reps; ++r) {
    const double e = fit_mle(generate_dataset(sc, static_cast<std::uint64_t>(r))).theta.a0;
    sum += e;
    sq += e * e;
  }
  const double m = sum / reps;
  const double sd = std::sqrt((sq - reps * m * m) / (reps - 1));
  PowerQuery q = shiny(25);
  q.sigma1 = 2.0;
  CHECK(std::abs(oracle_sd_a0(q) / sd - 1.0) < 0.05);
}

TEST_CASE("query invariants") {
  PowerQuery q = shiny();
  q.alpha = 1.5;
  CHECK_THROWS_WITH_AS(q.check(), doctest::Contains("alpha"), InputError);
  q = shiny();
  q.rho = 1.0;
  CHECK_THROWS_AS(q.check(), InputError);
  q = shiny();
  q.n1_prime = 60;
  CHECK_THROWS_AS(q.check(), InputError);
  q = shiny();
  q.sigma1 = 0;
  CHECK_THROWS_AS(q.check(), InputError);
  CHECK(parse_power_mode("relative") == PowerMode::kRelative);
  CHECK_THROWS_AS(parse_power_mode("both"), InputError);
}
