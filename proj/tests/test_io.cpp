#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "remeasure/io.hpp"
#include "support.hpp"

using namespace remeasure;

namespace {

const char* kSamples =
    "sample_id,pair_id,group,batch,y,z1\n"
    "a,p1,0,1,1.5,0.7\n"
    "b,,0,1,1.0,-0.2\n"
    "c,,1,2,3.0,0.4\n"
    "d,,1,2,3.5,1.1\n"
    "a2,p1,0,2,2.5,0.7\n";

// Step-up BH written directly from the definition: q_(i) = min_{j >= i} p_(j) m / j.
std::vector<double> bh_oracle(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<double> q(m);
  for (std::size_t i = 0; i < m; ++i) {
    double best = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t rank = 0;  // 1-based rank of p[j], ties broken by index
      for (std::size_t k = 0; k < m; ++k)
        if (p[k] < p[j] || (p[k] == p[j] && k <= j)) ++rank;
      std::size_t rank_i = 0;
      for (std::size_t k = 0; k < m; ++k)
        if (p[k] < p[i] || (p[k] == p[i] && k <= i)) ++rank_i;
      if (rank >= rank_i) best = std::min(best, p[j] * static_cast<double>(m) / static_cast<double>(rank));
    }
    q[i] = best;
  }
  return q;
}

}  // namespace

TEST_CASE("CSV line splitting") {
  CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split_csv_line("\"x,y\",\"he said \"\"hi\"\"\"\r") == std::vector<std::string>{"x,y", "he said \"hi\""});
}

TEST_CASE("reading a sample table") {
  std::istringstream in(kSamples);
  const Dataset d = validate_dataset(read_sample_csv(in));
  CHECK(d.n1() == 2);
  CHECK(d.n2() == 2);
  CHECK(d.n1_prime() == 1);
  CHECK(d.p() == 2);
  CHECK(d.y_c2()(0) == 2.5);
  CHECK(d.z_c2()(0, 1) == 0.7);
}

TEST_CASE("CSV errors") {
  std::istringstream missing("sample_id,group,batch,y\na,0,1,1\n");
  CHECK_THROWS_WITH_AS(read_sample_csv(missing), doctest::Contains("pair_id"), InputError);
  std::istringstream bad("sample_id,pair_id,group,batch,y\na,,0,1,abc\n");
  CHECK_THROWS_WITH_AS(read_sample_csv(bad), doctest::Contains("not a number"), InputError);
  std::istringstream ragged("sample_id,pair_id,group,batch,y\na,,0,1\n");
  CHECK_THROWS_AS(read_sample_csv(ragged), InputError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_sample_csv(empty), InputError);
  std::istringstream noy("sample_id,pair_id,group,batch\na,,0,1\n");
  CHECK_THROWS_AS(read_sample_csv(noy), InputError);
  std::istringstream noy2("sample_id,pair_id,group,batch\na,,0,1\n");
  CHECK_NOTHROW(read_sample_csv(noy2, false));
}

TEST_CASE("feature matrix aligns columns by sample id") {
  std::istringstream meta(
      "sample_id,pair_id,group,batch\n"
      "a,p1,0,1\nb,,0,1\nc,,1,2\nd,,1,2\na2,p1,0,2\n");
  std::istringstream feats(
      "feature_id,d,c,b,a2,a\n"
      "g1,4,3,2,5,1\n"
      "g2,40,30,20,50,10\n");
  const auto in = read_feature_matrix(meta, feats);
  REQUIRE(in.values.rows() == 2);
  CHECK(in.feature_ids == std::vector<std::string>{"g1", "g2"});
  for (Index j = 0; j < 5; ++j) CHECK(in.values(1, j) == 10 * in.values(0, j));
  CHECK(in.values(0, 0) == 1);  // sample a
  CHECK(in.values(0, 4) == 5);  // sample a2
}

TEST_CASE("feature matrix errors") {
  auto meta = [] { return std::istringstream("sample_id,pair_id,group,batch\na,,0,1\nb,,1,2\n"); };
  {
    auto m = meta();
    std::istringstream f("feature_id,a,zz\ng,1,2\n");
    CHECK_THROWS_AS(read_feature_matrix(m, f), InputError);
  }
  {
    auto m = meta();
    std::istringstream f("feature_id,a,b\ng,1,2\ng,3,4\n");
    CHECK_THROWS_WITH_AS(read_feature_matrix(m, f), doctest::Contains("duplicate feature"), InputError);
  }
  {
    auto m = meta();
    std::istringstream f("feature_id,a\ng,1\n");
    CHECK_THROWS_AS(read_feature_matrix(m, f), InputError);
  }
}

TEST_CASE("Benjamini-Hochberg matches the definition") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(1 + trial * 3);
    for (auto& v : p) v = std::pow(u(rng), 3);
    if (p.size() > 3) p[2] = p[1];  // a tie
    const auto q = bh_adjust(p);
    const auto o = bh_oracle(p);
    REQUIRE(q.size() == o.size());
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(q[i] == doctest::Approx(o[i]).epsilon(1e-14));
  }
}

TEST_CASE("scenario JSON round trip") {
  Scenario sc = Scenario::standard(30, 20, 10, 0.6, 2.0, 0.5);
  sc.noise = NoiseFamily::kStudentT;
  sc.seed = 42;
  const Scenario back = scenario_from_json(json::parse(scenario_to_json(sc).dump()));
  CHECK(back.design == sc.design);
  CHECK(back.truth.b == sc.truth.b);
  CHECK(back.truth.rho == sc.truth.rho);
  CHECK(back.noise == sc.noise);
  CHECK(back.seed == 42);
  CHECK(generate_dataset(back, 1).y() == generate_dataset(sc, 1).y());
  CHECK_THROWS_AS(scenario_from_json(json{{"n1", 10}}), InputError);
}

TEST_CASE("JSON and CSV summaries") {
  const Scenario sc = Scenario::standard(30, 20, 10, 0.6, 2.0, 0.5);
  McOptions o;
  o.methods = {Method::kRemeasure, Method::kBatch2};
  o.replicates = 10;
  const McSummary s = monte_carlo(sc, o);
  const json j = to_json(s);
  CHECK(j["methods"].size() == 2);
  CHECK(j["methods"][0]["method"] == "remeasure");
  std::ostringstream csv;
  write_summary_csv(csv, s);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.rfind("method,replicates", 0) == 0);

  TestResult r;
  r.method = "batch2";
  r.df = 10;
  CHECK(to_json(r).contains("stderr"));
  CHECK(to_json(r)["df"] == 10.0);
}
