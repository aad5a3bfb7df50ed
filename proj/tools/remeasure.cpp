// remeasure: command-line front end.
//
//   remeasure fit data.csv [--method M] [--bootstrap B]
//   remeasure fit meta.csv --per-feature --features features.csv [--fdr Q]
//   remeasure simulate scenario.json [--reps N] [--methods a,b] [--alpha A] [--out PREFIX]
//   remeasure power --n1 50 --n2 50 --rho 0.6 --d 0.6 [--n1-prime 2..50 | --target 0.8 --mode absolute]
//   remeasure serve [--port P]
//
// Exit codes: 0 ok, 2 input error, 3 numerical failure, 4 internal error.

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "remeasure/baselines.hpp"
#include "remeasure/inference.hpp"
#include "remeasure/io.hpp"
#include "remeasure/methods.hpp"
#include "remeasure/power.hpp"
#include "remeasure/power_service.hpp"
#include "remeasure/simulate.hpp"

using namespace remeasure;

namespace {

enum Exit { kOk = 0, kInput = 2, kNumerical = 3, kInternal = 4 };

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool json = false;
};

struct FitArgs {
  std::string data;
  std::string method = "remeasure";
  int bootstrap = 0;
  bool per_feature = false;
  std::string features;
  std::optional<double> fdr;
};

struct SimulateArgs {
  std::string scenario;
  int reps = 1000;
  std::string methods = "remeasure,batch2,ignore,ls";
  double alpha = 0.05;
  int bootstrap_reps = 300;
  std::string out;
};

struct PowerArgs {
  Index n1 = 0, n2 = 0;
  double rho = 0.0, d = 0.0, alpha = 0.05, sigma1 = 1.0, a1 = 0.0;
  std::string n1_prime;
  std::optional<double> target;
  std::string mode = "absolute";
  bool csv = false;
};

struct ServeArgs {
  std::optional<int> port;
  std::string host = "0.0.0.0";
  std::string cors = "*";
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

int error_exit(int code, const char* kind, const std::string& message) {
  const json j{{"error", {{"kind", kind}, {"code", code}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
  return code;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

MethodOptions method_options(const Globals& g, int bootstrap) {
  MethodOptions o;
  o.bootstrap_seed = g.seed.value_or(1);
  if (bootstrap > 0) o.bootstrap_replicates = bootstrap;
  o.parallel_bootstrap = true;
  return o;
}

Method resolve_method(const FitArgs& a) {
  Method m = parse_method(a.method);
  if (a.bootstrap > 0) {
    if (m != Method::kRemeasure && m != Method::kRemeasureBoot)
      throw InputError("--bootstrap applies to the remeasure method only");
    m = Method::kRemeasureBoot;
  }
  return m;
}

int fit_single(const Globals& g, const FitArgs& a) {
  auto in = open_input(a.data);
  const Dataset data = validate_dataset(read_sample_csv(in));
  const Method m = resolve_method(a);
  const MethodOptions opt = method_options(g, a.bootstrap);

  json out;
  out["design"] = {{"n1", data.n1()}, {"n2", data.n2()}, {"n1_prime", data.n1_prime()}, {"p", data.p()}};
  TestResult test;
  if (m == Method::kRemeasure || m == Method::kRemeasureBoot) {
    const FitResult fit = fit_mle(data, opt.fit);
    out["fit"] = to_json(fit);
    if (!fit.converged) {
      if (g.json) std::cout << out.dump(2) << '\n';
      return error_exit(kNumerical, "numerical",
                        "maximum likelihood fit did not converge after " + std::to_string(fit.iterations) +
                            " iterations (max |score| " + fmt(fit.max_score) + ")");
    }
    if (m == Method::kRemeasure) {
      test = z_test(fit, variance_a0(data, fit));
    } else {
      BootstrapOptions bo;
      bo.replicates = opt.bootstrap_replicates;
      bo.seed = opt.bootstrap_seed;
      bo.fit = opt.fit;
      test = residual_bootstrap(data, fit, bo);
    }
  } else {
    test = run_method(m, data, opt);
  }
  out["test"] = to_json(test);

  if (g.json) {
    std::cout << out.dump(2) << '\n';
    return kOk;
  }
  std::cout << "method      " << test.method << '\n'
            << "samples     n1=" << data.n1() << " n2=" << data.n2() << " n1'=" << data.n1_prime() << '\n';
  if (out.contains("fit")) {
    const auto& t = out["fit"]["theta"];
    std::cout << "theta       a0=" << fmt(t["a0"]) << " a1=" << fmt(t["a1"]) << " rho=" << fmt(t["rho"])
              << " sigma1=" << fmt(t["sigma1"]) << " sigma2=" << fmt(t["sigma2"]) << '\n';
  }
  std::cout << "estimate    " << fmt(test.estimate) << '\n'
            << "stderr      " << fmt(test.std_error) << '\n'
            << "statistic   " << fmt(test.statistic) << '\n'
            << "p-value     " << fmt(test.p_value) << '\n';
  return kOk;
}

int fit_matrix(const Globals& g, const FitArgs& a) {
  if (a.features.empty()) throw InputError("--per-feature needs --features FILE");
  if (a.fdr && !(*a.fdr > 0.0 && *a.fdr < 1.0)) throw InputError("--fdr must lie in (0, 1)");
  auto meta = open_input(a.data);
  auto feats = open_input(a.features);
  const FeatureMatrixInput in = read_feature_matrix(meta, feats);
  const Dataset layout = validate_dataset(in.metadata);

  // Column of the features matrix feeding each canonical row.
  std::unordered_map<std::string, Index> column;
  for (std::size_t j = 0; j < in.metadata.size(); ++j) column[in.metadata[j].sample_id] = static_cast<Index>(j);
  std::vector<Index> source(layout.sample_ids().size());
  for (std::size_t r = 0; r < source.size(); ++r) source[r] = column.at(layout.sample_ids()[r]);

  const Method m = resolve_method(a);
  MethodOptions opt = method_options(g, a.bootstrap);
  opt.parallel_bootstrap = false;
  const Index nf = in.values.rows();
  std::vector<TestResult> results(static_cast<std::size_t>(nf));
  std::vector<std::string> errors(static_cast<std::size_t>(nf));

#pragma omp parallel for schedule(dynamic)
  for (Index f = 0; f < nf; ++f) {
    VectorXd y(static_cast<Index>(source.size()));
    for (std::size_t r = 0; r < source.size(); ++r) y(static_cast<Index>(r)) = in.values(f, source[r]);
    try {
      results[static_cast<std::size_t>(f)] = run_method(m, layout.with_response(y), opt);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(f)] = e.what();
    }
  }

  std::vector<double> p;
  std::vector<std::size_t> ok;
  for (std::size_t f = 0; f < results.size(); ++f)
    if (errors[f].empty()) {
      ok.push_back(f);
      p.push_back(results[f].p_value);
    }
  const std::vector<double> q_ok = bh_adjust(p);
  std::vector<double> q(results.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < ok.size(); ++k) q[ok[k]] = q_ok[k];
  const double level = a.fdr.value_or(0.05);

  if (g.json) {
    json rows = json::array();
    for (std::size_t f = 0; f < results.size(); ++f) {
      json r{{"feature_id", in.feature_ids[f]}};
      if (!errors[f].empty()) {
        r["error"] = errors[f];
      } else {
        r.update(to_json(results[f]));
        r["q_value"] = q[f];
        r["significant"] = q[f] <= level;
      }
      rows.push_back(r);
    }
    std::cout << json{{"method", to_string(m)}, {"fdr", level}, {"features", rows}}.dump(2) << '\n';
  } else {
    std::cout << "feature_id,estimate,stderr,statistic,p_value,q_value,significant,error\n";
    std::cout << std::setprecision(10);
    for (std::size_t f = 0; f < results.size(); ++f) {
      std::cout << in.feature_ids[f] << ',';
      if (errors[f].empty()) {
        const auto& r = results[f];
        std::cout << r.estimate << ',' << r.std_error << ',' << r.statistic << ',' << r.p_value << ',' << q[f]
                  << ',' << (q[f] <= level ? 1 : 0) << ",\n";
      } else {
        std::cout << "NA,NA,NA,NA,NA,NA,\"" << errors[f] << "\"\n";
      }
    }
  }
  return kOk;
}

int cmd_fit(const Globals& g, const FitArgs& a) { return a.per_feature ? fit_matrix(g, a) : fit_single(g, a); }

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  auto in = open_input(a.scenario);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(std::string("scenario JSON: ") + e.what());
  }
  Scenario sc = scenario_from_json(doc);
  if (g.seed) sc.seed = *g.seed;

  McOptions o;
  o.methods = parse_methods(a.methods);
  o.replicates = a.reps;
  o.alpha = a.alpha;
  o.bootstrap_replicates = a.bootstrap_reps;
  const McSummary s = monte_carlo(sc, o);

  json out = to_json(s);
  out["scenario"] = scenario_to_json(sc);
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
  if (a.out.empty()) {
    std::cout << out.dump(2) << '\n';
    return kOk;
  }
  std::ofstream js(a.out + ".json"), csv(a.out + ".csv");
  if (!js || !csv) throw InputError("cannot write to '" + a.out + ".{json,csv}'");
  js << out.dump(2) << '\n';
  write_summary_csv(csv, s);
  if (g.json) std::cout << out.dump(2) << '\n';
  return kOk;
}

std::pair<Index, Index> parse_range(const std::string& s, Index n1) {
  if (s.empty()) return {2, n1};
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const Index v = std::stol(s);
      return {v, v};
    }
    return {std::stol(s.substr(0, dots)), std::stol(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw InputError("--n1-prime must be N or A..B");
  }
}

int cmd_power(const Globals& g, const PowerArgs& a) {
  PowerQuery q;
  q.n1 = a.n1;
  q.n2 = a.n2;
  q.n1_prime = a.n1;
  q.rho = a.rho;
  q.effect = a.d;
  q.alpha = a.alpha;
  q.sigma1 = a.sigma1;
  q.a1 = a.a1;
  q.check();
  const PowerMode mode = parse_power_mode(a.mode);
  const auto [lo, hi] = parse_range(a.n1_prime, q.n1);
  const auto curve = power_curve(q, lo, hi);

  if (a.csv) {
    std::cout << "n1_prime,absolute_power,relative_power,optimal_power,oracle_sd\n" << std::setprecision(12);
    for (const auto& pt : curve)
      std::cout << pt.n1_prime << ',' << pt.power.absolute_power << ',' << pt.power.relative_power << ','
                << pt.power.optimal_power << ',' << pt.power.oracle_sd << '\n';
    return kOk;
  }

  json out;
  out["query"] = {{"n1", q.n1}, {"n2", q.n2}, {"rho", q.rho}, {"d", q.effect},
                  {"alpha", q.alpha}, {"sigma1", q.sigma1}, {"a1", q.a1}};
  json pts = json::array();
  for (const auto& pt : curve) {
    json j = to_json(pt.power);
    j["n1_prime"] = pt.n1_prime;
    pts.push_back(j);
  }
  out["curve"] = pts;
  if (a.target) {
    const auto n = min_remeasured(q, *a.target, mode);
    out["min_remeasured"] = {{"target", *a.target}, {"mode", to_string(mode)}};
    if (n) {
      out["min_remeasured"]["n1_prime"] = *n;
    } else {
      out["min_remeasured"]["n1_prime"] = nullptr;
      out["min_remeasured"]["max_power"] = power_at(q.effect, oracle_sd_a0(q), q.alpha);
    }
  }
  if (g.json || !a.target) {
    std::cout << out.dump(2) << '\n';
  } else {
    const auto& mr = out["min_remeasured"];
    if (mr["n1_prime"].is_null())
      std::cout << "target " << *a.target << " (" << a.mode << ") unachievable; max power "
                << fmt(mr["max_power"]) << '\n';
    else
      std::cout << mr["n1_prime"].get<Index>() << '\n';
  }
  return kOk;
}

int cmd_serve(const ServeArgs& a) {
  ServiceOptions o;
  o.host = a.host;
  o.cors_origin = a.cors;
  if (a.port) {
    o.port = *a.port;
  } else if (const char* env = std::getenv("REMEASURE_PORT")) {
    o.port = std::atoi(env);
  }
  if (o.port < 0 || o.port > 65535) throw InputError("port must lie in [0, 65535]");
  PowerService svc(o);
  std::cerr << "listening on " << o.host << ':' << o.port << '\n';
  if (!svc.listen()) throw InputError("cannot bind " + o.host + ":" + std::to_string(o.port));
  return kOk;
}

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("REMEASURE_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch-effect correction with remeasured samples"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for bootstrap and simulation streams");
  app.add_option("--threads", g.threads, "Worker threads (default: REMEASURE_THREADS or all cores)");
  app.add_flag("--json", g.json, "Emit JSON on stdout");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Estimate and test the biological effect");
  fit->add_option("data", fa.data, "Sample CSV (metadata CSV with --per-feature)")->required();
  fit->add_option("--method", fa.method, "remeasure, remeasure_boot, batch2, ignore, naive, ls, lsind");
  fit->add_option("--bootstrap", fa.bootstrap, "Residual bootstrap replicates")->check(CLI::Range(100, 1000000));
  fit->add_flag("--per-feature", fa.per_feature, "Fit every feature of a features x samples matrix");
  fit->add_option("--features", fa.features, "Features CSV (feature_id, then one column per sample)");
  fit->add_option("--fdr", fa.fdr, "Benjamini-Hochberg level for the significant column");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo experiment");
  sim->add_option("scenario", sa.scenario, "Scenario JSON")->required();
  sim->add_option("--reps", sa.reps, "Replicates");
  sim->add_option("--methods", sa.methods, "Comma-separated methods");
  sim->add_option("--alpha", sa.alpha, "Test level");
  sim->add_option("--bootstrap-reps", sa.bootstrap_reps, "Bootstrap replicates for remeasure_boot");
  sim->add_option("--out", sa.out, "Write PREFIX.json and PREFIX.csv");

  PowerArgs pa;
  auto* pow = app.add_subcommand("power", "Analytic power and minimal remeasurement");
  pow->add_option("--n1", pa.n1, "Batch-1 controls")->required();
  pow->add_option("--n2", pa.n2, "Batch-2 cases")->required();
  pow->add_option("--rho", pa.rho, "Between-batch correlation")->required();
  pow->add_option("--d", pa.d, "Effect size (Cohen's d)")->required();
  pow->add_option("--alpha", pa.alpha, "Test level");
  pow->add_option("--sigma1", pa.sigma1, "Batch-1 SD (batch-2 SD is 1)");
  pow->add_option("--a1", pa.a1, "Batch location effect");
  pow->add_option("--n1-prime", pa.n1_prime, "N or A..B (default 2..n1)");
  pow->add_option("--target", pa.target, "Power target in (0, 1)");
  pow->add_option("--mode", pa.mode, "absolute or relative")->check(CLI::IsMember({"absolute", "relative"}));
  pow->add_flag("--csv", pa.csv, "Emit the curve as CSV");

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "Run the power HTTP service");
  serve->add_option("--port", va.port, "Port (default: REMEASURE_PORT or 8080)");
  serve->add_option("--host", va.host, "Bind address");
  serve->add_option("--cors-origin", va.cors, "Access-Control-Allow-Origin value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    apply_threads(g.threads);
    if (*fit) return cmd_fit(g, fa);
    if (*sim) return cmd_simulate(g, sa);
    if (*pow) return cmd_power(g, pa);
    if (*serve) return cmd_serve(va);
    return kInput;
  } catch (const InputError& e) {
    return error_exit(kInput, "input", e.what());
  } catch (const NumericalError& e) {
    return error_exit(kNumerical, "numerical", e.what());
  } catch (const std::exception& e) {
    return error_exit(kInternal, "internal", e.what());
  }
}
