#include "remeasure/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace remeasure {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, std::size_t line, const std::string& col) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw InputError("line " + std::to_string(line) + ": column '" + col + "' is not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& raw, std::size_t line, const std::string& col) {
  const double v = parse_double(raw, line, col);
  if (v != static_cast<int>(v))
    throw InputError("line " + std::to_string(line) + ": column '" + col + "' must be an integer");
  return static_cast<int>(v);
}

bool read_row(std::istream& in, std::vector<std::string>& fields) {
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    fields = split_csv_line(line);
    for (auto& f : fields) f = trim(f);
    return true;
  }
  return false;
}

}  // namespace

SampleTable read_sample_csv(std::istream& in, bool require_y) {
  std::vector<std::string> header;
  if (!read_row(in, header)) throw InputError("sample CSV: missing header");
  std::unordered_map<std::string, std::size_t> col;
  std::vector<std::size_t> zcols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    col[header[j]] = j;
    if (header[j].size() > 1 && header[j][0] == 'z') zcols.push_back(j);
  }
  for (const char* name : {"sample_id", "pair_id", "group", "batch"})
    if (!col.count(name)) throw InputError(std::string("sample CSV: missing column '") + name + "'");
  const bool has_y = col.count("y") > 0;
  if (require_y && !has_y) throw InputError("sample CSV: missing column 'y'");

  SampleTable table;
  std::vector<std::string> f;
  std::size_t line = 1;
  while (read_row(in, f)) {
    ++line;
    if (f.size() != header.size())
      throw InputError("line " + std::to_string(line) + ": expected " + std::to_string(header.size()) + " fields");
    SampleRecord r;
    r.sample_id = f[col["sample_id"]];
    r.pair_id = f[col["pair_id"]];
    r.group = parse_int(f[col["group"]], line, "group");
    r.batch = parse_int(f[col["batch"]], line, "batch");
    r.y = has_y ? parse_double(f[col["y"]], line, "y") : 0.0;
    for (auto j : zcols) r.z.push_back(parse_double(f[j], line, header[j]));
    table.push_back(std::move(r));
  }
  if (table.empty()) throw InputError("sample CSV: no data rows");
  return table;
}

FeatureMatrixInput read_feature_matrix(std::istream& metadata_csv, std::istream& features_csv) {
  FeatureMatrixInput in;
  in.metadata = read_sample_csv(metadata_csv, false);
  std::unordered_map<std::string, std::size_t> sample_pos;
  for (std::size_t j = 0; j < in.metadata.size(); ++j)
    if (!sample_pos.emplace(in.metadata[j].sample_id, j).second)
      throw InputError("metadata: duplicate sample id '" + in.metadata[j].sample_id + "'");

  std::vector<std::string> header;
  if (!read_row(features_csv, header) || header.empty() || header[0] != "feature_id")
    throw InputError("features CSV: header must start with 'feature_id'");
  std::vector<std::size_t> target(header.size());
  std::vector<bool> seen(in.metadata.size(), false);
  for (std::size_t c = 1; c < header.size(); ++c) {
    auto it = sample_pos.find(header[c]);
    if (it == sample_pos.end()) throw InputError("features CSV: unknown sample '" + header[c] + "'");
    if (seen[it->second]) throw InputError("features CSV: duplicate sample column '" + header[c] + "'");
    seen[it->second] = true;
    target[c] = it->second;
  }
  if (header.size() - 1 != in.metadata.size())
    throw InputError("features CSV: every metadata sample needs a column");

  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> f;
  std::size_t line = 1;
  while (read_row(features_csv, f)) {
    ++line;
    if (f.size() != header.size()) throw InputError("line " + std::to_string(line) + ": wrong field count");
    if (!ids.emplace(f[0], 0).second) throw InputError("features CSV: duplicate feature id '" + f[0] + "'");
    std::vector<double> v(in.metadata.size());
    for (std::size_t c = 1; c < f.size(); ++c) v[target[c]] = parse_double(f[c], line, header[c]);
    in.feature_ids.push_back(f[0]);
    rows.push_back(std::move(v));
  }
  in.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(in.metadata.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) in.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return in;
}

json to_json(const TestResult& r) {
  json j{{"method", r.method},
         {"estimate", r.estimate},
         {"stderr", r.std_error},
         {"statistic", r.statistic},
         {"p_value", r.p_value}};
  if (r.df > 0.0) j["df"] = r.df;
  if (r.bootstrap_replicates > 0) j["bootstrap_replicates"] = r.bootstrap_replicates;
  return j;
}

json to_json(const ParameterVector& t) {
  return json{{"a0", t.a0},
              {"a1", t.a1},
              {"b", std::vector<double>(t.b.data(), t.b.data() + t.b.size())},
              {"rho", t.rho},
              {"sigma1", t.sigma1},
              {"sigma2", t.sigma2}};
}

json to_json(const FitResult& r) {
  return json{{"theta", to_json(r.theta)},
              {"loglik", r.loglik},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"max_score", r.max_score}};
}

json to_json(const PowerResult& r) {
  return json{{"absolute_power", r.absolute_power},
              {"optimal_power", r.optimal_power},
              {"relative_power", r.relative_power},
              {"oracle_sd", r.oracle_sd}};
}

json to_json(const McSummary& s) {
  json methods = json::array();
  for (const auto& m : s.methods) {
    methods.push_back({{"method", to_string(m.method)},
                       {"successes", m.successes},
                       {"failures", m.failures},
                       {"rejection_rate", m.rejection_rate},
                       {"mse", m.mse},
                       {"mean_estimate", m.mean_estimate},
                       {"sd_estimate", m.sd_estimate},
                       {"sem_estimate", m.sem_estimate},
                       {"mean_variance", m.mean_variance}});
  }
  return json{{"replicates", s.replicates},
              {"alpha", s.alpha},
              {"truth_a0", s.truth_a0},
              {"methods", methods},
              {"warnings", s.warnings}};
}

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.design.n1 = j.at("n1").get<Index>();
    s.design.n2 = j.at("n2").get<Index>();
    s.design.n1_prime = j.at("n1_prime").get<Index>();
    s.truth.a0 = j.value("a0", 0.0);
    s.truth.a1 = j.value("a1", 0.5);
    s.truth.rho = j.at("rho").get<double>();
    s.truth.sigma1 = j.value("sigma1", 1.0);
    s.truth.sigma2 = j.value("sigma2", 1.0);
    s.noise = parse_noise(j.value("noise", std::string("gaussian")));
    s.seed = j.value("seed", std::uint64_t{1});
    const auto b = j.value("b", std::vector<double>{0.0, -0.5});
    s.truth.b = Eigen::Map<const VectorXd>(b.data(), static_cast<Index>(b.size()));
    s.design.p = s.truth.b.size();
    if (j.contains("covariates")) {
      const auto rows = j.at("covariates").get<std::vector<std::vector<double>>>();
      MatrixXd z(static_cast<Index>(rows.size()), s.design.p);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Index>(rows[r].size()) != s.design.p)
          throw InputError("scenario: covariate rows must have as many entries as b");
        for (std::size_t c = 0; c < rows[r].size(); ++c) z(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
      }
      s.covariates = std::move(z);
    }
    s.check();
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("scenario JSON: ") + e.what());
  }
}

json scenario_to_json(const Scenario& s) {
  json j{{"n1", s.design.n1},
         {"n2", s.design.n2},
         {"n1_prime", s.design.n1_prime},
         {"a0", s.truth.a0},
         {"a1", s.truth.a1},
         {"b", std::vector<double>(s.truth.b.data(), s.truth.b.data() + s.truth.b.size())},
         {"rho", s.truth.rho},
         {"sigma1", s.truth.sigma1},
         {"sigma2", s.truth.sigma2},
         {"noise", to_string(s.noise)},
         {"seed", s.seed}};
  if (s.covariates) {
    json rows = json::array();
    for (Index r = 0; r < s.covariates->rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(s.covariates->cols()));
      for (Index c = 0; c < s.covariates->cols(); ++c) row[static_cast<std::size_t>(c)] = (*s.covariates)(r, c);
      rows.push_back(row);
    }
    j["covariates"] = rows;
  }
  return j;
}

void write_summary_csv(std::ostream& out, const McSummary& s) {
  out << "method,replicates,successes,failures,alpha,rejection_rate,mse,mean_estimate,sd_estimate,"
         "sem_estimate,mean_variance\n";
  const auto old = out.precision(17);
  for (const auto& m : s.methods) {
    out << to_string(m.method) << ',' << s.replicates << ',' << m.successes << ',' << m.failures << ','
        << s.alpha << ',' << m.rejection_rate << ',' << m.mse << ',' << m.mean_estimate << ','
        << m.sd_estimate << ',' << m.sem_estimate << ',' << m.mean_variance << '\n';
  }
  out.precision(old);
}

}  // namespace remeasure
