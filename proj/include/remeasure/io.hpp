#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "remeasure/estimator.hpp"
#include "remeasure/power.hpp"
#include "remeasure/regression.hpp"
#include "remeasure/simulate.hpp"

namespace remeasure {

using nlohmann::json;

/// Splits one CSV line; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

/// Long-format sample table: header with sample_id, pair_id, group, batch, y
/// and any number of covariate columns named z<k> (taken in header order).
/// When `require_y` is false the y column may be absent (matrix metadata).
SampleTable read_sample_csv(std::istream& in, bool require_y = true);

/// Per-sample metadata plus a features x samples response matrix.
struct FeatureMatrixInput {
  SampleTable metadata;
  std::vector<std::string> feature_ids;
  MatrixXd values;  // row f, column j = sample metadata[j]
};

/// Features CSV: `feature_id` first, then one column per sample id present in
/// the metadata (any order).
FeatureMatrixInput read_feature_matrix(std::istream& metadata_csv, std::istream& features_csv);

json to_json(const TestResult& r);
json to_json(const ParameterVector& t);
json to_json(const FitResult& r);
json to_json(const PowerResult& r);
json to_json(const McSummary& s);

/// Scenario document: n1, n2, n1_prime, a0, a1, b, rho, sigma1, sigma2,
/// noise, seed and optional covariates (rows of the n1 + n2 original samples).
Scenario scenario_from_json(const json& j);
json scenario_to_json(const Scenario& s);

/// One row per method.
void write_summary_csv(std::ostream& out, const McSummary& s);

}  // namespace remeasure
