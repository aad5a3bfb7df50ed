#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "remeasure/error.hpp"

namespace remeasure {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Sample counts of a confounded two-batch design.
///
/// Controls are measured in batch 1 (n1 of them), cases in batch 2 (n2), and
/// the first n1_prime controls are measured a second time in batch 2.
struct StudyDesign {
  Index n1 = 0;
  Index n2 = 0;
  Index n1_prime = 0;
  Index p = 1;

  Index n_original() const { return n1 + n2; }
  Index n_rows() const { return n1 + n2 + n1_prime; }

  /// Throws InputError when a count invariant is violated.
  void check() const;

  friend bool operator==(const StudyDesign&, const StudyDesign&) = default;
};

/// theta = (a0, a1, b, rho, sigma1, sigma2).
struct ParameterVector {
  double a0 = 0.0;      // biological effect
  double a1 = 0.0;      // batch location effect
  VectorXd b;           // covariate coefficients, b[0] multiplies the intercept
  double rho = 0.0;     // between-batch correlation of remeasured pairs
  double sigma1 = 1.0;  // batch-1 error SD
  double sigma2 = 1.0;  // batch-2 error SD

  bool is_valid() const;
  void check() const;
};

/// One row of a long-format sample table, before validation.
struct SampleRecord {
  std::string sample_id;
  std::string pair_id;  // empty when the sample is not part of a remeasured pair
  int group = 0;        // 0 control, 1 case
  int batch = 1;        // 1 or 2
  double y = 0.0;
  std::vector<double> z;  // covariates, intercept optional
};

using SampleTable = std::vector<SampleRecord>;

/// Validated dataset with rows in canonical block order:
///
///   [0, n1')              S1      remeasured controls, batch 1
///   [n1', n1)             C1\S1   controls measured once
///   [n1, n1+n2)           T2      cases, batch 2
///   [n1+n2, n1+n2+n1')    C2      remeasured controls, batch 2
///
/// Row n1+n2+i of C2 is the remeasurement of row i of S1 and carries the same
/// covariate row. Immutable after construction.
class Dataset {
 public:
  /// Validates dimensions, finiteness, the leading all-ones column, the
  /// pairing of covariates and the column rank of z.
  Dataset(StudyDesign design, VectorXd y, MatrixXd z,
          std::vector<std::string> sample_ids = {},
          std::vector<std::string> pair_ids = {});

  /// Builds from per-block responses; zc1 holds the n1 batch-1 control rows
  /// (the first n1' of which are the remeasured ones) and zt2 the case rows.
  static Dataset from_blocks(const VectorXd& y_s1, const VectorXd& y_rest,
                             const VectorXd& y_t2, const VectorXd& y_c2,
                             const MatrixXd& zc1, const MatrixXd& zt2);

  /// Same design and covariates, new response vector (no rank re-check).
  Dataset with_response(VectorXd y) const;

  const StudyDesign& design() const { return design_; }
  const VectorXd& y() const { return y_; }
  const MatrixXd& z() const { return z_; }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<std::string>& pair_ids() const { return pair_ids_; }

  Index n1() const { return design_.n1; }
  Index n2() const { return design_.n2; }
  Index n1_prime() const { return design_.n1_prime; }
  Index p() const { return design_.p; }

  auto y_s1() const { return y_.segment(0, design_.n1_prime); }
  auto y_rest() const { return y_.segment(design_.n1_prime, design_.n1 - design_.n1_prime); }
  auto y_c1() const { return y_.segment(0, design_.n1); }
  auto y_t2() const { return y_.segment(design_.n1, design_.n2); }
  auto y_c2() const { return y_.segment(design_.n_original(), design_.n1_prime); }

  auto z_s1() const { return z_.topRows(design_.n1_prime); }
  auto z_rest() const { return z_.middleRows(design_.n1_prime, design_.n1 - design_.n1_prime); }
  auto z_c1() const { return z_.topRows(design_.n1); }
  auto z_t2() const { return z_.middleRows(design_.n1, design_.n2); }
  auto z_c2() const { return z_.bottomRows(design_.n1_prime); }

  /// 0 for controls, 1 for cases.
  int group(Index row) const { return (row >= design_.n1 && row < design_.n_original()) ? 1 : 0; }
  int batch(Index row) const { return row < design_.n1 ? 1 : 2; }

 private:
  Dataset() = default;

  StudyDesign design_;
  VectorXd y_;
  MatrixXd z_;
  std::vector<std::string> sample_ids_;
  std::vector<std::string> pair_ids_;
};

/// Relative tolerance on sigma_min / sigma_max of z below which the covariate
/// matrix is rejected as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Checks a raw table, prepends an intercept column when none is present and
/// reorders the rows into canonical block order.
Dataset validate_dataset(const SampleTable& table);

/// As above, and additionally requires the counts to match `expected`.
Dataset validate_dataset(const StudyDesign& expected, const SampleTable& table);

/// Inverse of validate_dataset up to row order: one record per row.
SampleTable to_table(const Dataset& data);

/// True when z has full column rank under kRankTolerance.
bool has_full_column_rank(const MatrixXd& z);

}  // namespace remeasure
