#include "remeasure/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace remeasure {

void StudyDesign::check() const {
  if (n1 < 1) throw InputError("design: need at least one batch-1 control (n1 >= 1)");
  if (n2 < 2) throw InputError("design: need at least two cases (n2 >= 2)");
  if (n1_prime < 0 || n1_prime > n1)
    throw InputError("design: remeasured count must satisfy 0 <= n1' <= n1");
  if (p < 1) throw InputError("design: covariate dimension must be >= 1");
}

bool ParameterVector::is_valid() const {
  return std::isfinite(a0) && std::isfinite(a1) && b.allFinite() && std::abs(rho) < 1.0 &&
         sigma1 > 0.0 && sigma2 > 0.0 && std::isfinite(sigma1) && std::isfinite(sigma2);
}

void ParameterVector::check() const {
  if (!is_valid())
    throw InputError("parameter vector requires |rho| < 1, sigma1 > 0, sigma2 > 0 and finite entries");
}

bool has_full_column_rank(const MatrixXd& z) {
  if (z.rows() < z.cols()) return false;
  Eigen::JacobiSVD<MatrixXd> svd(z);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return false;
  return sv(sv.size() - 1) / sv(0) > kRankTolerance;
}

Dataset::Dataset(StudyDesign design, VectorXd y, MatrixXd z, std::vector<std::string> sample_ids,
                 std::vector<std::string> pair_ids)
    : design_(design),
      y_(std::move(y)),
      z_(std::move(z)),
      sample_ids_(std::move(sample_ids)),
      pair_ids_(std::move(pair_ids)) {
  design_.p = z_.cols();
  design_.check();
  if (y_.size() != design_.n_rows() || z_.rows() != design_.n_rows())
    throw InputError("dataset: y and z must have n1 + n2 + n1' rows");
  if (!sample_ids_.empty() && static_cast<Index>(sample_ids_.size()) != design_.n_rows())
    throw InputError("dataset: one sample id per row required");
  if (!pair_ids_.empty() && static_cast<Index>(pair_ids_.size()) != design_.n1_prime)
    throw InputError("dataset: one pair id per remeasured sample required");
  if (!y_.allFinite() || !z_.allFinite()) throw InputError("dataset: non-finite value");
  if (!(z_.col(0).array() == 1.0).all())
    throw InputError("dataset: first covariate column must be the intercept");
  if (z_s1() != z_c2()) throw InputError("pair covariate mismatch");
  if (!has_full_column_rank(z_.topRows(design_.n_original())))
    throw InputError("covariate matrix is rank deficient");
}

Dataset Dataset::from_blocks(const VectorXd& y_s1, const VectorXd& y_rest, const VectorXd& y_t2,
                             const VectorXd& y_c2, const MatrixXd& zc1, const MatrixXd& zt2) {
  StudyDesign d;
  d.n1_prime = y_s1.size();
  d.n1 = y_s1.size() + y_rest.size();
  d.n2 = y_t2.size();
  d.p = zc1.cols();
  if (y_c2.size() != d.n1_prime) throw InputError("dataset: S1 and C2 blocks differ in size");
  if (zc1.rows() != d.n1 || zt2.rows() != d.n2 || zt2.cols() != d.p)
    throw InputError("dataset: covariate blocks do not match response blocks");
  VectorXd y(d.n_rows());
  y << y_s1, y_rest, y_t2, y_c2;
  MatrixXd z(d.n_rows(), d.p);
  z << zc1, zt2, zc1.topRows(d.n1_prime);
  return Dataset(d, std::move(y), std::move(z));
}

Dataset Dataset::with_response(VectorXd y) const {
  if (y.size() != y_.size()) throw InputError("dataset: response length mismatch");
  if (!y.allFinite()) throw InputError("dataset: non-finite value");
  Dataset out;
  out.design_ = design_;
  out.y_ = std::move(y);
  out.z_ = z_;
  out.sample_ids_ = sample_ids_;
  out.pair_ids_ = pair_ids_;
  return out;
}

namespace {

enum class Role { kControl1, kCase2, kControl2 };

Role role_of(const SampleRecord& r, std::size_t row) {
  if (r.group == 0 && r.batch == 1) return Role::kControl1;
  if (r.group == 1 && r.batch == 2) return Role::kCase2;
  if (r.group == 0 && r.batch == 2) return Role::kControl2;
  if (r.group == 1 && r.batch == 1)
    throw InputError("row " + std::to_string(row) + ": cases must be measured in batch 2");
  throw InputError("row " + std::to_string(row) + ": group must be 0/1 and batch 1/2");
}

}  // namespace

Dataset validate_dataset(const SampleTable& table) {
  if (table.empty()) throw InputError("empty sample table");
  const std::size_t q = table.front().z.size();

  std::vector<std::size_t> c1, t2, c2;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table[i];
    if (r.z.size() != q) throw InputError("row " + std::to_string(i) + ": covariate count differs");
    if (!std::isfinite(r.y) ||
        !std::all_of(r.z.begin(), r.z.end(), [](double v) { return std::isfinite(v); }))
      throw InputError("row " + std::to_string(i) + ": non-finite value");
    switch (role_of(r, i)) {
      case Role::kControl1: c1.push_back(i); break;
      case Role::kCase2: t2.push_back(i); break;
      case Role::kControl2: c2.push_back(i); break;
    }
  }

  std::unordered_map<std::string, std::size_t> c1_by_pair;
  for (auto i : c1) {
    const auto& id = table[i].pair_id;
    if (id.empty()) continue;
    if (!c1_by_pair.emplace(id, i).second) throw InputError("duplicate pair index '" + id + "'");
  }
  std::unordered_map<std::string, std::size_t> c2_by_pair;
  for (auto i : c2) {
    const auto& id = table[i].pair_id;
    if (id.empty())
      throw InputError("row " + std::to_string(i) + ": batch-2 control without pair id");
    if (!c2_by_pair.emplace(id, i).second) throw InputError("duplicate pair index '" + id + "'");
    auto it = c1_by_pair.find(id);
    if (it == c1_by_pair.end()) throw InputError("pair id '" + id + "' has no batch-1 partner");
    if (table[it->second].z != table[i].z) throw InputError("pair covariate mismatch");
  }

  // S1 in order of appearance among batch-1 controls, C2 aligned with S1.
  std::vector<std::size_t> s1, rest, c2_sorted;
  for (auto i : c1) {
    const auto& id = table[i].pair_id;
    if (!id.empty() && c2_by_pair.count(id)) {
      s1.push_back(i);
      c2_sorted.push_back(c2_by_pair.at(id));
    } else {
      rest.push_back(i);
    }
  }

  std::vector<std::size_t> order;
  order.reserve(table.size());
  for (const auto* blk : {&s1, &rest, &t2, &c2_sorted}) order.insert(order.end(), blk->begin(), blk->end());

  // Locate an existing all-ones column; otherwise prepend one.
  std::optional<std::size_t> ones_col;
  for (std::size_t j = 0; j < q && !ones_col; ++j) {
    if (std::all_of(table.begin(), table.end(), [j](const SampleRecord& r) { return r.z[j] == 1.0; }))
      ones_col = j;
  }
  const Index p = static_cast<Index>(ones_col ? q : q + 1);

  StudyDesign d;
  d.n1 = static_cast<Index>(c1.size());
  d.n2 = static_cast<Index>(t2.size());
  d.n1_prime = static_cast<Index>(s1.size());
  d.p = p;
  d.check();

  VectorXd y(d.n_rows());
  MatrixXd z(d.n_rows(), p);
  std::vector<std::string> ids(order.size()), pairs;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& r = table[order[k]];
    const auto row = static_cast<Index>(k);
    y(row) = r.y;
    z(row, 0) = 1.0;
    Index col = 1;
    for (std::size_t j = 0; j < q; ++j) {
      if (ones_col && *ones_col == j) continue;
      z(row, col++) = r.z[j];
    }
    ids[k] = r.sample_id;
  }
  for (auto i : s1) pairs.push_back(table[i].pair_id);

  if (!has_full_column_rank(z.topRows(d.n_original())))
    throw InputError("covariate matrix is rank deficient");
  return Dataset(d, std::move(y), std::move(z), std::move(ids), std::move(pairs));
}

Dataset validate_dataset(const StudyDesign& expected, const SampleTable& table) {
  Dataset data = validate_dataset(table);
  const auto& d = data.design();
  if (d.n1 != expected.n1 || d.n2 != expected.n2 || d.n1_prime != expected.n1_prime)
    throw InputError("table does not match the declared design counts");
  return data;
}

SampleTable to_table(const Dataset& data) {
  const auto& d = data.design();
  SampleTable out;
  out.reserve(static_cast<std::size_t>(d.n_rows()));
  for (Index row = 0; row < d.n_rows(); ++row) {
    SampleRecord r;
    r.sample_id = data.sample_ids().empty() ? "s" + std::to_string(row + 1)
                                            : data.sample_ids()[static_cast<std::size_t>(row)];
    Index pair = -1;
    if (row < d.n1_prime) pair = row;
    if (row >= d.n_original()) pair = row - d.n_original();
    if (pair >= 0)
      r.pair_id = data.pair_ids().empty() ? "pair" + std::to_string(pair + 1)
                                          : data.pair_ids()[static_cast<std::size_t>(pair)];
    r.group = data.group(row);
    r.batch = data.batch(row);
    r.y = data.y()(row);
    r.z.resize(static_cast<std::size_t>(d.p));
    for (Index j = 0; j < d.p; ++j) r.z[static_cast<std::size_t>(j)] = data.z()(row, j);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace remeasure
