#include "conjoint/design.hpp"

#include <map>
#include <numeric>

namespace conjoint {

Standardization fit_standardization(const Eigen::MatrixXd& raw,
                                    const std::vector<std::string>& column_names) {
  if (raw.rows() == 0) throw ContractError("fit_standardization: no rows");
  Standardization s;
  const double n = static_cast<double>(raw.rows());
  s.mean = raw.colwise().mean().transpose();
  s.scale.resize(raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double var = (raw.col(j).array() - s.mean[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    // Columns that vary only at rounding level are constant in practice.
    if (!(sd > 1e-12 * std::max(1.0, std::abs(s.mean[j])))) {
      throw DataError("difference column '" + column_names[static_cast<std::size_t>(j)] +
                      "' is constant; its coefficient is not identified");
    }
    s.scale[j] = sd;
  }
  return s;
}

Design make_design(const Eigen::MatrixXd& raw_differences, const Eigen::VectorXd& choices,
                   const std::vector<int>& respondent_of_row,
                   std::vector<std::string> column_names, Eigen::Index price_column,
                   bool standardize) {
  const Eigen::Index n = raw_differences.rows();
  if (choices.size() != n || static_cast<Eigen::Index>(respondent_of_row.size()) != n) {
    throw ContractError("make_design: row counts of x, y and respondents differ");
  }
  if (raw_differences.cols() != static_cast<Eigen::Index>(column_names.size())) {
    throw ContractError("make_design: column names do not match x");
  }
  if (n == 0) throw ContractError("make_design: dataset is empty");

  Design d;
  d.column_names = std::move(column_names);
  d.price_column = price_column;
  if (standardize) {
    d.standardization = fit_standardization(raw_differences, d.column_names);
  } else {
    d.standardization.mean = Eigen::VectorXd::Zero(raw_differences.cols());
    d.standardization.scale = Eigen::VectorXd::Ones(raw_differences.cols());
  }

  // Stable regroup by respondent, in order of first appearance.
  std::map<int, std::size_t> slot;
  std::vector<std::vector<Eigen::Index>> rows_of;
  for (Eigen::Index r = 0; r < n; ++r) {
    const int id = respondent_of_row[static_cast<std::size_t>(r)];
    auto [it, inserted] = slot.try_emplace(id, rows_of.size());
    if (inserted) {
      rows_of.emplace_back();
      d.respondent_ids.push_back(id);
    }
    rows_of[it->second].push_back(r);
  }

  d.x.resize(n, raw_differences.cols());
  d.y.resize(n);
  d.row_offsets.assign(1, 0);
  Eigen::Index out = 0;
  const Eigen::RowVectorXd mean = d.standardization.mean.transpose();
  const Eigen::RowVectorXd inv_scale = d.standardization.scale.cwiseInverse().transpose();
  for (const auto& rows : rows_of) {
    for (Eigen::Index r : rows) {
      d.x.row(out) = (raw_differences.row(r) - mean).cwiseProduct(inv_scale);
      d.y[out] = choices[r];
      ++out;
    }
    d.row_offsets.push_back(out);
  }
  return d;
}

Design build_design(const ChoiceDataset& dataset) {
  if (dataset.records.empty()) throw ContractError("build_design: dataset is empty");
  const auto& scheme = dataset.scheme;
  const auto n = static_cast<Eigen::Index>(dataset.records.size());
  const auto k = static_cast<Eigen::Index>(scheme.column_count());

  Eigen::MatrixXd raw(n, k);
  Eigen::VectorXd y(n);
  std::vector<int> respondent(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rec = dataset.records[static_cast<std::size_t>(r)];
    raw.row(r) = (encode_profile(scheme, rec.task.profile_a) -
                  encode_profile(scheme, rec.task.profile_b))
                     .transpose();
    y[r] = rec.chose_a ? 1.0 : 0.0;
    respondent[static_cast<std::size_t>(r)] = rec.task.respondent_id;
  }
  return make_design(raw, y, respondent, scheme.column_names(),
                     static_cast<Eigen::Index>(scheme.price_column()));
}

Design empty_design(std::vector<std::string> column_names, Eigen::Index price_column,
                    std::size_t n_respondents) {
  Design d;
  const auto k = static_cast<Eigen::Index>(column_names.size());
  d.column_names = std::move(column_names);
  d.price_column = price_column;
  d.x.resize(0, k);
  d.y.resize(0);
  d.row_offsets.assign(n_respondents + 1, 0);
  d.respondent_ids.resize(n_respondents);
  std::iota(d.respondent_ids.begin(), d.respondent_ids.end(), 0);
  d.standardization.mean = Eigen::VectorXd::Zero(k);
  d.standardization.scale = Eigen::VectorXd::Ones(k);
  return d;
}

}  // namespace conjoint
