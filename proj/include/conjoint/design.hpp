#ifndef CONJOINT_DESIGN_HPP
#define CONJOINT_DESIGN_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "conjoint/simulate.hpp"

namespace conjoint {

/// Per-column z-score of the difference regressors. Population SD (divide
/// by n), matching a standard scaler.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  bool operator==(const Standardization& o) const {
    return mean.size() == o.mean.size() && scale.size() == o.scale.size() &&
           mean == o.mean && scale == o.scale;
  }
};

/// Model-ready data: one row per choice, rows grouped by respondent.
struct Design {
  Eigen::MatrixXd x;  // standardized (encode(A) - encode(B))
  Eigen::VectorXd y;  // 1 if A chosen
  std::vector<Eigen::Index> row_offsets;  // respondent r owns rows [offsets[r], offsets[r+1])
  std::vector<int> respondent_ids;
  std::vector<std::string> column_names;
  Eigen::Index price_column = 0;
  Standardization standardization;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index columns() const { return static_cast<Eigen::Index>(column_names.size()); }
  Eigen::Index respondents() const {
    return static_cast<Eigen::Index>(respondent_ids.size());
  }
  auto respondent_rows(Eigen::Index r) const {
    const auto begin = row_offsets[static_cast<std::size_t>(r)];
    const auto end = row_offsets[static_cast<std::size_t>(r) + 1];
    return x.middleRows(begin, end - begin);
  }
  auto respondent_choices(Eigen::Index r) const {
    const auto begin = row_offsets[static_cast<std::size_t>(r)];
    const auto end = row_offsets[static_cast<std::size_t>(r) + 1];
    return y.segment(begin, end - begin);
  }
};

Standardization fit_standardization(const Eigen::MatrixXd& raw,
                                    const std::vector<std::string>& column_names);

/// Difference regressors for a choice dataset, standardized per column.
/// Throws DataError on an empty dataset or constant column.
Design build_design(const ChoiceDataset& dataset);

/// Lower-level constructor from raw difference rows. `respondent_of_row`
/// holds respondent ids; rows are regrouped by first appearance. When
/// `standardize` is false the identity standardization is recorded.
Design make_design(const Eigen::MatrixXd& raw_differences, const Eigen::VectorXd& choices,
                   const std::vector<int>& respondent_of_row,
                   std::vector<std::string> column_names, Eigen::Index price_column,
                   bool standardize = true);

/// Design with no choices, for prior-only runs.
Design empty_design(std::vector<std::string> column_names, Eigen::Index price_column,
                    std::size_t n_respondents);

}  // namespace conjoint

#endif  // CONJOINT_DESIGN_HPP
