#ifndef CONJOINT_DOMAIN_HPP
#define CONJOINT_DOMAIN_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "conjoint/errors.hpp"

namespace conjoint {

/// Utility per unit of each feature column; the price column is in utility
/// per dollar.
using Coefficients = Eigen::VectorXd;
/// Dummy-coded profile: 0/1 per non-baseline level, then price in dollars.
using FeatureVector = Eigen::VectorXd;

struct Attribute {
  std::string name;
  std::vector<std::string> levels;
  std::string baseline_level;

  std::size_t baseline_index() const;
  bool operator==(const Attribute&) const = default;
};

struct PriceAttribute {
  std::string name = "price";
  std::vector<double> levels;  // positive dollar amounts

  bool operator==(const PriceAttribute&) const = default;
};

/// A non-price column of the coded design: one non-baseline level.
struct FeatureColumn {
  std::size_t attribute;
  std::size_t level;
  std::string name;  // "<attribute>:<level>"
};

/// Catalog of product attributes and the dummy coding derived from it.
///
/// Columns are ordered attribute by attribute, each contributing one column
/// per non-baseline level in declaration order. The price column is last.
class AttributeScheme {
public:
  AttributeScheme() = default;
  AttributeScheme(std::vector<Attribute> attributes, PriceAttribute price);

  const std::vector<Attribute>& attributes() const { return attributes_; }
  const PriceAttribute& price() const { return price_; }

  std::size_t column_count() const { return columns_.size() + 1; }
  std::size_t price_column() const { return columns_.size(); }
  const std::vector<FeatureColumn>& feature_columns() const { return columns_; }
  std::vector<std::string> column_names() const;

  /// Index of the column named "<attribute>:<level>" or the price name.
  std::size_t column_index(const std::string& name) const;
  std::size_t column_for(const std::string& attribute,
                         const std::string& level) const;
  const Attribute& attribute(const std::string& name) const;
  std::size_t attribute_index(const std::string& name) const;

  /// Number of distinct profiles given a price grid of `n_prices` points.
  double profile_count(std::size_t n_prices) const;

  bool operator==(const AttributeScheme& other) const {
    return attributes_ == other.attributes_ && price_ == other.price_;
  }

private:
  std::vector<Attribute> attributes_;
  PriceAttribute price_;
  std::vector<FeatureColumn> columns_;
};

std::string column_name(const std::string& attribute, const std::string& level);

struct ProductProfile {
  std::map<std::string, std::string> level_by_attribute;
  double price = 0.0;

  bool operator==(const ProductProfile&) const = default;
};

/// Throws CodingError naming the first unknown attribute or level.
void validate_profile(const AttributeScheme& scheme, const ProductProfile& profile);

FeatureVector encode_profile(const AttributeScheme& scheme,
                             const ProductProfile& profile);

/// Inverse of encode_profile. Requires a valid coding (at most one dummy set
/// per attribute).
ProductProfile decode_profile(const AttributeScheme& scheme, const FeatureVector& x);

ProductProfile baseline_profile(const AttributeScheme& scheme, double price);

/// beta . x
template <typename DerivedX, typename DerivedB>
typename DerivedX::Scalar utility(const Eigen::MatrixBase<DerivedX>& x,
                                  const Eigen::MatrixBase<DerivedB>& beta) {
  if (x.size() != beta.size()) {
    throw ContractError("utility: feature vector has " + std::to_string(x.size()) +
                        " entries but coefficients have " +
                        std::to_string(beta.size()));
  }
  return x.dot(beta);
}

/// Logistic sigmoid, stable for arguments of any magnitude.
template <typename Scalar>
Scalar sigmoid(Scalar t) {
  using std::exp;
  if (t >= 0) {
    return Scalar(1) / (Scalar(1) + exp(-t));
  }
  const Scalar e = exp(t);
  return e / (Scalar(1) + e);
}

/// log(sigmoid(t)) without overflow or underflow to -inf for moderate t.
template <typename Scalar>
Scalar log_sigmoid(Scalar t) {
  using std::exp;
  using std::log1p;
  if (t >= 0) {
    return -log1p(exp(-t));
  }
  return t - log1p(exp(t));
}

/// Probability that A is chosen over B given their utilities.
template <typename Scalar>
Scalar choice_probability(Scalar u_a, Scalar u_b) {
  using std::isfinite;
  if (!isfinite(u_a) || !isfinite(u_b)) {
    throw ContractError("choice_probability: utilities must be finite");
  }
  return sigmoid(u_a - u_b);
}

inline constexpr double kDefaultSignEpsilon = 1e-8;

/// Dollar value of a feature: -beta_f / beta_price. Negative values are
/// valid (the level lowers utility). Throws SignSafetyError unless
/// beta_price < -epsilon.
template <typename Scalar>
Scalar wtp(Scalar beta_feature, Scalar beta_price,
           Scalar epsilon = Scalar(kDefaultSignEpsilon)) {
  if (!(beta_price < -epsilon)) {
    throw SignSafetyError("wtp: price coefficient " + std::to_string(double(beta_price)) +
                          " is not safely negative");
  }
  return -beta_feature / beta_price;
}

/// Non-throwing variant used when aggregating many draws.
template <typename Scalar>
bool price_is_sign_safe(Scalar beta_price, Scalar epsilon = Scalar(kDefaultSignEpsilon)) {
  return beta_price < -epsilon;
}

/// The iPhone scheme: storage 128/256/512GB, camera Standard/Pro, frame
/// Aluminum/Titanium, prices 799..1199 in $100 steps.
AttributeScheme paper_scheme();

}  // namespace conjoint

#endif  // CONJOINT_DOMAIN_HPP
