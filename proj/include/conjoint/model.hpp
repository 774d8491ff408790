#ifndef CONJOINT_MODEL_HPP
#define CONJOINT_MODEL_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "conjoint/design.hpp"

namespace conjoint {

struct NormalPrior {
  double mean = 0.0;
  double sd = 1.0;

  bool operator==(const NormalPrior&) const = default;
};

/// Priors live on the standardized scale.
struct ModelConfig {
  NormalPrior prior_mu_price{-1.0, 1.0};
  NormalPrior prior_mu_feature{0.0, 2.0};
  double prior_sigma_sd = 1.0;  // half-normal scale of the population SDs
  int chains = 4;
  int draws_per_chain = 2000;
  int warmup_per_chain = 1000;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 0;
  /// false: a single shared coefficient vector (plain pooled logit).
  bool hierarchical = true;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Log posterior of the hierarchical binary logit in non-centered form.
///
/// Unconstrained parameter layout, K = columns, R = respondents:
///   [0, K)            mu          population means
///   [K, 2K)           log sigma   population SDs (log scale)
///   [2K, 2K + R*K)    z           respondent-major offsets, beta_r = mu + sigma .* z_r
/// In pooled mode only mu is present and every respondent uses beta = mu.
///
/// Densities include all normalizing constants, so with no data the value
/// is exactly the log prior (plus the log-sigma Jacobian).
class HierarchicalLogit {
public:
  HierarchicalLogit(const Design& design, const ModelConfig& config);

  Eigen::Index dimension() const { return dimension_; }
  Eigen::Index columns() const { return k_; }
  Eigen::Index respondents() const { return r_; }
  bool hierarchical() const { return hierarchical_; }

  Eigen::Index mu_offset() const { return 0; }
  Eigen::Index log_sigma_offset() const { return k_; }
  Eigen::Index z_offset(Eigen::Index respondent = 0) const { return 2 * k_ + respondent * k_; }

  double log_density(const Eigen::VectorXd& theta) const;
  /// Returns the log density and writes its gradient into `grad`.
  double log_density_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;

  double log_prior(const Eigen::VectorXd& theta) const;
  double log_likelihood(const Eigen::VectorXd& theta) const;

  /// Standardized-scale coefficients of one respondent.
  Eigen::VectorXd respondent_beta(const Eigen::VectorXd& theta, Eigen::Index r) const;

  std::vector<std::string> parameter_names() const;

private:
  double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad, bool prior,
                  bool likelihood) const;

  const Design* design_;
  Eigen::MatrixXd xt_;  // design rows as contiguous columns
  Eigen::VectorXd prior_mean_;
  Eigen::VectorXd prior_sd_;
  double sigma_sd_;
  bool hierarchical_;
  Eigen::Index k_;
  Eigen::Index r_;
  Eigen::Index dimension_;
};

}  // namespace conjoint

#endif  // CONJOINT_MODEL_HPP
