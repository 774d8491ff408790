#ifndef CONJOINT_INFER_HPP
#define CONJOINT_INFER_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conjoint/design.hpp"
#include "conjoint/model.hpp"

namespace conjoint {

/// Post-warmup MCMC output of the hierarchical logit, all chains stacked.
/// mu and sigma are on the standardized scale; z holds the non-centered
/// respondent offsets, respondent-major (column r*K + f).
struct PosteriorDraws {
  AttributeScheme scheme;
  std::vector<std::string> column_names;
  Eigen::Index price_column = 0;
  std::vector<int> respondent_ids;
  bool hierarchical = true;

  Eigen::MatrixXd mu;     // draws x K
  Eigen::MatrixXd sigma;  // draws x K, empty when pooled
  Eigen::MatrixXd z;      // draws x R*K, empty when pooled
  std::optional<Standardization> standardization;
  std::vector<int> chain;
  std::vector<int> draw_index;
  std::vector<std::uint8_t> divergent;

  Eigen::Index draws() const { return mu.rows(); }
  Eigen::Index columns() const { return mu.cols(); }
  Eigen::Index respondents() const { return static_cast<Eigen::Index>(respondent_ids.size()); }
  Eigen::Index column(const std::string& name) const;
  Eigen::Index respondent_index(int respondent_id) const;

  /// beta_r = mu + sigma .* z_r for one draw, standardized scale.
  Eigen::VectorXd individual_beta(Eigen::Index draw, Eigen::Index respondent) const;
};

struct Diagnostics {
  std::vector<std::string> parameter_names;
  std::vector<double> r_hat;
  std::vector<double> ess;
  /// Leading entries of parameter_names that are population parameters.
  std::size_t population_parameters = 0;
  int divergence_count = 0;
  int warmup_divergences = 0;
  std::vector<double> mean_accept_prob;  // per chain
  std::vector<double> step_size;         // per chain
  std::vector<double> mean_tree_depth;   // per chain
  std::vector<std::string> warnings;

  double max_population_rhat() const;
  double min_population_ess() const;
  double divergence_rate(std::size_t total_draws) const;
};

struct SampleResult {
  PosteriorDraws draws;
  Diagnostics diagnostics;
};

inline constexpr double kMaxDivergenceRate = 0.05;
inline constexpr double kRhatWarning = 1.05;

/// Runs config.chains independent NUTS chains. Chains use RNG streams
/// derived from (config.seed, chain), so the result is identical for any
/// `threads`. Throws FitError when more than 5% of draws diverge.
SampleResult sample(const Design& design, const ModelConfig& config,
                    const AttributeScheme& scheme = {}, std::size_t threads = 1);

/// Diagnostics for population parameters (mu, and log sigma when
/// hierarchical) plus every z, from per-chain draw matrices.
Diagnostics compute_diagnostics(const std::vector<std::string>& names,
                                const std::vector<Eigen::MatrixXd>& chain_draws,
                                std::size_t population_parameters);

/// Worker count from CONJOINT_WTP_THREADS, defaulting to hardware concurrency.
std::size_t thread_limit_from_env();

}  // namespace conjoint

#endif  // CONJOINT_INFER_HPP
