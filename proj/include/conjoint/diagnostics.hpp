#ifndef CONJOINT_DIAGNOSTICS_HPP
#define CONJOINT_DIAGNOSTICS_HPP

#include <Eigen/Dense>

namespace conjoint {

// Draws are passed as a (draws x chains) matrix, one column per chain.

/// Classic split-R-hat on the raw values.
double split_rhat(const Eigen::MatrixXd& draws);

/// Rank-normalized split-R-hat: max of the bulk and folded (tail) variants.
/// Returns 1 for a constant parameter.
double rank_normalized_rhat(const Eigen::MatrixXd& draws);

/// Effective sample size via autocorrelations combined across chains,
/// truncated with Geyer's initial monotone sequence.
double effective_sample_size(const Eigen::MatrixXd& draws);

/// Bulk ESS: effective_sample_size of the rank-normalized split chains.
double bulk_ess(const Eigen::MatrixXd& draws);

/// Splits every chain into halves (dropping the middle draw of odd chains).
Eigen::MatrixXd split_chains(const Eigen::MatrixXd& draws);

/// Normal scores of the pooled ranks, (r - 3/8) / (S + 1/4), ties averaged.
Eigen::MatrixXd rank_normalize(const Eigen::MatrixXd& draws);

}  // namespace conjoint

#endif  // CONJOINT_DIAGNOSTICS_HPP
