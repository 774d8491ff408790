#ifndef CONJOINT_POSTERIOR_HPP
#define CONJOINT_POSTERIOR_HPP

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "conjoint/infer.hpp"
#include "conjoint/simulate.hpp"

namespace conjoint {

inline constexpr double kPopulationFlagLimit = 0.001;
inline constexpr double kIndividualFlagLimit = 0.005;

struct Interval {
  double low = 0.0;
  double high = 0.0;

  double width() const { return high - low; }
  bool contains(double v) const { return low <= v && v <= high; }  // closed
};

/// Shortest window over the sorted samples holding ceil(mass * n) of them;
/// leftmost window wins ties. Requires at least 100 samples.
Interval hdi(std::span<const double> samples, double mass = 0.95);

/// Population coefficients per draw on the original (dollar / dummy) scale:
/// mu_f / scale_f. Centering does not affect slopes.
Eigen::MatrixXd unscale(const PosteriorDraws& draws);
/// Same for population SDs.
Eigen::MatrixXd unscale_sigma(const PosteriorDraws& draws);
/// Unscaled beta of one respondent in one draw.
Eigen::VectorXd unscaled_individual_beta(const PosteriorDraws& draws, Eigen::Index draw,
                                         Eigen::Index respondent);

struct WtpDraws {
  std::string feature;
  std::vector<double> draws;  // dollars, sign-safe draws only
  std::size_t flagged_count = 0;
  std::size_t total_draws = 0;
  bool flagged = false;  // individual results only: too many unsafe draws

  double mean() const;
};

/// Per-draw -mu_f / mu_price on the unscaled population means. Draws with
/// mu_price >= -epsilon are dropped and counted; more than 0.1% flagged
/// throws SignSafetyError.
WtpDraws wtp_draws(const PosteriorDraws& draws, const std::string& feature,
                   double epsilon = kDefaultSignEpsilon);

/// Same ratio using one respondent's reconstructed coefficients. More than
/// 0.5% flagged sets `flagged` instead of throwing.
WtpDraws individual_wtp(const PosteriorDraws& draws, int respondent_id,
                        const std::string& feature, double epsilon = kDefaultSignEpsilon);

struct WtpSummary {
  std::string feature;
  double mean = 0.0;
  double hdi_low = 0.0;
  double hdi_high = 0.0;
  double hdi_mass = 0.95;
  std::size_t flagged_count = 0;
};

WtpSummary summarize(const WtpDraws& wtp, double mass = 0.95);

/// WTP summaries for every non-price column, in column order.
std::vector<WtpDraws> all_wtp_draws(const PosteriorDraws& draws,
                                    double epsilon = kDefaultSignEpsilon);

struct RecoveryRow {
  std::string feature;
  double true_wtp = 0.0;
  WtpSummary summary;
  bool covered = false;
  double abs_error = 0.0;
};

struct RecoveryReport {
  std::vector<RecoveryRow> rows;
  bool overall_pass = false;
};

RecoveryReport recovery_report(const GroundTruth& truth,
                               const std::vector<WtpSummary>& summaries);

void write_wtp_summary_csv(std::ostream& out, const std::vector<WtpSummary>& summaries,
                           const GroundTruth* truth = nullptr);
/// One column per feature, one row per retained draw. Columns shorter than
/// the longest (flagged draws removed) are padded with empty cells.
void write_wtp_draws_csv(std::ostream& out, const std::vector<WtpDraws>& wtp);

}  // namespace conjoint

#endif  // CONJOINT_POSTERIOR_HPP
