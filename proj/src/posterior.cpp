#include "conjoint/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "conjoint/format.hpp"

namespace conjoint {

Interval hdi(std::span<const double> samples, double mass) {
  if (samples.size() < 100) {
    throw ContractError("hdi: need at least 100 samples, got " + std::to_string(samples.size()));
  }
  if (!(mass > 0.0 && mass < 1.0)) throw ContractError("hdi: mass must lie in (0, 1)");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // The epsilon keeps e.g. 0.95 * 100 from rounding up to 96.
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n) - 1e-9)));
  std::size_t best = 0;
  double best_width = sorted[k - 1] - sorted[0];
  for (std::size_t i = 1; i + k <= n; ++i) {
    const double w = sorted[i + k - 1] - sorted[i];
    if (w < best_width) {
      best_width = w;
      best = i;
    }
  }
  return {sorted[best], sorted[best + k - 1]};
}

namespace {

const Standardization& require_standardization(const PosteriorDraws& draws) {
  if (!draws.standardization) {
    throw ContractError("posterior draws carry no standardization metadata");
  }
  const auto& s = *draws.standardization;
  if (s.scale.size() != draws.columns()) {
    throw ContractError("standardization does not match the posterior's columns");
  }
  return s;
}

}  // namespace

Eigen::MatrixXd unscale(const PosteriorDraws& draws) {
  const auto& s = require_standardization(draws);
  return draws.mu.array().rowwise() / s.scale.transpose().array();
}

Eigen::MatrixXd unscale_sigma(const PosteriorDraws& draws) {
  const auto& s = require_standardization(draws);
  if (!draws.hierarchical) return Eigen::MatrixXd::Zero(draws.draws(), draws.columns());
  return draws.sigma.array().rowwise() / s.scale.transpose().array();
}

Eigen::VectorXd unscaled_individual_beta(const PosteriorDraws& draws, Eigen::Index draw,
                                         Eigen::Index respondent) {
  const auto& s = require_standardization(draws);
  return draws.individual_beta(draw, respondent).cwiseQuotient(s.scale);
}

double WtpDraws::mean() const {
  if (draws.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double v : draws) sum += v;
  return sum / static_cast<double>(draws.size());
}

namespace {

Eigen::Index feature_column(const PosteriorDraws& draws, const std::string& feature) {
  const Eigen::Index j = draws.column(feature);
  if (j == draws.price_column) {
    throw ContractError("WTP is undefined for the price column itself");
  }
  return j;
}

}  // namespace

WtpDraws wtp_draws(const PosteriorDraws& draws, const std::string& feature, double epsilon) {
  const Eigen::Index j = feature_column(draws, feature);
  const Eigen::MatrixXd beta = unscale(draws);
  WtpDraws out;
  out.feature = feature;
  out.total_draws = static_cast<std::size_t>(draws.draws());
  out.draws.reserve(out.total_draws);
  for (Eigen::Index d = 0; d < beta.rows(); ++d) {
    const double bp = beta(d, draws.price_column);
    if (!price_is_sign_safe(bp, epsilon)) {
      ++out.flagged_count;
      continue;
    }
    out.draws.push_back(wtp(beta(d, j), bp, epsilon));
  }
  if (static_cast<double>(out.flagged_count) >
      kPopulationFlagLimit * static_cast<double>(out.total_draws)) {
    throw SignSafetyError("wtp: " + std::to_string(out.flagged_count) + " of " +
                          std::to_string(out.total_draws) +
                          " draws have a non-negative price effect; the model did not learn "
                          "that price lowers utility");
  }
  return out;
}

WtpDraws individual_wtp(const PosteriorDraws& draws, int respondent_id,
                        const std::string& feature, double epsilon) {
  const Eigen::Index j = feature_column(draws, feature);
  const Eigen::Index r = draws.respondent_index(respondent_id);
  WtpDraws out;
  out.feature = feature;
  out.total_draws = static_cast<std::size_t>(draws.draws());
  out.draws.reserve(out.total_draws);
  for (Eigen::Index d = 0; d < draws.draws(); ++d) {
    const Eigen::VectorXd beta = unscaled_individual_beta(draws, d, r);
    const double bp = beta[draws.price_column];
    if (!price_is_sign_safe(bp, epsilon)) {
      ++out.flagged_count;
      continue;
    }
    out.draws.push_back(wtp(beta[j], bp, epsilon));
  }
  out.flagged = static_cast<double>(out.flagged_count) >
                kIndividualFlagLimit * static_cast<double>(out.total_draws);
  return out;
}

WtpSummary summarize(const WtpDraws& wtp, double mass) {
  const Interval interval = hdi(wtp.draws, mass);
  return {wtp.feature, wtp.mean(), interval.low, interval.high, mass, wtp.flagged_count};
}

std::vector<WtpDraws> all_wtp_draws(const PosteriorDraws& draws, double epsilon) {
  std::vector<WtpDraws> out;
  for (Eigen::Index j = 0; j < draws.columns(); ++j) {
    if (j == draws.price_column) continue;
    out.push_back(wtp_draws(draws, draws.column_names[static_cast<std::size_t>(j)], epsilon));
  }
  return out;
}

RecoveryReport recovery_report(const GroundTruth& truth,
                               const std::vector<WtpSummary>& summaries) {
  RecoveryReport report;
  report.overall_pass = true;
  for (const auto& [feature, true_value] : truth.true_wtp) {
    const auto it = std::find_if(summaries.begin(), summaries.end(),
                                 [&](const WtpSummary& s) { return s.feature == feature; });
    if (it == summaries.end()) {
      throw ContractError("recovery_report: no summary for feature '" + feature + "'");
    }
    RecoveryRow row;
    row.feature = feature;
    row.true_wtp = true_value;
    row.summary = *it;
    row.covered = it->hdi_low <= true_value && true_value <= it->hdi_high;
    row.abs_error = std::abs(it->mean - true_value);
    report.overall_pass = report.overall_pass && row.covered;
    report.rows.push_back(std::move(row));
  }
  // Present rows in the order of the summaries (column order).
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [&](const RecoveryRow& a, const RecoveryRow& b) {
                     auto pos = [&](const std::string& f) {
                       return std::find_if(summaries.begin(), summaries.end(),
                                           [&](const WtpSummary& s) { return s.feature == f; }) -
                              summaries.begin();
                     };
                     return pos(a.feature) < pos(b.feature);
                   });
  return report;
}

void write_wtp_summary_csv(std::ostream& out, const std::vector<WtpSummary>& summaries,
                           const GroundTruth* truth) {
  out << "feature,true_wtp,mean,hdi_low,hdi_high,hdi_mass,flagged_count\n";
  for (const auto& s : summaries) {
    out << s.feature << ',';
    if (truth && truth->true_wtp.count(s.feature)) out << format_number(truth->true_wtp.at(s.feature));
    out << ',' << format_number(s.mean) << ',' << format_number(s.hdi_low) << ','
        << format_number(s.hdi_high) << ',' << format_number(s.hdi_mass) << ','
        << s.flagged_count << '\n';
  }
}

void write_wtp_draws_csv(std::ostream& out, const std::vector<WtpDraws>& wtp) {
  std::size_t rows = 0;
  for (std::size_t j = 0; j < wtp.size(); ++j) {
    out << (j ? "," : "") << wtp[j].feature;
    rows = std::max(rows, wtp[j].draws.size());
  }
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < wtp.size(); ++j) {
      if (j) out << ',';
      if (i < wtp[j].draws.size()) out << format_number(wtp[j].draws[i]);
    }
    out << '\n';
  }
}

}  // namespace conjoint
