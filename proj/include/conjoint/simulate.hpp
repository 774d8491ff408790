#ifndef CONJOINT_SIMULATE_HPP
#define CONJOINT_SIMULATE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conjoint/domain.hpp"

namespace conjoint {

/// True population preferences used to generate a synthetic survey.
/// Maps are keyed by feature column name ("camera:Pro").
struct GroundTruth {
  std::map<std::string, double> true_wtp;
  std::map<std::string, double> wtp_sd;
  double price_coef_mean = -0.01;  // utility per dollar
  double price_coef_sd = 0.002;

  void validate(const AttributeScheme& scheme) const;
  bool operator==(const GroundTruth&) const = default;
};

/// Truth of the recovery study: WTP 100/250/200/80, camera SD $50 and
/// 25% of the mean for the other features.
GroundTruth paper_ground_truth();

struct RespondentParams {
  int respondent_id = 0;
  Coefficients beta;
};

struct ChoiceTask {
  int respondent_id = 0;
  int task_id = 0;
  ProductProfile profile_a;
  ProductProfile profile_b;

  bool operator==(const ChoiceTask&) const = default;
};

struct ChoiceRecord {
  ChoiceTask task;
  bool chose_a = false;

  bool operator==(const ChoiceRecord&) const = default;
};

struct Provenance {
  GroundTruth truth;
  std::uint64_t seed = 0;

  bool operator==(const Provenance&) const = default;
};

struct ChoiceDataset {
  AttributeScheme scheme;
  std::vector<ChoiceRecord> records;
  std::optional<Provenance> provenance;

  /// Checks profile validity and (respondent, task) uniqueness.
  void validate() const;
  std::vector<int> respondent_ids() const;
  bool operator==(const ChoiceDataset&) const = default;
};

inline constexpr double kMaxPriceCoefficient = -1e-4;

/// Draws one parameter set per respondent (ids 0..n-1). Heterogeneity lives
/// in WTP space: beta_f = -beta_price * WTP_f with WTP_f ~ Normal(truth, sd)
/// and beta_price ~ Normal(mean, sd) truncated below kMaxPriceCoefficient.
std::vector<RespondentParams> sample_respondents(const AttributeScheme& scheme,
                                                 const GroundTruth& truth,
                                                 std::size_t n, std::uint64_t seed);

/// Random paired-profile tasks. Levels and prices are drawn uniformly;
/// identical pairs are redrawn up to 1000 times.
std::vector<ChoiceTask> generate_tasks(const AttributeScheme& scheme,
                                       std::size_t n_respondents,
                                       std::size_t tasks_per_respondent,
                                       const std::vector<double>& price_grid,
                                       std::uint64_t seed);

/// choice_probability clamped to [1e-15, 1 - 1e-15]; the simulator never
/// makes a choice certain.
double simulated_choice_probability(double u_a, double u_b);

/// Bernoulli choice per task with p = choice_probability(u_a, u_b).
ChoiceDataset simulate_choices(const AttributeScheme& scheme,
                               const std::vector<RespondentParams>& respondents,
                               const std::vector<ChoiceTask>& tasks,
                               std::uint64_t seed);

struct SimulationConfig {
  std::size_t n_respondents = 300;
  std::size_t tasks_per_respondent = 20;
  std::vector<double> price_grid;  // empty means the scheme's price levels
  std::uint64_t seed = 0;
};

struct SimulationResult {
  std::vector<RespondentParams> respondents;
  ChoiceDataset dataset;
};

/// Full survey: respondents, tasks and choices from one seed.
SimulationResult simulate_survey(const AttributeScheme& scheme, const GroundTruth& truth,
                                 const SimulationConfig& config);

}  // namespace conjoint

#endif  // CONJOINT_SIMULATE_HPP
