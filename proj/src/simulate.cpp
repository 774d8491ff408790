#include "conjoint/simulate.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "conjoint/rng.hpp"

namespace conjoint {

void GroundTruth::validate(const AttributeScheme& scheme) const {
  if (!(price_coef_mean < 0.0)) {
    throw ConfigError("ground_truth.price_coef_mean must be negative");
  }
  if (!(price_coef_sd >= 0.0)) {
    throw ConfigError("ground_truth.price_coef_sd must be non-negative");
  }
  for (const auto& col : scheme.feature_columns()) {
    if (!true_wtp.count(col.name)) {
      throw ConfigError("ground_truth.wtp is missing feature '" + col.name + "'");
    }
    if (!wtp_sd.count(col.name)) {
      throw ConfigError("ground_truth.wtp_sd is missing feature '" + col.name + "'");
    }
    if (!(wtp_sd.at(col.name) >= 0.0)) {
      throw ConfigError("ground_truth.wtp_sd['" + col.name + "'] must be non-negative");
    }
  }
  for (const auto& [name, _] : true_wtp) {
    if (name == scheme.price().name) {
      throw ConfigError("ground_truth.wtp must not contain the price column");
    }
    scheme.column_index(name);
  }
  for (const auto& [name, _] : wtp_sd) scheme.column_index(name);
}

GroundTruth paper_ground_truth() {
  GroundTruth truth;
  truth.true_wtp = {{"storage:256GB", 100.0},
                    {"storage:512GB", 250.0},
                    {"camera:Pro", 200.0},
                    {"frame:Titanium", 80.0}};
  truth.wtp_sd = {{"storage:256GB", 25.0},
                  {"storage:512GB", 62.5},
                  {"camera:Pro", 50.0},
                  {"frame:Titanium", 20.0}};
  truth.price_coef_mean = -0.01;
  truth.price_coef_sd = 0.002;
  return truth;
}

void ChoiceDataset::validate() const {
  std::set<std::pair<int, int>> seen;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& task = records[r].task;
    try {
      validate_profile(scheme, task.profile_a);
      validate_profile(scheme, task.profile_b);
    } catch (const CodingError& e) {
      throw DataError("record " + std::to_string(r) + ": " + e.what());
    }
    if (!seen.insert({task.respondent_id, task.task_id}).second) {
      throw DataError("record " + std::to_string(r) + ": duplicate task " +
                      std::to_string(task.task_id) + " for respondent " +
                      std::to_string(task.respondent_id));
    }
  }
}

std::vector<int> ChoiceDataset::respondent_ids() const {
  std::vector<int> ids;
  std::set<int> seen;
  for (const auto& rec : records) {
    if (seen.insert(rec.task.respondent_id).second) ids.push_back(rec.task.respondent_id);
  }
  return ids;
}

std::vector<RespondentParams> sample_respondents(const AttributeScheme& scheme,
                                                 const GroundTruth& truth,
                                                 std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ContractError("sample_respondents: n must be at least 1");
  truth.validate(scheme);
  if (truth.price_coef_sd == 0.0 && !(truth.price_coef_mean < kMaxPriceCoefficient)) {
    throw ContractError("sample_respondents: degenerate price coefficient above truncation point");
  }

  const auto& cols = scheme.feature_columns();
  std::vector<RespondentParams> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(seed, Stream::respondents, i);
    std::normal_distribution<double> std_normal(0.0, 1.0);

    double beta_price = 0.0;
    int attempts = 0;
    do {
      if (++attempts > 10000) {
        throw ContractError("sample_respondents: price coefficient truncation rejects every draw");
      }
      beta_price = truth.price_coef_mean + truth.price_coef_sd * std_normal(rng);
    } while (!(beta_price < kMaxPriceCoefficient));

    RespondentParams params;
    params.respondent_id = static_cast<int>(i);
    params.beta.resize(static_cast<Eigen::Index>(scheme.column_count()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double wtp_i =
          truth.true_wtp.at(cols[j].name) + truth.wtp_sd.at(cols[j].name) * std_normal(rng);
      params.beta[static_cast<Eigen::Index>(j)] = -beta_price * wtp_i;
    }
    params.beta[static_cast<Eigen::Index>(scheme.price_column())] = beta_price;
    out.push_back(std::move(params));
  }
  return out;
}

namespace {

ProductProfile random_profile(const AttributeScheme& scheme,
                              const std::vector<double>& price_grid, Rng& rng) {
  ProductProfile profile;
  for (const auto& attr : scheme.attributes()) {
    std::uniform_int_distribution<std::size_t> pick(0, attr.levels.size() - 1);
    profile.level_by_attribute[attr.name] = attr.levels[pick(rng)];
  }
  std::uniform_int_distribution<std::size_t> pick_price(0, price_grid.size() - 1);
  profile.price = price_grid[pick_price(rng)];
  return profile;
}

}  // namespace

std::vector<ChoiceTask> generate_tasks(const AttributeScheme& scheme,
                                       std::size_t n_respondents,
                                       std::size_t tasks_per_respondent,
                                       const std::vector<double>& price_grid,
                                       std::uint64_t seed) {
  if (price_grid.empty()) throw ContractError("generate_tasks: price grid is empty");
  if (tasks_per_respondent == 0) {
    throw ContractError("generate_tasks: tasks_per_respondent must be at least 1");
  }
  for (double p : price_grid) {
    if (!(std::isfinite(p) && p > 0.0)) {
      throw ContractError("generate_tasks: price grid entries must be positive");
    }
  }
  const std::set<double> distinct_prices(price_grid.begin(), price_grid.end());
  if (scheme.profile_count(distinct_prices.size()) < 2.0) {
    throw DesignError("generate_tasks: scheme admits only one distinct profile");
  }

  constexpr int kMaxAttempts = 1000;
  std::vector<ChoiceTask> tasks;
  tasks.reserve(n_respondents * tasks_per_respondent);
  for (std::size_t i = 0; i < n_respondents; ++i) {
    Rng rng = make_rng(seed, Stream::tasks, i);
    for (std::size_t t = 0; t < tasks_per_respondent; ++t) {
      ChoiceTask task;
      task.respondent_id = static_cast<int>(i);
      task.task_id = static_cast<int>(t);
      int attempts = 0;
      do {
        if (++attempts > kMaxAttempts) {
          throw DesignError("generate_tasks: could not draw two distinct profiles in " +
                            std::to_string(kMaxAttempts) + " attempts");
        }
        task.profile_a = random_profile(scheme, price_grid, rng);
        task.profile_b = random_profile(scheme, price_grid, rng);
      } while (task.profile_a == task.profile_b);
      tasks.push_back(std::move(task));
    }
  }
  return tasks;
}

double simulated_choice_probability(double u_a, double u_b) {
  constexpr double kProbFloor = 1e-15;
  return std::clamp(choice_probability(u_a, u_b), kProbFloor, 1.0 - kProbFloor);
}

ChoiceDataset simulate_choices(const AttributeScheme& scheme,
                               const std::vector<RespondentParams>& respondents,
                               const std::vector<ChoiceTask>& tasks,
                               std::uint64_t seed) {
  std::map<int, const RespondentParams*> by_id;
  for (const auto& r : respondents) by_id[r.respondent_id] = &r;

  ChoiceDataset dataset;
  dataset.scheme = scheme;
  dataset.records.reserve(tasks.size());
  for (const auto& task : tasks) {
    const auto it = by_id.find(task.respondent_id);
    if (it == by_id.end()) {
      throw ContractError("simulate_choices: no parameters for respondent " +
                          std::to_string(task.respondent_id));
    }
    const Coefficients& beta = it->second->beta;
    const double u_a = utility(encode_profile(scheme, task.profile_a), beta);
    const double u_b = utility(encode_profile(scheme, task.profile_b), beta);
    const double p = simulated_choice_probability(u_a, u_b);

    Rng rng = make_rng(seed, Stream::choices, static_cast<std::uint64_t>(task.respondent_id),
                       static_cast<std::uint64_t>(task.task_id));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    dataset.records.push_back({task, unif(rng) < p});
  }
  return dataset;
}

SimulationResult simulate_survey(const AttributeScheme& scheme, const GroundTruth& truth,
                                 const SimulationConfig& config) {
  if (config.n_respondents == 0) {
    throw ConfigError("simulation.n_respondents must be at least 1");
  }
  if (config.tasks_per_respondent == 0) {
    throw ConfigError("simulation.tasks_per_respondent must be at least 1");
  }
  const std::vector<double>& grid =
      config.price_grid.empty() ? scheme.price().levels : config.price_grid;

  SimulationResult result;
  result.respondents = sample_respondents(
      scheme, truth, config.n_respondents,
      derive_seed(config.seed, Stream::respondents));
  const auto tasks = generate_tasks(scheme, config.n_respondents,
                                    config.tasks_per_respondent, grid,
                                    derive_seed(config.seed, Stream::tasks));
  result.dataset = simulate_choices(scheme, result.respondents, tasks,
                                    derive_seed(config.seed, Stream::choices));
  result.dataset.provenance = Provenance{truth, config.seed};
  return result;
}

}  // namespace conjoint
