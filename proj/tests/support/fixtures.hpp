// Small simulated datasets shared by the tests.
#ifndef CONJOINT_TESTS_FIXTURES_HPP
#define CONJOINT_TESTS_FIXTURES_HPP

#include "conjoint/design.hpp"
#include "conjoint/infer.hpp"
#include "conjoint/simulate.hpp"

namespace fixture {

inline conjoint::ChoiceDataset survey(std::size_t respondents, std::size_t tasks,
                                      std::uint64_t seed) {
  conjoint::SimulationConfig cfg;
  cfg.n_respondents = respondents;
  cfg.tasks_per_respondent = tasks;
  cfg.seed = seed;
  return conjoint::simulate_survey(conjoint::paper_scheme(), conjoint::paper_ground_truth(), cfg)
      .dataset;
}

inline conjoint::Design design(std::size_t respondents, std::size_t tasks, std::uint64_t seed) {
  return conjoint::build_design(survey(respondents, tasks, seed));
}

/// Hand-built posterior over the paper scheme. `sigma` may be empty for a
/// pooled posterior; `z` may be empty when there are no respondents.
inline conjoint::PosteriorDraws synthetic_draws(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& sigma,
                                                const Eigen::VectorXd& scale,
                                                const Eigen::MatrixXd& z = {},
                                                std::vector<int> respondent_ids = {}) {
  conjoint::PosteriorDraws d;
  d.scheme = conjoint::paper_scheme();
  d.column_names = d.scheme.column_names();
  d.price_column = static_cast<Eigen::Index>(d.scheme.price_column());
  d.respondent_ids = std::move(respondent_ids);
  d.hierarchical = sigma.size() > 0;
  d.mu = mu;
  d.sigma = sigma;
  d.z = z.size() > 0 ? z : Eigen::MatrixXd(mu.rows(), 0);
  d.standardization = conjoint::Standardization{Eigen::VectorXd::Zero(scale.size()), scale};
  for (Eigen::Index i = 0; i < mu.rows(); ++i) {
    d.chain.push_back(0);
    d.draw_index.push_back(static_cast<int>(i));
    d.divergent.push_back(0);
  }
  return d;
}

}  // namespace fixture

#endif  // CONJOINT_TESTS_FIXTURES_HPP
