#include "conjoint/infer.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>

#include "conjoint/diagnostics.hpp"
#include "conjoint/nuts.hpp"
#include "conjoint/rng.hpp"

namespace conjoint {

Eigen::Index PosteriorDraws::column(const std::string& name) const {
  for (std::size_t j = 0; j < column_names.size(); ++j) {
    if (column_names[j] == name) return static_cast<Eigen::Index>(j);
  }
  throw ContractError("posterior has no column '" + name + "'");
}

Eigen::Index PosteriorDraws::respondent_index(int respondent_id) const {
  for (std::size_t r = 0; r < respondent_ids.size(); ++r) {
    if (respondent_ids[r] == respondent_id) return static_cast<Eigen::Index>(r);
  }
  throw ContractError("respondent " + std::to_string(respondent_id) +
                      " was not part of the fitted dataset");
}

Eigen::VectorXd PosteriorDraws::individual_beta(Eigen::Index draw, Eigen::Index respondent) const {
  const Eigen::Index k = columns();
  Eigen::VectorXd beta = mu.row(draw).transpose();
  if (hierarchical) {
    beta += sigma.row(draw).transpose().cwiseProduct(
        z.row(draw).segment(respondent * k, k).transpose());
  }
  return beta;
}

double Diagnostics::max_population_rhat() const {
  double worst = 1.0;
  for (std::size_t i = 0; i < population_parameters; ++i) worst = std::max(worst, r_hat[i]);
  return worst;
}

double Diagnostics::min_population_ess() const {
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < population_parameters; ++i) lowest = std::min(lowest, ess[i]);
  return lowest;
}

double Diagnostics::divergence_rate(std::size_t total_draws) const {
  return total_draws == 0 ? 0.0
                          : static_cast<double>(divergence_count) / static_cast<double>(total_draws);
}

std::size_t thread_limit_from_env() {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CONJOINT_WTP_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return hw;
}

Diagnostics compute_diagnostics(const std::vector<std::string>& names,
                                const std::vector<Eigen::MatrixXd>& chain_draws,
                                std::size_t population_parameters) {
  Diagnostics d;
  d.parameter_names = names;
  d.population_parameters = population_parameters;
  const auto chains = static_cast<Eigen::Index>(chain_draws.size());
  const Eigen::Index n = chain_draws.empty() ? 0 : chain_draws.front().rows();
  Eigen::MatrixXd by_chain(n, chains);
  for (std::size_t p = 0; p < names.size(); ++p) {
    for (Eigen::Index c = 0; c < chains; ++c) {
      by_chain.col(c) = chain_draws[static_cast<std::size_t>(c)].col(static_cast<Eigen::Index>(p));
    }
    d.r_hat.push_back(n >= 4 ? rank_normalized_rhat(by_chain)
                             : std::numeric_limits<double>::quiet_NaN());
    d.ess.push_back(n >= 8 ? bulk_ess(by_chain) : std::numeric_limits<double>::quiet_NaN());
  }
  return d;
}

SampleResult sample(const Design& design, const ModelConfig& config,
                    const AttributeScheme& scheme, std::size_t threads) {
  config.validate();
  const HierarchicalLogit model(design, config);
  const auto n_chains = static_cast<std::size_t>(config.chains);

  ChainSettings settings;
  settings.warmup = config.warmup_per_chain;
  settings.draws = config.draws_per_chain;
  settings.target_accept = config.target_accept;
  settings.max_tree_depth = config.max_tree_depth;

  std::vector<ChainResult> results(n_chains);
  std::vector<std::exception_ptr> errors(n_chains);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t c = next++; c < n_chains; c = next++) {
      try {
        Rng rng = make_rng(config.seed, Stream::chain, c);
        results[c] = run_chain(model, settings, rng);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(threads, 1, n_chains);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const Eigen::Index k = design.columns();
  const Eigen::Index r = design.respondents();
  const Eigen::Index per_chain = config.draws_per_chain;
  const Eigen::Index total = per_chain * config.chains;

  SampleResult out;
  PosteriorDraws& draws = out.draws;
  draws.scheme = scheme;
  draws.column_names = design.column_names;
  draws.price_column = design.price_column;
  draws.respondent_ids = design.respondent_ids;
  draws.hierarchical = config.hierarchical;
  draws.standardization = design.standardization;
  draws.mu.resize(total, k);
  if (config.hierarchical) {
    draws.sigma.resize(total, k);
    draws.z.resize(total, r * k);
  }
  for (std::size_t c = 0; c < n_chains; ++c) {
    const ChainResult& res = results[c];
    const Eigen::Index offset = static_cast<Eigen::Index>(c) * per_chain;
    draws.mu.middleRows(offset, per_chain) = res.draws.leftCols(k);
    if (config.hierarchical) {
      draws.sigma.middleRows(offset, per_chain) = res.draws.middleCols(k, k).array().exp();
      draws.z.middleRows(offset, per_chain) = res.draws.rightCols(r * k);
    }
    for (Eigen::Index i = 0; i < per_chain; ++i) {
      draws.chain.push_back(static_cast<int>(c));
      draws.draw_index.push_back(static_cast<int>(i));
      draws.divergent.push_back(res.divergent[static_cast<std::size_t>(i)]);
    }
  }

  std::vector<std::string> names = model.parameter_names();
  std::vector<Eigen::MatrixXd> chain_draws;
  for (const auto& res : results) chain_draws.push_back(res.draws);
  const std::size_t population =
      static_cast<std::size_t>(config.hierarchical ? 2 * k : k);
  for (std::size_t i = static_cast<std::size_t>(k); i < population; ++i) {
    // Reported as sigma; rank-based diagnostics are invariant to the log.
    names[i].replace(0, std::string("log_sigma").size(), "sigma");
  }
  Diagnostics& diag = out.diagnostics;
  diag = compute_diagnostics(names, chain_draws, population);
  for (const auto& res : results) {
    diag.divergence_count += static_cast<int>(
        std::count(res.divergent.begin(), res.divergent.end(), std::uint8_t{1}));
    diag.warmup_divergences += res.warmup_divergences;
    double acc = 0.0, depth = 0.0;
    for (double a : res.accept_stat) acc += a;
    for (int t : res.tree_depth) depth += t;
    diag.mean_accept_prob.push_back(acc / static_cast<double>(per_chain));
    diag.mean_tree_depth.push_back(depth / static_cast<double>(per_chain));
    diag.step_size.push_back(res.step_size);
  }

  const double rate = diag.divergence_rate(static_cast<std::size_t>(total));
  if (rate > kMaxDivergenceRate) {
    throw FitError("sampler: " + std::to_string(diag.divergence_count) + " of " +
                   std::to_string(total) +
                   " post-warmup draws diverged; raise target_accept or tighten priors");
  }
  if (diag.max_population_rhat() > kRhatWarning) {
    diag.warnings.push_back("population r_hat " + std::to_string(diag.max_population_rhat()) +
                            " exceeds " + std::to_string(kRhatWarning) +
                            "; chains have not converged");
  }
  return out;
}

}  // namespace conjoint
