#include "conjoint/revenue.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <set>
#include <thread>

#include "conjoint/format.hpp"
#include "conjoint/rng.hpp"

namespace conjoint {

void BundleScenario::validate(const AttributeScheme& scheme) const {
  if (price_grid.empty()) throw ConfigError("scenario.price_grid must not be empty");
  for (std::size_t i = 0; i < price_grid.size(); ++i) {
    if (!(std::isfinite(price_grid[i]) && price_grid[i] > 0.0)) {
      throw ConfigError("scenario.price_grid entries must be positive");
    }
    if (i > 0 && !(price_grid[i] > price_grid[i - 1])) {
      throw ConfigError("scenario.price_grid must be strictly increasing");
    }
  }
  if (upgrades.empty()) throw ConfigError("scenario.upgrades must not be empty");
  if (market_size == 0) throw ConfigError("scenario.market_size must be at least 1");
  try {
    validate_profile(scheme, baseline);
  } catch (const CodingError& e) {
    throw ConfigError(std::string("scenario.baseline: ") + e.what());
  }
  std::set<std::string> seen;
  for (const auto& u : upgrades) {
    try {
      scheme.column_for(u.attribute, u.level);
    } catch (const CodingError& e) {
      throw ConfigError(std::string("scenario.upgrades: ") + e.what());
    }
    if (!seen.insert(u.attribute).second) {
      throw ConfigError("scenario.upgrades names attribute '" + u.attribute + "' twice");
    }
  }
}

ProductProfile BundleScenario::bundle_profile(double price) const {
  ProductProfile p = baseline;
  for (const auto& u : upgrades) p.level_by_attribute[u.attribute] = u.level;
  p.price = price;
  return p;
}

BundleScenario paper_scenario(const AttributeScheme& scheme) {
  BundleScenario s;
  s.baseline = baseline_profile(scheme, 799.0);
  s.upgrades = {{"camera", "Pro"}, {"frame", "Titanium"}};
  for (double p = 799.0; p <= 1299.0; p += 25.0) s.price_grid.push_back(p);
  s.market_size = 2000;
  return s;
}

Market simulate_market(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                       const AttributeScheme& scheme, const BundleScenario& scenario,
                       std::uint64_t seed) {
  const auto price_col = static_cast<Eigen::Index>(scheme.price_column());
  const Eigen::VectorXd diff = encode_profile(scheme, scenario.bundle_profile(scenario.baseline.price)) -
                               encode_profile(scheme, scenario.baseline);
  const auto n = static_cast<Eigen::Index>(scenario.market_size);
  const Eigen::Index k = mu.size();

  Market m;
  m.baseline_price = scenario.baseline.price;
  m.feature_gain.resize(n);
  m.price_coef.resize(n);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd beta(k);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index f = 0; f < k; ++f) beta[f] = mu[f] + sigma[f] * normal(rng);
    int attempts = 0;
    while (!(beta[price_col] < kMaxPriceCoefficient)) {
      if (++attempts > 1000) {
        beta[price_col] = kMaxPriceCoefficient;
        break;
      }
      beta[price_col] = mu[price_col] + sigma[price_col] * normal(rng);
    }
    m.price_coef[c] = beta[price_col];
    beta[price_col] = 0.0;
    m.feature_gain[c] = beta.dot(diff);
  }
  return m;
}

double purchase_probability(const Market& market, double price) {
  if (!(price > 0.0)) throw ContractError("purchase_probability: price must be positive");
  const double dp = price - market.baseline_price;
  double sum = 0.0;
  for (Eigen::Index c = 0; c < market.feature_gain.size(); ++c) {
    sum += sigmoid(market.feature_gain[c] + market.price_coef[c] * dp);
  }
  return sum / static_cast<double>(market.feature_gain.size());
}

double purchase_probability(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                            const AttributeScheme& scheme, const BundleScenario& scenario,
                            double price, std::uint64_t seed) {
  return purchase_probability(simulate_market(mu, sigma, scheme, scenario, seed), price);
}

RevenueCurve revenue_curve(const PosteriorDraws& draws, const BundleScenario& scenario,
                           std::uint64_t seed, double mass, std::size_t threads,
                           double epsilon) {
  const AttributeScheme& scheme = draws.scheme;
  scenario.validate(scheme);
  const Eigen::MatrixXd mu = unscale(draws);
  const Eigen::MatrixXd sigma = unscale_sigma(draws);

  std::vector<Eigen::Index> kept;
  RevenueCurve curve;
  for (Eigen::Index d = 0; d < mu.rows(); ++d) {
    if (price_is_sign_safe(mu(d, draws.price_column), epsilon)) {
      kept.push_back(d);
    } else {
      ++curve.flagged_count;
    }
  }
  if (kept.empty() || static_cast<double>(curve.flagged_count) >
                          kPopulationFlagLimit * static_cast<double>(mu.rows())) {
    throw SignSafetyError("revenue: " + std::to_string(curve.flagged_count) + " of " +
                          std::to_string(mu.rows()) +
                          " draws have a non-negative price effect");
  }

  curve.prices = scenario.price_grid;
  const auto n_prices = static_cast<Eigen::Index>(curve.prices.size());
  const auto n_draws = static_cast<Eigen::Index>(kept.size());
  curve.probability.resize(n_draws, n_prices);

  std::atomic<Eigen::Index> next{0};
  auto worker = [&]() {
    for (Eigen::Index i = next++; i < n_draws; i = next++) {
      const Eigen::Index d = kept[static_cast<std::size_t>(i)];
      const Market market =
          simulate_market(mu.row(d).transpose(), sigma.row(d).transpose(), scheme, scenario,
                          derive_seed(seed, Stream::market, static_cast<std::uint64_t>(d)));
      for (Eigen::Index j = 0; j < n_prices; ++j) {
        curve.probability(i, j) = purchase_probability(market, curve.prices[static_cast<std::size_t>(j)]);
      }
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(threads, 1, kept.size());
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const Eigen::RowVectorXd price_row =
      Eigen::Map<const Eigen::RowVectorXd>(curve.prices.data(), n_prices);
  curve.revenue = curve.probability.array().rowwise() * price_row.array();

  for (Eigen::Index j = 0; j < n_prices; ++j) {
    const Eigen::VectorXd col = curve.revenue.col(j);
    const Interval interval = hdi(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), mass);
    curve.summary.push_back({curve.prices[static_cast<std::size_t>(j)], col.mean(), interval.low,
                             interval.high});
  }
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < n_prices; ++j) {
    if (curve.summary[static_cast<std::size_t>(j)].mean >
        curve.summary[static_cast<std::size_t>(best)].mean) {
      best = j;
    }
  }
  curve.argmax_price = curve.prices[static_cast<std::size_t>(best)];
  for (Eigen::Index i = 0; i < n_draws; ++i) {
    Eigen::Index j_max = 0;
    curve.revenue.row(i).maxCoeff(&j_max);
    curve.draw_argmax.push_back(curve.prices[static_cast<std::size_t>(j_max)]);
  }
  curve.argmax_hdi = hdi(curve.draw_argmax, mass);
  if (n_prices == 1) {
    curve.warnings.push_back("price grid has a single point; the optimum is that price by construction");
  } else if (best == 0 || best == n_prices - 1) {
    curve.warnings.push_back("revenue is maximized at the edge of the price grid; widen the grid");
  }
  return curve;
}

void write_revenue_summary_csv(std::ostream& out, const RevenueCurve& curve) {
  out << "price,mean,hdi_low,hdi_high\n";
  for (const auto& p : curve.summary) {
    out << format_number(p.price) << ',' << format_number(p.mean) << ','
        << format_number(p.hdi_low) << ',' << format_number(p.hdi_high) << '\n';
  }
}

void write_revenue_draws_csv(std::ostream& out, const RevenueCurve& curve) {
  for (std::size_t j = 0; j < curve.prices.size(); ++j) {
    out << (j ? "," : "") << format_number(curve.prices[j]);
  }
  out << '\n';
  for (Eigen::Index i = 0; i < curve.revenue.rows(); ++i) {
    for (Eigen::Index j = 0; j < curve.revenue.cols(); ++j) {
      if (j) out << ',';
      out << format_number(curve.revenue(i, j));
    }
    out << '\n';
  }
}

}  // namespace conjoint
