#ifndef CONJOINT_REVENUE_HPP
#define CONJOINT_REVENUE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "conjoint/posterior.hpp"

namespace conjoint {

struct BundleUpgrade {
  std::string attribute;
  std::string level;

  bool operator==(const BundleUpgrade&) const = default;
};

/// A premium bundle (baseline plus upgrades) offered at a candidate price
/// against the baseline product at its fixed price. Consumers choose
/// between the two; there is no outside option.
struct BundleScenario {
  ProductProfile baseline;
  std::vector<BundleUpgrade> upgrades;
  std::vector<double> price_grid;  // strictly increasing, positive
  std::size_t market_size = 2000;

  void validate(const AttributeScheme& scheme) const;
  ProductProfile bundle_profile(double price) const;
  bool operator==(const BundleScenario&) const = default;
};

/// Pro camera + titanium frame over the $799 baseline, grid $799..$1299
/// in $25 steps.
BundleScenario paper_scenario(const AttributeScheme& scheme);

/// Simulated consumers of one posterior draw. Consumer c prefers the
/// bundle at price p with probability
///   sigmoid(feature_gain[c] + price_coef[c] * (p - baseline_price)).
struct Market {
  Eigen::VectorXd feature_gain;
  Eigen::VectorXd price_coef;  // all < kMaxPriceCoefficient
  double baseline_price = 0.0;
};

/// Draws scenario.market_size consumers with beta ~ Normal(mu, sigma) on
/// the unscaled scale; the price coefficient is truncated to be negative.
/// The same `seed` always yields the same consumers (common random numbers).
Market simulate_market(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                       const AttributeScheme& scheme, const BundleScenario& scenario,
                       std::uint64_t seed);

/// Share of the market choosing the bundle at `price`, averaged over the
/// consumers' logit probabilities.
double purchase_probability(const Market& market, double price);

double purchase_probability(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                            const AttributeScheme& scheme, const BundleScenario& scenario,
                            double price, std::uint64_t seed);

struct PricePoint {
  double price = 0.0;
  double mean = 0.0;
  double hdi_low = 0.0;
  double hdi_high = 0.0;
};

struct RevenueCurve {
  std::vector<double> prices;
  Eigen::MatrixXd probability;  // retained draws x prices
  Eigen::MatrixXd revenue;      // price * probability, dollars per consumer
  std::vector<PricePoint> summary;
  std::vector<double> draw_argmax;  // revenue-maximizing grid price per draw
  double argmax_price = 0.0;        // maximizer of the mean revenue
  Interval argmax_hdi;
  std::size_t flagged_count = 0;
  std::vector<std::string> warnings;
};

/// Expected revenue per consumer over the price grid for every sign-safe
/// posterior draw. Draw d uses consumer stream (seed, d), so the result
/// does not depend on `threads`.
RevenueCurve revenue_curve(const PosteriorDraws& draws, const BundleScenario& scenario,
                           std::uint64_t seed, double mass = 0.95, std::size_t threads = 1,
                           double epsilon = kDefaultSignEpsilon);

void write_revenue_summary_csv(std::ostream& out, const RevenueCurve& curve);
/// One row per retained draw, one column per grid price.
void write_revenue_draws_csv(std::ostream& out, const RevenueCurve& curve);

}  // namespace conjoint

#endif  // CONJOINT_REVENUE_HPP
