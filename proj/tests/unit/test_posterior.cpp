#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "conjoint/errors.hpp"
#include "conjoint/posterior.hpp"

using namespace conjoint;

namespace {

std::vector<double> normal_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::vector<double> v(n);
  for (auto& x : v) x = n01(rng);
  return v;
}

// mu rows with price coefficient -0.01 and the truth WTPs on unit scale.
Eigen::MatrixXd population_mu(Eigen::Index n, std::uint64_t seed, double price_sd = 0.001) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise;
  Eigen::MatrixXd mu(n, 5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double bp = -0.01 + price_sd * noise(rng);
    mu.row(i) << 1.0 + 0.05 * noise(rng), 2.5, 2.0, 0.8, bp;
  }
  return mu;
}

}  // namespace

TEST_CASE("HDI of a standard normal") {
  const auto v = normal_samples(100000, 1);
  const Interval i = hdi(v, 0.95);
  CHECK(std::abs(i.low + 1.959964) < 0.05);
  CHECK(std::abs(i.high - 1.959964) < 0.05);
}

TEST_CASE("HDI of an exponential hugs zero") {
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(100000);
  for (auto& x : v) x = ex(rng);
  const Interval i = hdi(v, 0.95);
  CHECK(i.low < 0.02);
  CHECK(i.high == doctest::Approx(-std::log(0.05)).epsilon(0.03));
}

TEST_CASE("HDI structural properties") {
  const auto v = normal_samples(5000, 3);
  const Interval narrow = hdi(v, 0.95);
  const Interval wide = hdi(v, 0.99);
  CHECK(wide.low <= narrow.low);
  CHECK(wide.high >= narrow.high);

  std::vector<double> shifted = v;
  for (auto& x : shifted) x += 12.5;
  const Interval moved = hdi(shifted, 0.95);
  CHECK(moved.low == doctest::Approx(narrow.low + 12.5).epsilon(1e-13));
  CHECK(moved.high == doctest::Approx(narrow.high + 12.5).epsilon(1e-13));

  const std::vector<double> constant(200, 4.25);
  const Interval flat = hdi(constant, 0.95);
  CHECK(flat.low == 4.25);
  CHECK(flat.high == 4.25);

  std::vector<double> even(100);
  for (int i = 0; i < 100; ++i) even[static_cast<std::size_t>(i)] = 99 - i;
  const Interval tie = hdi(even, 0.5);  // every 50-window has width 49
  CHECK(tie.low == 0.0);
  CHECK(tie.high == 49.0);

  CHECK_THROWS_AS(hdi(std::vector<double>(99, 1.0), 0.95), ContractError);
  CHECK_THROWS_AS(hdi(v, 1.0), ContractError);
  CHECK_THROWS_AS(hdi(v, 0.0), ContractError);
}

TEST_CASE("unscaling") {
  const Eigen::MatrixXd mu = population_mu(200, 4);
  const auto unit = fixture::synthetic_draws(mu, {}, Eigen::VectorXd::Ones(5));
  CHECK(unscale(unit) == mu);

  Eigen::VectorXd scale(5);
  scale << 0.47, 0.41, 0.5, 0.49, 180.0;
  const auto scaled = fixture::synthetic_draws(mu, {}, scale);
  const Eigen::MatrixXd un = unscale(scaled);
  for (Eigen::Index i = 0; i < mu.rows(); ++i) {
    for (Eigen::Index f = 0; f < 5; ++f) CHECK(un(i, f) == mu(i, f) / scale[f]);
  }
  // WTP from unscaled draws equals the standardized ratio times scale_price / scale_f.
  const WtpDraws w = wtp_draws(scaled, "camera:Pro");
  for (std::size_t i = 0; i < w.draws.size(); ++i) {
    const double std_ratio = -mu(Eigen::Index(i), 2) / mu(Eigen::Index(i), 4);
    CHECK(w.draws[i] == doctest::Approx(std_ratio * scale[4] / scale[2]).epsilon(1e-14));
  }

  auto missing = unit;
  missing.standardization.reset();
  CHECK_THROWS_AS(unscale(missing), ContractError);
}

TEST_CASE("WTP is a per-draw ratio, not a ratio of means") {
  // Price coefficient close to zero with a long tail: the ratio is skewed.
  std::mt19937_64 rng(5);
  std::lognormal_distribution<double> ln(std::log(0.005), 0.6);
  Eigen::MatrixXd mu(4000, 5);
  for (Eigen::Index i = 0; i < mu.rows(); ++i) mu.row(i) << 0.5, 1.2, 1.0, 0.4, -ln(rng);
  const auto draws = fixture::synthetic_draws(mu, {}, Eigen::VectorXd::Ones(5));
  const WtpDraws w = wtp_draws(draws, "camera:Pro");
  REQUIRE(w.draws.size() == 4000);
  double per_draw = 0.0;
  for (Eigen::Index i = 0; i < mu.rows(); ++i) per_draw += -mu(i, 2) / mu(i, 4);
  per_draw /= 4000.0;
  CHECK(w.mean() == doctest::Approx(per_draw).epsilon(1e-12));
  const double ratio_of_means = -mu.col(2).mean() / mu.col(4).mean();
  CHECK(std::abs(w.mean() - ratio_of_means) > 0.1 * ratio_of_means);
  CHECK_THROWS_AS(wtp_draws(draws, "price"), ContractError);
}

TEST_CASE("population sign-safety limit") {
  Eigen::MatrixXd mu = population_mu(1000, 6);
  mu(10, 4) = 0.002;
  const auto one = fixture::synthetic_draws(mu, {}, Eigen::VectorXd::Ones(5));
  const WtpDraws w = wtp_draws(one, "frame:Titanium");
  CHECK(w.flagged_count == 1);
  CHECK(w.draws.size() == 999);
  CHECK(w.total_draws == 1000);
  mu(11, 4) = 0.0;
  const auto two = fixture::synthetic_draws(mu, {}, Eigen::VectorXd::Ones(5));
  CHECK_THROWS_AS(wtp_draws(two, "frame:Titanium"), SignSafetyError);
}

TEST_CASE("individual WTP flags noisy respondents instead of failing") {
  const Eigen::Index n = 1000;
  Eigen::MatrixXd mu = population_mu(n, 7, 0.0);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(n, 5, 0.002);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, 10);  // two respondents
  // Respondent 1 gets a positive price coefficient in 1% of draws.
  for (Eigen::Index i = 0; i < 10; ++i) z(i, 9) = 10.0;
  const auto draws = fixture::synthetic_draws(mu, sigma, Eigen::VectorXd::Ones(5), z, {3, 8});
  const WtpDraws clean = individual_wtp(draws, 3, "camera:Pro");
  CHECK_FALSE(clean.flagged);
  CHECK(clean.mean() == doctest::Approx(200.0).epsilon(1e-12));
  const WtpDraws noisy = individual_wtp(draws, 8, "camera:Pro");
  CHECK(noisy.flagged);
  CHECK(noisy.flagged_count == 10);
  CHECK_THROWS_AS(individual_wtp(draws, 99, "camera:Pro"), ContractError);
}

TEST_CASE("recovery report examples") {
  GroundTruth truth;
  truth.true_wtp = {{"storage:256GB", 100}, {"frame:Titanium", 80}, {"camera:Pro", 200}};
  const std::vector<WtpSummary> sums{{"storage:256GB", 102, 95, 109, 0.95, 0},
                                     {"frame:Titanium", 80, 75, 85, 0.95, 0},
                                     {"camera:Pro", 210, 200, 220, 0.95, 0}};
  const RecoveryReport rep = recovery_report(truth, sums);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].covered);
  CHECK(rep.rows[0].abs_error == 2.0);
  CHECK(rep.rows[1].covered);
  CHECK(rep.rows[1].abs_error == 0.0);
  CHECK(rep.rows[2].covered);  // endpoint counts
  CHECK(rep.overall_pass);

  const std::vector<WtpSummary> miss{{"storage:256GB", 120, 111, 130, 0.95, 0},
                                     {"frame:Titanium", 80, 75, 85, 0.95, 0},
                                     {"camera:Pro", 200, 190, 210, 0.95, 0}};
  CHECK_FALSE(recovery_report(truth, miss).overall_pass);
  CHECK_THROWS_AS(recovery_report(truth, {sums[0]}), ContractError);
}

TEST_CASE("summary CSV layout") {
  const auto draws = fixture::synthetic_draws(population_mu(500, 9), {}, Eigen::VectorXd::Ones(5));
  const auto all = all_wtp_draws(draws);
  REQUIRE(all.size() == 4);
  std::vector<WtpSummary> sums;
  for (const auto& w : all) sums.push_back(summarize(w));
  std::ostringstream with_truth, without;
  const GroundTruth truth = paper_ground_truth();
  write_wtp_summary_csv(with_truth, sums, &truth);
  write_wtp_summary_csv(without, sums);
  std::string line;
  std::istringstream in(with_truth.str());
  std::getline(in, line);
  CHECK(line == "feature,true_wtp,mean,hdi_low,hdi_high,hdi_mass,flagged_count");
  std::getline(in, line);
  CHECK(line.rfind("storage:256GB,100,", 0) == 0);
  std::istringstream in2(without.str());
  std::getline(in2, line);
  std::getline(in2, line);
  CHECK(line.rfind("storage:256GB,,", 0) == 0);

  std::ostringstream draws_csv;
  write_wtp_draws_csv(draws_csv, all);
  std::istringstream in3(draws_csv.str());
  std::getline(in3, line);
  CHECK(line == "storage:256GB,storage:512GB,camera:Pro,frame:Titanium");
}
