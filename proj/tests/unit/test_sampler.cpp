#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "../support/fixtures.hpp"
#include "conjoint/diagnostics.hpp"
#include "conjoint/errors.hpp"
#include "conjoint/infer.hpp"
#include "conjoint/nuts.hpp"

using namespace conjoint;

namespace {

Eigen::MatrixXd iid_normal(Eigen::Index n, Eigen::Index chains, std::uint64_t seed,
                           double shift_per_chain = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(n, chains);
  for (Eigen::Index c = 0; c < chains; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) m(i, c) = n01(rng) + shift_per_chain * double(c);
  }
  return m;
}

}  // namespace

TEST_CASE("R-hat is near one for well-mixed chains and large for separated ones") {
  // Production length (2000 per chain) keeps R-hat >= 1 - 1e-3.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Eigen::MatrixXd good = iid_normal(2000, 4, seed);
    CHECK(rank_normalized_rhat(good) < 1.01);
    CHECK(rank_normalized_rhat(good) > 1.0 - 1e-3);
  }
  CHECK(rank_normalized_rhat(iid_normal(1000, 4, 2, 1.0)) > 1.1);

  // Each chain drifts: only the split version notices.
  Eigen::MatrixXd trend(1000, 4);
  for (Eigen::Index c = 0; c < 4; ++c) {
    for (Eigen::Index i = 0; i < 1000; ++i) trend(i, c) = double(i) / 250.0;
  }
  trend += 0.1 * iid_normal(1000, 4, 3);
  CHECK(split_rhat(trend) > 1.5);

  CHECK(rank_normalized_rhat(Eigen::MatrixXd::Constant(100, 4, 2.5)) == 1.0);
}

TEST_CASE("ESS matches theory for AR(1) chains") {
  SUBCASE("independent draws") {
    const double ess = bulk_ess(iid_normal(2000, 4, 9));
    CHECK(ess > 0.8 * 8000);
    CHECK(ess < 1.2 * 8000);
  }
  SUBCASE("phi = 0.9") {
    const double phi = 0.9;
    std::mt19937_64 rng(10);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd m(20000, 4);
    for (Eigen::Index c = 0; c < 4; ++c) {
      double x = n01(rng) / std::sqrt(1 - phi * phi);
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        x = phi * x + n01(rng);
        m(i, c) = x;
      }
    }
    const double expected = 80000.0 * (1 - phi) / (1 + phi);
    CHECK(effective_sample_size(m) == doctest::Approx(expected).epsilon(0.2));
  }
}

TEST_CASE("split and rank helpers") {
  Eigen::MatrixXd m(5, 2);
  m << 1, 6, 2, 7, 3, 8, 4, 9, 5, 10;
  const Eigen::MatrixXd s = split_chains(m);
  CHECK(s.rows() == 2);
  CHECK(s.cols() == 4);
  CHECK(s(0, 0) == 1);
  CHECK(s(1, 1) == 5);  // odd middle draw is dropped
  const Eigen::MatrixXd z = rank_normalize(m);
  CHECK(z.rows() == 5);
  CHECK(std::abs(z.mean()) < 1e-12);
  CHECK(z(0, 0) < z(4, 0));
  CHECK(z(4, 0) < z(0, 1));
}

TEST_CASE("leapfrog is reversible") {
  const Design d = fixture::design(5, 20, 61);
  const HierarchicalLogit model(d, ModelConfig{});
  Rng rng(3);
  PhasePoint z;
  z.q = random_initial_state(model, rng);
  std::normal_distribution<double> n01;
  z.p.resize(z.q.size());
  for (Eigen::Index i = 0; i < z.p.size(); ++i) z.p[i] = n01(rng);
  refresh(model, z);
  const Eigen::VectorXd inv_metric = Eigen::VectorXd::Constant(z.q.size(), 0.7);
  const PhasePoint start = z;
  for (int i = 0; i < 30; ++i) leapfrog(model, z, inv_metric, 0.05);
  CHECK((z.q - start.q).norm() > 0.1);
  z.p = -z.p;
  for (int i = 0; i < 30; ++i) leapfrog(model, z, inv_metric, 0.05);
  CHECK((z.q - start.q).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK((z.p + start.p).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("energy is nearly conserved at the adapted step size") {
  const Design d = fixture::design(20, 20, 62);
  const HierarchicalLogit model(d, ModelConfig{});
  Rng rng(4);
  ChainSettings settings;
  settings.warmup = 500;
  settings.draws = 50;
  const ChainResult chain = run_chain(model, settings, rng);

  std::normal_distribution<double> n01;
  std::vector<double> errors;
  for (Eigen::Index s = 0; s < chain.draws.rows(); ++s) {
    PhasePoint z;
    z.q = chain.draws.row(s).transpose();
    z.p.resize(z.q.size());
    for (Eigen::Index i = 0; i < z.p.size(); ++i) {
      z.p[i] = n01(rng) / std::sqrt(chain.inv_metric[i]);
    }
    refresh(model, z);
    const double h0 = hamiltonian(z, chain.inv_metric);
    for (int i = 0; i < 16; ++i) leapfrog(model, z, chain.inv_metric, chain.step_size);
    errors.push_back(std::abs(hamiltonian(z, chain.inv_metric) - h0));
  }
  std::nth_element(errors.begin(), errors.begin() + errors.size() / 2, errors.end());
  CHECK(errors[errors.size() / 2] < 0.2);
}

TEST_CASE("dual averaging converges to the target acceptance") {
  DualAveraging da(0.8);
  da.set_mu(std::log(10.0));
  // Acceptance falls with step size: a = exp(-eps). Fixed point eps = -log(0.8).
  double eps = 1.0;
  for (int i = 0; i < 2000; ++i) eps = da.learn(std::exp(-eps));
  CHECK(da.final_step_size() == doctest::Approx(-std::log(0.8)).epsilon(0.02));
}

TEST_CASE("sampling is seeded and thread-count invariant") {
  const Design d = fixture::design(10, 10, 63);
  ModelConfig cfg;
  cfg.chains = 3;
  cfg.warmup_per_chain = 150;
  cfg.draws_per_chain = 100;
  cfg.seed = 77;
  const SampleResult a = sample(d, cfg, paper_scheme(), 1);
  const SampleResult b = sample(d, cfg, paper_scheme(), 3);
  CHECK(a.draws.mu == b.draws.mu);
  CHECK(a.draws.sigma == b.draws.sigma);
  CHECK(a.draws.z == b.draws.z);
  CHECK(a.draws.divergent == b.draws.divergent);
  CHECK(a.draws.draws() == 300);
  CHECK((a.draws.sigma.array() > 0).all());
  CHECK(a.draws.chain[0] == 0);
  CHECK(a.draws.chain[299] == 2);
  cfg.seed = 78;
  CHECK(sample(d, cfg, paper_scheme(), 1).draws.mu != a.draws.mu);

  const Diagnostics& diag = a.diagnostics;
  CHECK(diag.population_parameters == 10);
  CHECK(diag.parameter_names.size() == diag.r_hat.size());
  // Short chains: split R-hat can dip to sqrt((n - 1) / n) below one.
  for (double r : diag.r_hat) CHECK(r > std::sqrt(49.0 / 50.0) - 1e-12);
  CHECK(diag.mean_accept_prob.size() == 3);
}

TEST_CASE("pooled prior-only run reproduces a standard normal") {
  const Design d = empty_design({"f", "price"}, 1, 0);
  ModelConfig cfg;
  cfg.hierarchical = false;
  cfg.prior_mu_price = {0.0, 1.0};
  cfg.prior_mu_feature = {0.0, 1.0};
  cfg.seed = 5;
  const SampleResult res = sample(d, cfg);
  REQUIRE(res.draws.draws() == 8000);
  for (Eigen::Index c = 0; c < 2; ++c) {
    const Eigen::VectorXd col = res.draws.mu.col(c);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / double(col.size() - 1));
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(sd - 1.0) < 0.05);
  }
  CHECK(res.diagnostics.divergence_count == 0);
}

TEST_CASE("individual beta reconstructs from mu, sigma and z") {
  const Design d = fixture::design(4, 10, 64);
  ModelConfig cfg;
  cfg.chains = 1;
  cfg.warmup_per_chain = 50;
  cfg.draws_per_chain = 20;
  const SampleResult res = sample(d, cfg);
  const auto& p = res.draws;
  for (Eigen::Index s = 0; s < p.draws(); s += 7) {
    for (Eigen::Index r = 0; r < 4; ++r) {
      const Eigen::VectorXd expected =
          p.mu.row(s).transpose() +
          p.sigma.row(s).transpose().cwiseProduct(p.z.row(s).segment(r * 5, 5).transpose());
      CHECK(p.individual_beta(s, r).isApprox(expected, 1e-14));
    }
  }
}
