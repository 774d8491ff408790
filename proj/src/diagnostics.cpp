#include "conjoint/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

namespace conjoint {
namespace {

double normal_quantile(double p) {
  return std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
}

bool is_constant(const Eigen::MatrixXd& draws) {
  return draws.size() == 0 || draws.maxCoeff() == draws.minCoeff();
}

double median(Eigen::VectorXd v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  const std::size_t mid = s.size() / 2;
  std::nth_element(s.begin(), s.begin() + static_cast<long>(mid), s.end());
  double m = s[mid];
  if (s.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(s.begin(), s.begin() + static_cast<long>(mid)));
  }
  return m;
}

// Biased autocovariance of one chain at `lag`.
double autocovariance(const Eigen::VectorXd& centered, Eigen::Index lag) {
  const Eigen::Index n = centered.size();
  return centered.head(n - lag).dot(centered.tail(n - lag)) / static_cast<double>(n);
}

}  // namespace

Eigen::MatrixXd split_chains(const Eigen::MatrixXd& draws) {
  const Eigen::Index n = draws.rows();
  const Eigen::Index half = n / 2;
  Eigen::MatrixXd out(half, 2 * draws.cols());
  for (Eigen::Index c = 0; c < draws.cols(); ++c) {
    out.col(2 * c) = draws.col(c).head(half);
    out.col(2 * c + 1) = draws.col(c).tail(half);
  }
  return out;
}

Eigen::MatrixXd rank_normalize(const Eigen::MatrixXd& draws) {
  const Eigen::Index s = draws.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(s));
  std::iota(order.begin(), order.end(), 0);
  const double* v = draws.data();
  std::stable_sort(order.begin(), order.end(),
                   [v](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
  Eigen::MatrixXd out(draws.rows(), draws.cols());
  double* o = out.data();
  const double denom = static_cast<double>(s) + 0.25;
  for (Eigen::Index i = 0; i < s;) {
    Eigen::Index j = i;
    while (j + 1 < s && v[order[static_cast<std::size_t>(j + 1)]] == v[order[static_cast<std::size_t>(i)]]) ++j;
    // Average 1-based rank of the tie block [i, j].
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    const double z = normal_quantile((rank - 0.375) / denom);
    for (Eigen::Index k = i; k <= j; ++k) o[order[static_cast<std::size_t>(k)]] = z;
    i = j + 1;
  }
  return out;
}

namespace {

// R-hat of chains that are already split.
double rhat_of_split(const Eigen::MatrixXd& split) {
  const auto n = static_cast<double>(split.rows());
  const Eigen::Index m = split.cols();
  if (split.rows() < 2 || m < 2) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::VectorXd means = split.colwise().mean().transpose();
  double within = 0.0;
  for (Eigen::Index c = 0; c < m; ++c) {
    within += (split.col(c).array() - means[c]).square().sum() / (n - 1.0);
  }
  within /= static_cast<double>(m);
  const double between =
      n * (means.array() - means.mean()).square().sum() / static_cast<double>(m - 1);
  const double var_hat = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_hat / within);
}

}  // namespace

double split_rhat(const Eigen::MatrixXd& draws) {
  if (is_constant(draws)) return 1.0;
  return rhat_of_split(split_chains(draws));
}

double rank_normalized_rhat(const Eigen::MatrixXd& draws) {
  if (is_constant(draws)) return 1.0;
  const Eigen::MatrixXd split = split_chains(draws);
  const double bulk = rhat_of_split(rank_normalize(split));
  const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(split.data(), split.size());
  const double med = median(flat);
  const Eigen::MatrixXd folded = (split.array() - med).abs().matrix();
  if (is_constant(folded)) return bulk;
  const double tail = rhat_of_split(rank_normalize(folded));
  return std::max(bulk, tail);
}

double effective_sample_size(const Eigen::MatrixXd& draws) {
  const Eigen::Index n = draws.rows();
  const Eigen::Index m = draws.cols();
  if (n < 4) return std::numeric_limits<double>::quiet_NaN();
  if (is_constant(draws)) return static_cast<double>(n * m);

  std::vector<Eigen::VectorXd> centered;
  Eigen::VectorXd chain_mean(m), chain_var(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    chain_mean[c] = draws.col(c).mean();
    centered.push_back(draws.col(c).array() - chain_mean[c]);
    chain_var[c] = autocovariance(centered.back(), 0) * static_cast<double>(n) /
                   static_cast<double>(n - 1);
  }
  auto mean_acov = [&](Eigen::Index lag) {
    double s = 0.0;
    for (const auto& x : centered) s += autocovariance(x, lag);
    return s / static_cast<double>(m);
  };

  const double mean_var = chain_var.mean();
  double var_plus = mean_var * static_cast<double>(n - 1) / static_cast<double>(n);
  if (m > 1) {
    var_plus += (chain_mean.array() - chain_mean.mean()).square().sum() /
                static_cast<double>(m - 1);
  }

  std::vector<double> rho(static_cast<std::size_t>(n), 0.0);
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  rho[0] = rho_even;
  rho[1] = rho_odd;
  Eigen::Index t = 1;
  while (t < n - 3 && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov(t + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(t + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[static_cast<std::size_t>(t + 1)] = rho_even;
      rho[static_cast<std::size_t>(t + 2)] = rho_odd;
    }
    t += 2;
  }
  const Eigen::Index max_t = t - 2;
  if (rho_even > 0.0) rho[static_cast<std::size_t>(max_t + 1)] = rho_even;

  // Initial monotone sequence.
  for (t = 1; t <= max_t - 2; t += 2) {
    const auto i = static_cast<std::size_t>(t);
    if (rho[i + 1] + rho[i + 2] > rho[i - 1] + rho[i]) {
      rho[i + 1] = 0.5 * (rho[i - 1] + rho[i]);
      rho[i + 2] = rho[i + 1];
    }
  }

  const double total = static_cast<double>(n * m);
  double tau = -1.0;
  for (Eigen::Index i = 0; i <= max_t; ++i) tau += 2.0 * rho[static_cast<std::size_t>(i)];
  tau += rho[static_cast<std::size_t>(max_t + 1)];
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

double bulk_ess(const Eigen::MatrixXd& draws) {
  if (is_constant(draws)) return static_cast<double>(draws.size());
  return effective_sample_size(rank_normalize(split_chains(draws)));
}

}  // namespace conjoint
