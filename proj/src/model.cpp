#include "conjoint/model.hpp"

#include <cmath>
#include <numbers>

#include "conjoint/domain.hpp"

namespace conjoint {
namespace {

const double kLogSqrtTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

void ModelConfig::validate() const {
  if (chains < 1) throw ConfigError("model.chains must be at least 1");
  if (draws_per_chain < 1) throw ConfigError("model.draws_per_chain must be at least 1");
  if (warmup_per_chain < 0) throw ConfigError("model.warmup_per_chain must be non-negative");
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw ConfigError("model.target_accept must lie in (0, 1)");
  }
  if (max_tree_depth < 1) throw ConfigError("model.max_tree_depth must be at least 1");
  if (!(prior_mu_price.sd > 0.0)) throw ConfigError("model.prior_mu_price.sd must be positive");
  if (!(prior_mu_feature.sd > 0.0)) {
    throw ConfigError("model.prior_mu_feature.sd must be positive");
  }
  if (!(prior_sigma_sd > 0.0)) throw ConfigError("model.prior_sigma_sd must be positive");
  if (!std::isfinite(prior_mu_price.mean) || !std::isfinite(prior_mu_feature.mean)) {
    throw ConfigError("model prior means must be finite");
  }
}

HierarchicalLogit::HierarchicalLogit(const Design& design, const ModelConfig& config)
    : design_(&design),
      sigma_sd_(config.prior_sigma_sd),
      hierarchical_(config.hierarchical),
      k_(design.columns()),
      r_(design.respondents()) {
  config.validate();
  prior_mean_ = Eigen::VectorXd::Constant(k_, config.prior_mu_feature.mean);
  prior_sd_ = Eigen::VectorXd::Constant(k_, config.prior_mu_feature.sd);
  prior_mean_[design.price_column] = config.prior_mu_price.mean;
  prior_sd_[design.price_column] = config.prior_mu_price.sd;
  dimension_ = hierarchical_ ? 2 * k_ + r_ * k_ : k_;
  xt_ = design.x.transpose();
}

std::vector<std::string> HierarchicalLogit::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(dimension_));
  for (const auto& c : design_->column_names) names.push_back("mu[" + c + "]");
  if (!hierarchical_) return names;
  for (const auto& c : design_->column_names) names.push_back("log_sigma[" + c + "]");
  for (Eigen::Index r = 0; r < r_; ++r) {
    const auto id = std::to_string(design_->respondent_ids[static_cast<std::size_t>(r)]);
    for (const auto& c : design_->column_names) names.push_back("z[" + id + "," + c + "]");
  }
  return names;
}

Eigen::VectorXd HierarchicalLogit::respondent_beta(const Eigen::VectorXd& theta,
                                                   Eigen::Index r) const {
  const auto mu = theta.segment(0, k_);
  if (!hierarchical_) return mu;
  const Eigen::VectorXd sigma = theta.segment(k_, k_).array().exp();
  return mu + sigma.cwiseProduct(theta.segment(z_offset(r), k_));
}

double HierarchicalLogit::log_density(const Eigen::VectorXd& theta) const {
  return evaluate(theta, nullptr, true, true);
}

double HierarchicalLogit::log_density_gradient(const Eigen::VectorXd& theta,
                                               Eigen::VectorXd& grad) const {
  return evaluate(theta, &grad, true, true);
}

double HierarchicalLogit::log_prior(const Eigen::VectorXd& theta) const {
  return evaluate(theta, nullptr, true, false);
}

double HierarchicalLogit::log_likelihood(const Eigen::VectorXd& theta) const {
  return evaluate(theta, nullptr, false, true);
}

double HierarchicalLogit::evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                                   bool prior, bool likelihood) const {
  if (theta.size() != dimension_) {
    throw ContractError("log_posterior: state has " + std::to_string(theta.size()) +
                        " entries, model expects " + std::to_string(dimension_));
  }
  if (grad) grad->setZero(dimension_);
  double lp = 0.0;

  const auto mu = theta.segment(0, k_);
  Eigen::VectorXd sigma;

  if (prior) {
    // mu_f ~ Normal(m_f, s_f)
    const Eigen::ArrayXd u = (mu - prior_mean_).array() / prior_sd_.array();
    lp += -0.5 * u.square().sum() - prior_sd_.array().log().sum() -
          static_cast<double>(k_) * kLogSqrtTwoPi;
    if (grad) grad->segment(0, k_).array() -= u / prior_sd_.array();
  }

  if (hierarchical_) {
    const auto log_sigma = theta.segment(k_, k_);
    sigma = log_sigma.array().exp();
    if (prior) {
      // sigma_f ~ HalfNormal(s) with the Jacobian of sigma = exp(log_sigma).
      const Eigen::ArrayXd v = sigma.array() / sigma_sd_;
      lp += static_cast<double>(k_) * (std::log(2.0) - std::log(sigma_sd_) - kLogSqrtTwoPi) -
            0.5 * v.square().sum() + log_sigma.sum();
      if (grad) grad->segment(k_, k_).array() += 1.0 - v.square();

      // z ~ Normal(0, 1)
      const auto z = theta.segment(2 * k_, r_ * k_);
      lp += -0.5 * z.squaredNorm() - static_cast<double>(r_ * k_) * kLogSqrtTwoPi;
      if (grad) grad->segment(2 * k_, r_ * k_) -= z;
    }
  }

  if (likelihood) {
    Eigen::VectorXd beta(k_);
    Eigen::VectorXd g_beta(k_);
    Eigen::VectorXd mu_grad = Eigen::VectorXd::Zero(k_);
    Eigen::VectorXd log_sigma_grad = Eigen::VectorXd::Zero(k_);
    const Eigen::VectorXd& y = design_->y;
    for (Eigen::Index r = 0; r < r_; ++r) {
      const auto begin = design_->row_offsets[static_cast<std::size_t>(r)];
      const auto end = design_->row_offsets[static_cast<std::size_t>(r) + 1];
      if (begin == end) continue;
      if (hierarchical_) {
        beta.noalias() = mu + sigma.cwiseProduct(theta.segment(z_offset(r), k_));
      } else {
        beta = mu;
      }
      g_beta.setZero();
      for (Eigen::Index i = begin; i < end; ++i) {
        const auto xi = xt_.col(i);
        const double eta = xi.dot(beta);
        // y * eta - log(1 + exp(eta)) in stable form; e is shared with sigmoid(eta).
        const double e = std::exp(-std::abs(eta));
        const double one_plus_e = 1.0 + e;
        lp += y[i] * eta - std::max(eta, 0.0) - std::log1p(e);
        if (grad) {
          const double p = eta >= 0.0 ? 1.0 / one_plus_e : e / one_plus_e;
          g_beta.noalias() += (y[i] - p) * xi;
        }
      }
      if (!grad) continue;
      mu_grad += g_beta;
      if (hierarchical_) {
        const auto z_r = theta.segment(z_offset(r), k_);
        grad->segment(z_offset(r), k_) += sigma.cwiseProduct(g_beta);
        log_sigma_grad += sigma.cwiseProduct(z_r).cwiseProduct(g_beta);
      }
    }
    if (grad) {
      grad->segment(0, k_) += mu_grad;
      if (hierarchical_) grad->segment(k_, k_) += log_sigma_grad;
    }
  }
  return lp;
}

}  // namespace conjoint
