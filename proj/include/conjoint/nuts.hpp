#ifndef CONJOINT_NUTS_HPP
#define CONJOINT_NUTS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "conjoint/errors.hpp"
#include "conjoint/rng.hpp"

namespace conjoint {

// Multinomial no-U-turn sampler with a diagonal Euclidean metric, dual
// averaging of the step size and windowed variance adaptation.
//
// A Model provides
//   Eigen::Index dimension() const;
//   double log_density_gradient(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const;

struct PhasePoint {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  Eigen::VectorXd grad;  // gradient of the log density at q
  double log_density = 0.0;
};

/// H(q, p) = -log pi(q) + p' M^{-1} p / 2
inline double hamiltonian(const PhasePoint& z, const Eigen::VectorXd& inv_metric) {
  return -z.log_density + 0.5 * z.p.cwiseProduct(inv_metric).dot(z.p);
}

template <typename Model>
void refresh(const Model& model, PhasePoint& z) {
  z.log_density = model.log_density_gradient(z.q, z.grad);
  if (!std::isfinite(z.log_density)) z.log_density = -std::numeric_limits<double>::infinity();
}

/// One velocity-Verlet step of size `epsilon` (negative integrates backward).
template <typename Model>
void leapfrog(const Model& model, PhasePoint& z, const Eigen::VectorXd& inv_metric,
              double epsilon) {
  z.p.noalias() += 0.5 * epsilon * z.grad;
  z.q.noalias() += epsilon * inv_metric.cwiseProduct(z.p);
  refresh(model, z);
  z.p.noalias() += 0.5 * epsilon * z.grad;
}

/// Nesterov dual averaging of log(step size).
class DualAveraging {
public:
  DualAveraging(double target, double gamma = 0.05, double t0 = 10.0, double kappa = 0.75)
      : target_(target), gamma_(gamma), t0_(t0), kappa_(kappa) {}

  void set_mu(double mu) { mu_ = mu; }
  void restart() {
    counter_ = 0;
    s_bar_ = 0.0;
    x_bar_ = 0.0;
  }

  /// Returns the next step size given the latest acceptance statistic.
  double learn(double accept_stat) {
    ++counter_;
    accept_stat = std::min(accept_stat, 1.0);
    const double n = static_cast<double>(counter_);
    const double eta = 1.0 / (n + t0_);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (target_ - accept_stat);
    const double x = mu_ - s_bar_ * std::sqrt(n) / gamma_;
    const double x_eta = std::pow(n, -kappa_);
    x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
    return std::exp(x);
  }

  double final_step_size() const { return std::exp(x_bar_); }

private:
  double target_;
  double gamma_;
  double t0_;
  double kappa_;
  double mu_ = std::log(10.0);
  long counter_ = 0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
};

/// Warmup schedule: a fast initial buffer, doubling slow windows that
/// estimate the metric, and a fast terminal buffer.
class WindowedAdaptation {
public:
  explicit WindowedAdaptation(int num_warmup, int init_buffer = 75, int term_buffer = 50,
                              int base_window = 25)
      : num_warmup_(num_warmup) {
    if (num_warmup < 20) {
      enabled_ = false;
      return;
    }
    if (init_buffer + base_window + term_buffer > num_warmup) {
      init_buffer = static_cast<int>(0.15 * num_warmup);
      term_buffer = static_cast<int>(0.1 * num_warmup);
      base_window = num_warmup - (init_buffer + term_buffer);
    }
    init_buffer_ = init_buffer;
    term_buffer_ = term_buffer;
    window_size_ = base_window;
    next_window_ = init_buffer_ + window_size_ - 1;
  }

  bool enabled() const { return enabled_; }

  /// Feeds one warmup draw; returns true when `inv_metric` was updated.
  bool learn(const Eigen::VectorXd& q, Eigen::VectorXd& inv_metric) {
    if (!enabled_) return false;
    if (in_window()) add_sample(q);
    if (end_of_window()) {
      compute_next_window();
      const double n = static_cast<double>(count_);
      Eigen::VectorXd var = m2_ / (n - 1.0);
      var = (n / (n + 5.0)) * var + Eigen::VectorXd::Constant(var.size(), 1e-3 * (5.0 / (n + 5.0)));
      if (!var.allFinite()) throw FitError("metric adaptation produced a non-finite variance");
      inv_metric = var;
      count_ = 0;
      ++counter_;
      return true;
    }
    ++counter_;
    return false;
  }

private:
  bool in_window() const {
    return counter_ >= init_buffer_ && counter_ < num_warmup_ - term_buffer_ &&
           counter_ != num_warmup_;
  }
  bool end_of_window() const { return counter_ == next_window_ && counter_ != num_warmup_; }

  void compute_next_window() {
    if (next_window_ == num_warmup_ - term_buffer_ - 1) return;
    window_size_ *= 2;
    next_window_ = counter_ + window_size_;
    if (next_window_ != num_warmup_ - term_buffer_ - 1) {
      const int boundary = next_window_ + 2 * window_size_;
      if (boundary >= num_warmup_ - term_buffer_) next_window_ = num_warmup_ - term_buffer_ - 1;
    }
  }

  void add_sample(const Eigen::VectorXd& q) {
    if (count_ == 0) {
      mean_ = Eigen::VectorXd::Zero(q.size());
      m2_ = Eigen::VectorXd::Zero(q.size());
    }
    ++count_;
    const Eigen::VectorXd delta = q - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta.cwiseProduct(q - mean_);
  }

  bool enabled_ = true;
  int num_warmup_;
  int init_buffer_ = 0;
  int term_buffer_ = 0;
  int window_size_ = 0;
  int next_window_ = 0;
  int counter_ = 0;
  long count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

struct NutsTransition {
  double accept_stat = 0.0;
  int tree_depth = 0;
  int n_leapfrog = 0;
  bool divergent = false;
  double energy = 0.0;
};

/// One chain's worth of transition machinery. Holds the current state.
template <typename Model>
class NutsSampler {
public:
  static constexpr double kMaxDeltaH = 1000.0;

  NutsSampler(const Model& model, Eigen::VectorXd q0, Rng& rng, int max_tree_depth = 10)
      : model_(&model),
        rng_(&rng),
        max_depth_(max_tree_depth),
        inv_metric_(Eigen::VectorXd::Ones(q0.size())) {
    z_.q = std::move(q0);
    z_.p = Eigen::VectorXd::Zero(z_.q.size());
    refresh(model, z_);
    if (!std::isfinite(z_.log_density)) {
      throw FitError("initial state has non-finite log density");
    }
  }

  const PhasePoint& state() const { return z_; }
  double step_size() const { return step_size_; }
  void set_step_size(double eps) { step_size_ = eps; }
  const Eigen::VectorXd& inv_metric() const { return inv_metric_; }
  Eigen::VectorXd& inv_metric() { return inv_metric_; }

  void sample_momentum() {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < z_.p.size(); ++i) {
      z_.p[i] = normal(*rng_) / std::sqrt(inv_metric_[i]);
    }
  }

  /// Doubles or halves the step size until a single leapfrog step crosses
  /// an acceptance probability of 0.8.
  void init_step_size() {
    if (step_size_ == 0.0 || step_size_ > 1e7 || std::isnan(step_size_)) return;
    const PhasePoint start = z_;
    auto trial = [&]() {
      z_ = start;
      sample_momentum();
      const double h0 = hamiltonian(z_, inv_metric_);
      leapfrog(*model_, z_, inv_metric_, step_size_);
      double h = hamiltonian(z_, inv_metric_);
      if (std::isnan(h)) h = std::numeric_limits<double>::infinity();
      return h0 - h;
    };
    const int direction = trial() > std::log(0.8) ? 1 : -1;
    while (true) {
      const double delta_h = trial();
      if (direction == 1 && !(delta_h > std::log(0.8))) break;
      if (direction == -1 && !(delta_h < std::log(0.8))) break;
      step_size_ = direction == 1 ? 2.0 * step_size_ : 0.5 * step_size_;
      if (step_size_ > 1e7) throw FitError("step size search diverged; posterior may be improper");
      if (step_size_ == 0.0) throw FitError("step size search collapsed to zero");
    }
    z_ = start;
  }

  NutsTransition transition() {
    sample_momentum();
    divergent_ = false;

    PhasePoint z_fwd = z_;
    PhasePoint z_bck = z_;
    PhasePoint z_sample = z_;
    PhasePoint z_propose = z_;

    const Eigen::VectorXd p_sharp0 = inv_metric_.cwiseProduct(z_.p);
    Eigen::VectorXd p_fwd_fwd = z_.p, p_sharp_fwd_fwd = p_sharp0;
    Eigen::VectorXd p_fwd_bck = z_.p, p_sharp_fwd_bck = p_sharp0;
    Eigen::VectorXd p_bck_fwd = z_.p, p_sharp_bck_fwd = p_sharp0;
    Eigen::VectorXd p_bck_bck = z_.p, p_sharp_bck_bck = p_sharp0;
    Eigen::VectorXd rho = z_.p;

    double log_sum_weight = 0.0;
    const double h0 = hamiltonian(z_, inv_metric_);
    int n_leapfrog = 0;
    double sum_metro_prob = 0.0;
    int depth = 0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    while (depth < max_depth_) {
      Eigen::VectorXd rho_fwd = Eigen::VectorXd::Zero(rho.size());
      Eigen::VectorXd rho_bck = Eigen::VectorXd::Zero(rho.size());
      bool valid_subtree = false;
      double log_sum_weight_subtree = -std::numeric_limits<double>::infinity();

      if (unif(*rng_) > 0.5) {
        z_ = z_fwd;
        rho_bck = rho;
        p_bck_fwd = p_fwd_bck;
        p_sharp_bck_fwd = p_sharp_fwd_bck;
        valid_subtree = build_tree(depth, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd,
                                   p_fwd_bck, p_fwd_fwd, h0, 1.0, n_leapfrog,
                                   log_sum_weight_subtree, sum_metro_prob);
        z_fwd = z_;
      } else {
        z_ = z_bck;
        rho_fwd = rho;
        p_fwd_bck = p_bck_fwd;
        p_sharp_fwd_bck = p_sharp_bck_fwd;
        valid_subtree = build_tree(depth, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck,
                                   p_bck_fwd, p_bck_bck, h0, -1.0, n_leapfrog,
                                   log_sum_weight_subtree, sum_metro_prob);
        z_bck = z_;
      }
      if (!valid_subtree) break;
      ++depth;

      if (log_sum_weight_subtree > log_sum_weight) {
        z_sample = z_propose;
      } else if (unif(*rng_) < std::exp(log_sum_weight_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

      rho = rho_bck + rho_fwd;
      bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
      persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, rho_bck + p_fwd_bck);
      persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, rho_fwd + p_bck_fwd);
      if (!persist) break;
    }

    z_ = z_sample;
    NutsTransition t;
    t.accept_stat = n_leapfrog > 0 ? sum_metro_prob / static_cast<double>(n_leapfrog) : 0.0;
    t.tree_depth = depth;
    t.n_leapfrog = n_leapfrog;
    t.divergent = divergent_;
    t.energy = hamiltonian(z_, inv_metric_);
    return t;
  }

private:
  static double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  }

  static bool no_u_turn(const Eigen::VectorXd& p_sharp_minus,
                        const Eigen::VectorXd& p_sharp_plus, const Eigen::VectorXd& rho) {
    return p_sharp_plus.dot(rho) > 0 && p_sharp_minus.dot(rho) > 0;
  }

  bool build_tree(int depth, PhasePoint& z_propose, Eigen::VectorXd& p_sharp_beg,
                  Eigen::VectorXd& p_sharp_end, Eigen::VectorXd& rho, Eigen::VectorXd& p_beg,
                  Eigen::VectorXd& p_end, double h0, double sign, int& n_leapfrog,
                  double& log_sum_weight, double& sum_metro_prob) {
    if (depth == 0) {
      leapfrog(*model_, z_, inv_metric_, sign * step_size_);
      ++n_leapfrog;
      double h = hamiltonian(z_, inv_metric_);
      if (std::isnan(h)) h = std::numeric_limits<double>::infinity();
      if (h - h0 > kMaxDeltaH) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro_prob += h0 - h > 0 ? 1.0 : std::exp(h0 - h);
      z_propose = z_;
      p_sharp_beg = inv_metric_.cwiseProduct(z_.p);
      p_sharp_end = p_sharp_beg;
      rho += z_.p;
      p_beg = z_.p;
      p_end = p_beg;
      return !divergent_;
    }

    const Eigen::Index n = z_.p.size();
    double log_sum_weight_init = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd p_init_end(n), p_sharp_init_end(n);
    Eigen::VectorXd rho_init = Eigen::VectorXd::Zero(n);
    if (!build_tree(depth - 1, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg,
                    p_init_end, h0, sign, n_leapfrog, log_sum_weight_init, sum_metro_prob)) {
      return false;
    }

    PhasePoint z_propose_final = z_;
    double log_sum_weight_final = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd p_final_beg(n), p_sharp_final_beg(n);
    Eigen::VectorXd rho_final = Eigen::VectorXd::Zero(n);
    if (!build_tree(depth - 1, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final,
                    p_final_beg, p_end, h0, sign, n_leapfrog, log_sum_weight_final,
                    sum_metro_prob)) {
      return false;
    }

    const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_init, log_sum_weight_final);
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);
    if (log_sum_weight_final > log_sum_weight_subtree) {
      z_propose = z_propose_final;
    } else {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      if (unif(*rng_) < std::exp(log_sum_weight_final - log_sum_weight_subtree)) {
        z_propose = z_propose_final;
      }
    }

    const Eigen::VectorXd rho_subtree = rho_init + rho_final;
    rho += rho_subtree;
    bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
    persist = persist && no_u_turn(p_sharp_beg, p_sharp_final_beg, rho_init + p_final_beg);
    persist = persist && no_u_turn(p_sharp_init_end, p_sharp_end, rho_final + p_init_end);
    return persist;
  }

  const Model* model_;
  Rng* rng_;
  int max_depth_;
  Eigen::VectorXd inv_metric_;
  PhasePoint z_;
  double step_size_ = 1.0;
  bool divergent_ = false;
};

struct ChainSettings {
  int warmup = 1000;
  int draws = 1000;
  double target_accept = 0.8;
  int max_tree_depth = 10;
};

struct ChainResult {
  Eigen::MatrixXd draws;  // draws x dimension
  std::vector<std::uint8_t> divergent;
  std::vector<double> accept_stat;
  std::vector<int> tree_depth;
  std::vector<int> n_leapfrog;
  std::vector<double> energy;
  double step_size = 0.0;
  Eigen::VectorXd inv_metric;
  int warmup_divergences = 0;
};

/// Uniform(-2, 2) initialization on the unconstrained scale, retried until
/// the log density is finite.
template <typename Model>
Eigen::VectorXd random_initial_state(const Model& model, Rng& rng) {
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  Eigen::VectorXd q(model.dimension());
  Eigen::VectorXd grad(model.dimension());
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = unif(rng);
    const double lp = model.log_density_gradient(q, grad);
    if (std::isfinite(lp) && grad.allFinite()) return q;
  }
  throw FitError("no initial state with finite log density after 100 attempts");
}

template <typename Model>
ChainResult run_chain(const Model& model, const ChainSettings& settings, Rng& rng) {
  Eigen::VectorXd q0 = random_initial_state(model, rng);
  NutsSampler<Model> sampler(model, std::move(q0), rng, settings.max_tree_depth);
  sampler.init_step_size();

  DualAveraging step_adapt(settings.target_accept);
  step_adapt.set_mu(std::log(10.0 * sampler.step_size()));
  WindowedAdaptation metric_adapt(settings.warmup);

  ChainResult out;
  for (int i = 0; i < settings.warmup; ++i) {
    const NutsTransition t = sampler.transition();
    if (t.divergent) ++out.warmup_divergences;
    sampler.set_step_size(step_adapt.learn(t.accept_stat));
    if (metric_adapt.learn(sampler.state().q, sampler.inv_metric())) {
      sampler.init_step_size();
      step_adapt.set_mu(std::log(10.0 * sampler.step_size()));
      step_adapt.restart();
    }
  }
  if (settings.warmup > 0) sampler.set_step_size(step_adapt.final_step_size());

  const auto n = static_cast<std::size_t>(settings.draws);
  out.draws.resize(settings.draws, model.dimension());
  out.divergent.reserve(n);
  out.accept_stat.reserve(n);
  out.tree_depth.reserve(n);
  out.n_leapfrog.reserve(n);
  out.energy.reserve(n);
  for (int i = 0; i < settings.draws; ++i) {
    const NutsTransition t = sampler.transition();
    out.draws.row(i) = sampler.state().q.transpose();
    out.divergent.push_back(t.divergent ? 1 : 0);
    out.accept_stat.push_back(t.accept_stat);
    out.tree_depth.push_back(t.tree_depth);
    out.n_leapfrog.push_back(t.n_leapfrog);
    out.energy.push_back(t.energy);
  }
  out.step_size = sampler.step_size();
  out.inv_metric = sampler.inv_metric();
  return out;
}

}  // namespace conjoint

#endif  // CONJOINT_NUTS_HPP
