#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "vvclab/drl/algo.hpp"
#include "vvclab/drl/replay_buffer.hpp"
#include "vvclab/tinynn.hpp"

namespace vvclab::drl {

using tinynn::AdamState;
using tinynn::Mlp;

/// Which rows of the full normalized state an actor reads and which entries
/// of the joint action it writes.
struct ActorSpec {
  std::vector<std::size_t> obs_rows;
  std::vector<std::size_t> devices;
};

/// One network with its optimizer and optional soft-updated target copy.
struct Network {
  Mlp net;
  AdamState opt;
  Mlp target;
  bool has_target = false;
};

/// A critic role (combined, loss or violation) with one or two members.
/// With two members the value is the elementwise minimum.
struct CriticSet {
  std::vector<Network> members;
  /// Reported value is -softplus(z) of the raw output z, so it never exceeds 0.
  bool nonpositive = false;
};

struct Actor {
  ActorSpec spec;
  Network body;
};

struct CriticLosses {
  double loss_p = 0.0;  // single-critic variants report their only critic here
  double loss_v = 0.0;  // zero for single-critic variants
};

/// Value of an action objective per sample and its gradient with respect to
/// the joint action (act_dim x B, not averaged).
struct ObjectiveValue {
  Vector value;
  Matrix d_action;
};
using ActionObjective = std::function<ObjectiveValue(const Matrix& s, const Matrix& a)>;

struct ActorGradients {
  std::vector<Vector> params;  // descent direction of the actor loss, one per actor
  double loss = 0.0;           // -mean(J) + alpha * mean(log pi)
  Vector log_prob;             // joint log-density per sample (stochastic only)
};

struct RoundMetrics {
  double loss_p = 0.0;
  double loss_v = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
};

struct TdTargets {
  Vector y_p;  // combined target for single-critic variants
  Vector y_v;  // empty for single-critic variants
};

struct AgentAction {
  int agent_id = 0;
  std::vector<std::size_t> devices;
  std::vector<double> values;
};

/// Scatters per-agent slices into the centralized device order. Throws
/// ContractViolation for a missing or duplicated agent, a device written twice
/// or never, or a slice whose length does not match its device list.
std::vector<double> assemble_joint_action(const std::vector<AgentAction>& parts,
                                          std::size_t num_agents, std::size_t act_dim);

/// clip(pi + noise, -1, 1) componentwise.
double explore_dp(double pi, double noise);

class Agent {
 public:
  Agent(AlgoConfig config, std::size_t obs_dim, std::size_t act_dim, std::vector<ActorSpec> actors,
        std::uint64_t seed);

  /// A single actor that reads the whole state and writes every device.
  static std::vector<ActorSpec> centralized(std::size_t obs_dim, std::size_t act_dim);

  const AlgoConfig& config() const { return config_; }
  AlgoTraits traits() const { return traits_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  std::size_t num_actors() const { return actors_.size(); }
  Actor& actor(std::size_t i) { return actors_.at(i); }
  const Actor& actor(std::size_t i) const { return actors_.at(i); }
  /// Combined critic for single-critic variants, Q_p otherwise.
  CriticSet& critic_p() { return critic_p_; }
  const CriticSet& critic_p() const { return critic_p_; }
  /// Empty set for single-critic variants.
  CriticSet& critic_v() { return critic_v_; }
  const CriticSet& critic_v() const { return critic_v_; }
  std::size_t num_networks() const;
  bool has_target_networks() const;

  double alpha() const;
  double log_alpha() const { return log_alpha_; }
  void set_log_alpha(double v) { log_alpha_ = v; }
  double entropy_target() const;
  /// Multiplier on r_v in the violation-critic target and on Q_v in the actor.
  double critic_v_scale() const;
  double actor_v_weight() const;

  Rng& rng() { return rng_; }

  /// Joint action in [-1, 1]^d for one normalized state. Deterministic actors
  /// add N(0, sigma^2) noise when exploring then clip; stochastic actors draw
  /// from the squashed Gaussian when exploring and return tanh(mu) otherwise.
  Vector act(const Vector& s, bool explore, Rng& rng) const;
  /// Noise-free joint action for a batch of states.
  Matrix act_mean(const Matrix& s) const;

  /// Critic value min_i Q_i([s; a]) per sample.
  Vector critic_value(const CriticSet& set, const Matrix& s, const Matrix& a, bool use_target = false) const;
  /// min Q_p + w * min Q_v (or the single critic) with its action gradient.
  ObjectiveValue critic_objective(const Matrix& s, const Matrix& a) const;

  /// Regression targets of the one-step critics.
  TdTargets onestep_targets(const OneStepBatch& b) const;
  /// Bootstrapped targets. The stochastic next action is drawn from `rng`.
  TdTargets td_targets(const TdBatch& b, Rng& rng) const;

  CriticLosses update_critics_onestep(const OneStepBatch& b);
  /// One regression step toward td_targets, then soft-updates critic targets.
  CriticLosses update_critics_td(const TdBatch& b);
  /// Regression on explicit targets; used by both update paths.
  CriticLosses fit_critics(const Matrix& s, const Matrix& a, const TdTargets& y);

  ActorGradients actor_gradients(const OneStepBatch& b, const ActionObjective& objective, Rng& rng) const;
  /// One Adam step on every actor against the critics; returns the pre-step loss.
  double update_actor(const OneStepBatch& b);
  double update_actor(const OneStepBatch& b, const ActionObjective& objective);
  /// Adam step on log alpha for L = mean(-alpha * log pi - alpha * H).
  double update_temperature(const Vector& log_prob);
  /// Gradient of that loss with respect to alpha.
  double temperature_gradient(const Vector& log_prob) const;

  void soft_update_critic_targets();
  void soft_update_actor_targets();

  /// Checks the stored agent slices against the actor partition, then runs a
  /// centralized two-critic update followed by a joint actor step.
  RoundMetrics update_multiagent(const OneStepBatch& b);
  /// One update round sampled from `buffer`: critics, actor, temperature.
  RoundMetrics update_round(const ReplayBuffer& buffer, Rng& rng);

  nlohmann::json to_json() const;
  static Agent from_json(const nlohmann::json& doc);

 private:
  Agent() = default;
  Matrix actor_input(std::size_t i, const Matrix& s, const std::vector<Matrix>* stored) const;
  void check_partition(const OneStepBatch& b) const;
  RoundMetrics onestep_round(const OneStepBatch& b);
  RoundMetrics finish_round(const OneStepBatch& b, CriticLosses losses);

  AlgoConfig config_;
  AlgoTraits traits_;
  std::size_t obs_dim_ = 0;
  std::size_t act_dim_ = 0;
  std::vector<Actor> actors_;
  CriticSet critic_p_;
  CriticSet critic_v_;
  double log_alpha_ = 0.0;
  tinynn::BasicAdamState<double> alpha_opt_;
  Vector last_log_prob_;
  Rng rng_;
};

}  // namespace vvclab::drl
