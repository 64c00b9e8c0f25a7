#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vvclab/drl/agent.hpp"
#include "vvclab/drl/replay_buffer.hpp"
#include "vvclab/env.hpp"

namespace vvclab::drl {

struct StepMetrics {
  long step = 0;
  int day = 0;
  int step_in_day = 0;
  bool random_action = false;
  bool failed = false;
  std::string error;
  double r_p = 0.0;  // training-objective rewards of the applied action
  double r_v = 0.0;
  int updates = 0;
  RoundMetrics round;  // mean over this step's update rounds
};

/// Agent specs for a set of environment views.
std::vector<ActorSpec> actor_specs(const env::VvcEnv& env, const std::vector<env::AgentView>& views);

/// Normalized per-agent observation slices of one normalized state.
std::vector<std::vector<double>> agent_slices(const std::vector<ActorSpec>& specs, const std::vector<double>& x);

/// Deterministic learned policy in engineering units.
env::Policy make_policy(const env::VvcEnv& env, const Agent& agent);

/// Online loop: observe, act, apply, store, then update.
class Trainer {
 public:
  Trainer(const env::VvcEnv& env, env::ScenarioStream stream, AlgoConfig config,
          std::vector<env::AgentView> views, std::uint64_t seed);

  /// One environment interaction followed by the configured update rounds.
  /// A power-flow divergence marks the step failed and halts the trainer;
  /// further calls throw ContractViolation.
  StepMetrics step();

  long steps_done() const { return steps_; }
  bool halted() const { return halted_; }
  Agent& agent() { return agent_; }
  const Agent& agent() const { return agent_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const env::VvcEnv& environment() const { return env_; }

 private:
  const env::VvcEnv& env_;
  env::ScenarioStream stream_;
  AlgoConfig config_;
  std::vector<ActorSpec> specs_;
  Agent agent_;
  ReplayBuffer buffer_;
  Rng explore_rng_;
  Rng sample_rng_;
  long steps_ = 0;
  bool halted_ = false;
  std::vector<double> q_g_;     // dispatch held from the previous step (MVar)
  std::vector<double> x_;       // normalized observation for the next step
  bool have_x_ = false;
};

}  // namespace vvclab::drl
