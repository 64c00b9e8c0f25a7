#include "vvclab/drl/trainer.hpp"

#include "vvclab/error.hpp"

namespace vvclab::drl {

namespace {

std::vector<std::size_t> slice_dims(const std::vector<ActorSpec>& specs, bool multi_agent) {
  std::vector<std::size_t> dims;
  if (!multi_agent) return dims;
  for (const auto& s : specs) dims.push_back(s.obs_rows.size());
  return dims;
}

Vector to_vector(const std::vector<double>& x) {
  Vector v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = static_cast<Real>(x[i]);
  return v;
}

}  // namespace

std::vector<ActorSpec> actor_specs(const env::VvcEnv& env, const std::vector<env::AgentView>& views) {
  std::vector<ActorSpec> specs;
  for (const auto& v : views) specs.push_back({env.observation_rows(v), v.devices});
  return specs;
}

std::vector<std::vector<double>> agent_slices(const std::vector<ActorSpec>& specs, const std::vector<double>& x) {
  std::vector<std::vector<double>> out;
  for (const auto& s : specs) {
    std::vector<double> o;
    o.reserve(s.obs_rows.size());
    for (std::size_t r : s.obs_rows) o.push_back(x.at(r));
    out.push_back(std::move(o));
  }
  return out;
}

env::Policy make_policy(const env::VvcEnv& env, const Agent& agent) {
  return [&env, &agent](const env::Observation& obs, const env::Scenario&) {
    const Matrix x = to_vector(env.normalize(obs));
    const Matrix a = agent.act_mean(x);
    std::vector<double> a_norm(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index k = 0; k < a.rows(); ++k) a_norm[static_cast<std::size_t>(k)] = a(k, 0);
    return env.denormalize_action(a_norm);
  };
}

Trainer::Trainer(const env::VvcEnv& env, env::ScenarioStream stream, AlgoConfig config,
                 std::vector<env::AgentView> views, std::uint64_t seed)
    : env_(env),
      stream_(std::move(stream)),
      config_(std::move(config)),
      specs_(actor_specs(env, views)),
      agent_(config_, env.obs_dim(), env.act_dim(), specs_, env::mix_seed(seed, 1)),
      buffer_(static_cast<std::size_t>(config_.buffer_capacity), env.obs_dim(), env.act_dim(),
              !traits_of(config_.algo).one_step, slice_dims(specs_, traits_of(config_.algo).multi_agent)),
      explore_rng_(env::mix_seed(seed, 2)),
      sample_rng_(env::mix_seed(seed, 3)),
      q_g_(env.act_dim(), 0.0) {}

StepMetrics Trainer::step() {
  if (halted_) throw ContractViolation("trainer halted after a failed step");
  StepMetrics m;
  m.step = steps_;
  m.day = static_cast<int>(steps_ / env::kStepsPerDay);
  m.step_in_day = static_cast<int>(steps_ % env::kStepsPerDay);
  const long next = steps_ + 1;
  const int next_day = static_cast<int>(next / env::kStepsPerDay);
  const int next_step = static_cast<int>(next % env::kStepsPerDay);
  const AlgoTraits traits = agent_.traits();

  try {
    const env::Scenario scenario = stream_.at(m.day, m.step_in_day);
    if (!have_x_) {
      x_ = env_.normalize(env_.observe(scenario, q_g_));
      have_x_ = true;
    }
    std::vector<double> a(env_.act_dim());
    if (steps_ < config_.initial_random_steps) {
      m.random_action = true;
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (auto& v : a) v = u(explore_rng_);
    } else {
      const Vector av = agent_.act(to_vector(x_), true, explore_rng_);
      for (std::size_t k = 0; k < a.size(); ++k) a[k] = av(static_cast<Eigen::Index>(k));
    }
    const std::vector<double> q = env_.denormalize_action(a);
    const env::StepOutcome out = env_.apply_action(scenario, q);
    m.r_p = out.reward.r_p;
    m.r_v = out.reward.r_v;

    const std::vector<double> x_next = env_.normalize(env_.observe(stream_.at(next_day, next_step), q));

    Transition t;
    t.s = x_;
    t.a = a;
    t.r_p = out.reward.r_p;
    t.r_v = out.reward.r_v;
    if (!traits.one_step) t.s_next = x_next;
    if (traits.multi_agent) t.per_agent_obs = agent_slices(specs_, x_);
    buffer_.add(t);

    q_g_ = q;
    x_ = x_next;
  } catch (const DivergedError& e) {
    m.failed = true;
    m.error = e.what();
    halted_ = true;
    return m;
  }
  ++steps_;

  if (buffer_.size() >= static_cast<std::size_t>(std::max(config_.update_after, 1))) {
    for (int r = 0; r < config_.updates_per_step; ++r) {
      const RoundMetrics rm = agent_.update_round(buffer_, sample_rng_);
      m.round.loss_p += rm.loss_p;
      m.round.loss_v += rm.loss_v;
      m.round.actor_loss += rm.actor_loss;
      m.round.alpha = rm.alpha;
      ++m.updates;
    }
    if (m.updates > 0) {
      m.round.loss_p /= m.updates;
      m.round.loss_v /= m.updates;
      m.round.actor_loss /= m.updates;
    }
  }
  return m;
}

}  // namespace vvclab::drl
