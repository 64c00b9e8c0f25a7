#include "vvclab/drl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "vvclab/error.hpp"

namespace vvclab::drl {

namespace {

Matrix stack(const Matrix& s, const Matrix& a) {
  Matrix x(s.rows() + a.rows(), s.cols());
  x.topRows(s.rows()) = s;
  x.bottomRows(a.rows()) = a;
  return x;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

bool is_identity(const std::vector<std::size_t>& rows, Eigen::Index n) {
  if (static_cast<Eigen::Index>(rows.size()) != n) return false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] != r) return false;
  }
  return true;
}

Network make_network(const std::vector<int>& sizes, double lr, bool with_target, Rng& rng, double final_scale) {
  Network n;
  n.net = Mlp(sizes);
  n.net.init_uniform(rng, final_scale);
  n.opt = tinynn::make_adam<Real>(n.net.params().size(), lr);
  if (with_target) {
    n.target = n.net;
    n.has_target = true;
  }
  return n;
}

void soft_update(Network& n, double tau) {
  if (!n.has_target) return;
  const auto t = static_cast<Real>(tau);
  n.target.params() = (Real(1) - t) * n.target.params() + t * n.net.params();
}

// violation critic head: -softplus(z)
Real head_value(bool nonpositive, Real z) {
  if (!nonpositive) return z;
  return -(std::max(z, Real(0)) + std::log1p(std::exp(-std::abs(z))));
}

Real head_slope(bool nonpositive, Real z) {
  if (!nonpositive) return Real(1);
  return -Real(1) / (Real(1) + std::exp(-z));
}

Vector apply_head(bool nonpositive, const Matrix& z) {
  Vector q(z.cols());
  for (Eigen::Index b = 0; b < z.cols(); ++b) q(b) = head_value(nonpositive, z(0, b));
  return q;
}

void check_finite_loss(double loss, const char* what) {
  if (!std::isfinite(loss)) throw NonFiniteError(std::string(what) + " loss is not finite");
}

nlohmann::json network_json(const Network& n) {
  nlohmann::json doc = {{"net", tinynn::to_json(n.net)}, {"opt", tinynn::to_json(n.opt)}};
  if (n.has_target) doc["target"] = tinynn::to_json(n.target);
  return doc;
}

Network network_from_json(const nlohmann::json& doc) {
  Network n;
  n.net = tinynn::mlp_from_json<Real>(doc.at("net"));
  n.opt = tinynn::adam_from_json<Real>(doc.at("opt"));
  if (doc.contains("target")) {
    n.target = tinynn::mlp_from_json<Real>(doc.at("target"));
    n.has_target = true;
  }
  return n;
}

}  // namespace

double explore_dp(double pi, double noise) { return std::clamp(pi + noise, -1.0, 1.0); }

std::vector<double> assemble_joint_action(const std::vector<AgentAction>& parts, std::size_t num_agents,
                                          std::size_t act_dim) {
  std::vector<const AgentAction*> by_id(num_agents, nullptr);
  for (const auto& part : parts) {
    if (part.agent_id < 0 || static_cast<std::size_t>(part.agent_id) >= num_agents) {
      throw ContractViolation("agent id " + std::to_string(part.agent_id) + " is out of range");
    }
    if (by_id[static_cast<std::size_t>(part.agent_id)] != nullptr) {
      throw ContractViolation("agent " + std::to_string(part.agent_id) + " supplied two action slices");
    }
    if (part.devices.size() != part.values.size()) {
      throw ContractViolation("agent " + std::to_string(part.agent_id) + " slice length mismatch");
    }
    by_id[static_cast<std::size_t>(part.agent_id)] = &part;
  }
  std::vector<double> joint(act_dim, 0.0);
  std::vector<bool> written(act_dim, false);
  for (std::size_t id = 0; id < num_agents; ++id) {
    if (by_id[id] == nullptr) throw ContractViolation("missing action slice for agent " + std::to_string(id));
    for (std::size_t j = 0; j < by_id[id]->devices.size(); ++j) {
      const std::size_t k = by_id[id]->devices[j];
      if (k >= act_dim || written[k]) {
        throw ContractViolation("device " + std::to_string(k) + " is out of range or written twice");
      }
      joint[k] = by_id[id]->values[j];
      written[k] = true;
    }
  }
  if (std::find(written.begin(), written.end(), false) != written.end()) {
    throw ContractViolation("joint action leaves a device unassigned");
  }
  return joint;
}

std::vector<ActorSpec> Agent::centralized(std::size_t obs_dim, std::size_t act_dim) {
  ActorSpec spec;
  spec.obs_rows.resize(obs_dim);
  std::iota(spec.obs_rows.begin(), spec.obs_rows.end(), std::size_t{0});
  spec.devices.resize(act_dim);
  std::iota(spec.devices.begin(), spec.devices.end(), std::size_t{0});
  return {spec};
}

Agent::Agent(AlgoConfig config, std::size_t obs_dim, std::size_t act_dim, std::vector<ActorSpec> actors,
             std::uint64_t seed)
    : config_(std::move(config)),
      traits_(traits_of(config_.algo)),
      obs_dim_(obs_dim),
      act_dim_(act_dim),
      rng_(seed) {
  if (obs_dim_ == 0 || act_dim_ == 0) throw ContractViolation("agent dimensions must be positive");
  if (actors.empty()) throw ContractViolation("agent needs at least one actor");
  if (!traits_.multi_agent && actors.size() != 1) {
    throw ContractViolation(std::string(algo_name(config_.algo)) + " uses a single centralized actor");
  }
  std::vector<int> owner(act_dim_, -1);
  for (std::size_t i = 0; i < actors.size(); ++i) {
    if (actors[i].obs_rows.empty() || actors[i].devices.empty()) {
      throw ContractViolation("actor " + std::to_string(i) + " has no observation or no device");
    }
    for (std::size_t r : actors[i].obs_rows) {
      if (r >= obs_dim_) throw ContractViolation("actor observation row out of range");
    }
    for (std::size_t k : actors[i].devices) {
      if (k >= act_dim_ || owner[k] >= 0) throw ContractViolation("device assigned to two actors or out of range");
      owner[k] = static_cast<int>(i);
    }
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end()) {
    throw ContractViolation("actor partition leaves a device uncontrolled");
  }

  const bool targets = config_.use_target_networks && !traits_.one_step;
  const int out_mult = traits_.stochastic ? 2 : 1;
  for (auto& spec : actors) {
    std::vector<int> sizes = {static_cast<int>(spec.obs_rows.size())};
    sizes.insert(sizes.end(), config_.hidden.begin(), config_.hidden.end());
    sizes.push_back(out_mult * static_cast<int>(spec.devices.size()));
    Actor a;
    a.spec = std::move(spec);
    a.body = make_network(sizes, config_.actor_lr, targets && !traits_.stochastic, rng_, config_.actor_final_scale);
    actors_.push_back(std::move(a));
  }
  std::vector<int> critic_sizes = {static_cast<int>(obs_dim_ + act_dim_)};
  critic_sizes.insert(critic_sizes.end(), config_.hidden.begin(), config_.hidden.end());
  critic_sizes.push_back(1);
  const int members = traits_.twin ? 2 : 1;
  for (int m = 0; m < members; ++m) {
    critic_p_.members.push_back(make_network(critic_sizes, config_.critic_lr, targets, rng_, 1.0));
  }
  if (traits_.two_critic) {
    for (int m = 0; m < members; ++m) {
      critic_v_.members.push_back(make_network(critic_sizes, config_.critic_lr, targets, rng_, 1.0));
    }
    critic_v_.nonpositive = config_.nonpositive_violation_critic;
  }
  log_alpha_ = std::log(config_.initial_alpha);
  alpha_opt_ = tinynn::make_adam<double>(1, config_.temperature_lr);
}

std::size_t Agent::num_networks() const {
  return actors_.size() + critic_p_.members.size() + critic_v_.members.size();
}

bool Agent::has_target_networks() const {
  auto any = [](const Network& n) { return n.has_target; };
  return std::any_of(critic_p_.members.begin(), critic_p_.members.end(), any) ||
         std::any_of(critic_v_.members.begin(), critic_v_.members.end(), any) ||
         std::any_of(actors_.begin(), actors_.end(), [](const Actor& a) { return a.body.has_target; });
}

double Agent::alpha() const { return traits_.stochastic ? std::exp(log_alpha_) : 0.0; }

double Agent::entropy_target() const {
  return config_.entropy_target.value_or(-static_cast<double>(act_dim_));
}

double Agent::critic_v_scale() const { return config_.cv_in_actor ? 1.0 : config_.c_v; }
double Agent::actor_v_weight() const { return config_.cv_in_actor ? config_.c_v : 1.0; }

Matrix Agent::actor_input(std::size_t i, const Matrix& s, const std::vector<Matrix>* stored) const {
  const auto& rows = actors_[i].spec.obs_rows;
  if (stored != nullptr && !stored->empty()) {
    const Matrix& o = (*stored)[i];
    if (o.rows() != static_cast<Eigen::Index>(rows.size()) || o.cols() != s.cols()) {
      throw ContractViolation("stored observation of agent " + std::to_string(i) + " does not match its view");
    }
    return o;
  }
  if (s.rows() != static_cast<Eigen::Index>(obs_dim_)) throw ContractViolation("state has the wrong dimension");
  if (is_identity(rows, s.rows())) return s;
  return gather_rows(s, rows);
}

Vector Agent::act(const Vector& s, bool explore, Rng& rng) const {
  if (s.size() != static_cast<Eigen::Index>(obs_dim_)) throw ContractViolation("state has the wrong dimension");
  Vector joint(static_cast<Eigen::Index>(act_dim_));
  std::normal_distribution<double> noise(0.0, config_.exploration_sigma);
  const Matrix sm = s;
  for (std::size_t i = 0; i < actors_.size(); ++i) {
    const Matrix o = actor_input(i, sm, nullptr);
    const Matrix h = actors_[i].body.net.forward(o);
    const auto& dev = actors_[i].spec.devices;
    const auto d = static_cast<Eigen::Index>(dev.size());
    Vector a(d);
    if (traits_.stochastic && explore) {
      a = tinynn::tanh_gaussian_sample<Real>(h, rng).action.col(0);
    } else {
      for (Eigen::Index j = 0; j < d; ++j) a(j) = std::tanh(h(j, 0));
      if (explore) {
        for (Eigen::Index j = 0; j < d; ++j) a(j) = static_cast<Real>(explore_dp(a(j), noise(rng)));
      }
    }
    for (Eigen::Index j = 0; j < d; ++j) joint(static_cast<Eigen::Index>(dev[static_cast<std::size_t>(j)])) = a(j);
  }
  return joint;
}

Matrix Agent::act_mean(const Matrix& s) const {
  Matrix joint(static_cast<Eigen::Index>(act_dim_), s.cols());
  for (std::size_t i = 0; i < actors_.size(); ++i) {
    const Matrix h = actors_[i].body.net.forward(actor_input(i, s, nullptr));
    const auto& dev = actors_[i].spec.devices;
    for (std::size_t j = 0; j < dev.size(); ++j) {
      joint.row(static_cast<Eigen::Index>(dev[j])) = h.row(static_cast<Eigen::Index>(j)).array().tanh().matrix();
    }
  }
  return joint;
}

Vector Agent::critic_value(const CriticSet& set, const Matrix& s, const Matrix& a, bool use_target) const {
  if (set.members.empty()) throw ContractViolation("critic set is empty");
  const Matrix x = stack(s, a);
  Vector value;
  for (const auto& m : set.members) {
    const Mlp& net = use_target && m.has_target ? m.target : m.net;
    const Vector q = apply_head(set.nonpositive, net.forward(x));
    value = value.size() == 0 ? q : value.cwiseMin(q).eval();
  }
  return value;
}

ObjectiveValue Agent::critic_objective(const Matrix& s, const Matrix& a) const {
  const Matrix x = stack(s, a);
  const Eigen::Index batch = x.cols();
  auto eval_set = [&](const CriticSet& set, Vector& value, Matrix& d_action) {
    const std::size_t n = set.members.size();
    std::vector<tinynn::ForwardCache> caches(n);
    std::vector<Matrix> z(n);
    std::vector<Vector> q(n);
    for (std::size_t m = 0; m < n; ++m) {
      z[m] = set.members[m].net.forward(x, caches[m]);
      q[m] = apply_head(set.nonpositive, z[m]);
    }
    value = q[0];
    std::vector<int> arg(static_cast<std::size_t>(batch), 0);
    for (std::size_t m = 1; m < n; ++m) {
      for (Eigen::Index b = 0; b < batch; ++b) {
        if (q[m](b) < value(b)) {
          value(b) = q[m](b);
          arg[static_cast<std::size_t>(b)] = static_cast<int>(m);
        }
      }
    }
    d_action = Matrix::Zero(a.rows(), batch);
    for (std::size_t m = 0; m < n; ++m) {
      Matrix dy = Matrix::Zero(1, batch);
      bool any = false;
      for (Eigen::Index b = 0; b < batch; ++b) {
        if (arg[static_cast<std::size_t>(b)] == static_cast<int>(m)) {
          dy(0, b) = head_slope(set.nonpositive, z[m](0, b));
          any = true;
        }
      }
      if (!any) continue;
      const auto g = set.members[m].net.backward(caches[m], dy, {false, true});
      d_action += g.input.bottomRows(a.rows());
    }
  };
  ObjectiveValue out;
  eval_set(critic_p_, out.value, out.d_action);
  if (!critic_v_.members.empty()) {
    Vector v;
    Matrix dv;
    eval_set(critic_v_, v, dv);
    const auto w = static_cast<Real>(actor_v_weight());
    out.value += w * v;
    out.d_action += w * dv;
  }
  return out;
}

TdTargets Agent::onestep_targets(const OneStepBatch& b) const {
  TdTargets y;
  if (traits_.two_critic) {
    y.y_p = b.r_p;
    y.y_v = static_cast<Real>(critic_v_scale()) * b.r_v;
  } else {
    y.y_p = b.r_p + static_cast<Real>(config_.c_v) * b.r_v;
  }
  return y;
}

TdTargets Agent::td_targets(const TdBatch& b, Rng& rng) const {
  const Matrix& s2 = b.s_next;
  if (s2.cols() != b.now.size() || s2.rows() != static_cast<Eigen::Index>(obs_dim_)) {
    throw ContractViolation("next-state block does not match the batch");
  }
  const Eigen::Index batch = s2.cols();
  Matrix a2(static_cast<Eigen::Index>(act_dim_), batch);
  Vector log_prob = Vector::Zero(batch);
  for (std::size_t i = 0; i < actors_.size(); ++i) {
    const Network& body = actors_[i].body;
    const Matrix h = (body.has_target ? body.target : body.net).forward(actor_input(i, s2, nullptr));
    const auto& dev = actors_[i].spec.devices;
    Matrix ai;
    if (traits_.stochastic) {
      auto sample = tinynn::tanh_gaussian_sample<Real>(h, rng);
      ai = sample.action;
      log_prob += sample.log_prob;
    } else {
      ai = h.array().tanh().matrix();
    }
    for (std::size_t j = 0; j < dev.size(); ++j) a2.row(static_cast<Eigen::Index>(dev[j])) = ai.row(static_cast<Eigen::Index>(j));
  }
  const auto gamma = static_cast<Real>(config_.gamma);
  const auto alpha = static_cast<Real>(this->alpha());
  TdTargets base = onestep_targets(b.now);
  TdTargets y;
  Vector next_p = critic_value(critic_p_, s2, a2, true);
  if (traits_.stochastic) next_p -= alpha * log_prob;
  y.y_p = base.y_p + gamma * next_p;
  if (!critic_v_.members.empty()) y.y_v = base.y_v + gamma * critic_value(critic_v_, s2, a2, true);
  return y;
}

CriticLosses Agent::fit_critics(const Matrix& s, const Matrix& a, const TdTargets& y) {
  const Matrix x = stack(s, a);
  const Eigen::Index batch = x.cols();
  auto fit = [&](CriticSet& set, const Vector& target) {
    if (target.size() != batch) throw ContractViolation("critic target length does not match the batch");
    double total = 0.0;
    for (auto& m : set.members) {
      tinynn::ForwardCache cache;
      const Matrix z = m.net.forward(x, cache);
      const Vector diff = apply_head(set.nonpositive, z) - target;
      const double loss = static_cast<double>(diff.squaredNorm()) / static_cast<double>(batch);
      check_finite_loss(loss, "critic");
      Matrix dy(1, batch);
      for (Eigen::Index b = 0; b < batch; ++b) {
        dy(0, b) = Real(2) / static_cast<Real>(batch) * diff(b) * head_slope(set.nonpositive, z(0, b));
      }
      const auto g = m.net.backward(cache, dy);
      tinynn::adam_step(m.opt, m.net.params(), g.params);
      total += loss;
    }
    return total / static_cast<double>(set.members.size());
  };
  CriticLosses losses;
  losses.loss_p = fit(critic_p_, y.y_p);
  if (!critic_v_.members.empty()) losses.loss_v = fit(critic_v_, y.y_v);
  return losses;
}

CriticLosses Agent::update_critics_onestep(const OneStepBatch& b) {
  return fit_critics(b.s, b.a, onestep_targets(b));
}

CriticLosses Agent::update_critics_td(const TdBatch& b) {
  const TdTargets y = td_targets(b, rng_);
  const CriticLosses losses = fit_critics(b.now.s, b.now.a, y);
  soft_update_critic_targets();
  return losses;
}

ActorGradients Agent::actor_gradients(const OneStepBatch& b, const ActionObjective& objective, Rng& rng) const {
  const Eigen::Index batch = b.size();
  const std::vector<Matrix>* stored = traits_.multi_agent ? &b.agent_obs : nullptr;
  const std::size_t n = actors_.size();
  std::vector<tinynn::ForwardCache> caches(n);
  std::vector<Matrix> actions(n);
  std::vector<tinynn::TanhGaussianSample> samples(n);
  Matrix joint(static_cast<Eigen::Index>(act_dim_), batch);
  Vector log_prob = Vector::Zero(batch);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix h = actors_[i].body.net.forward(actor_input(i, b.s, stored), caches[i]);
    if (traits_.stochastic) {
      samples[i] = tinynn::tanh_gaussian_sample<Real>(h, rng);
      actions[i] = samples[i].action;
      log_prob += samples[i].log_prob;
    } else {
      actions[i] = h.array().tanh().matrix();
    }
    const auto& dev = actors_[i].spec.devices;
    for (std::size_t j = 0; j < dev.size(); ++j) joint.row(static_cast<Eigen::Index>(dev[j])) = actions[i].row(static_cast<Eigen::Index>(j));
  }
  const ObjectiveValue obj = objective(b.s, joint);
  if (obj.value.size() != batch || obj.d_action.rows() != joint.rows() || obj.d_action.cols() != batch) {
    throw ContractViolation("action objective returned the wrong shape");
  }
  const double alpha = this->alpha();
  ActorGradients out;
  out.loss = -static_cast<double>(obj.value.mean());
  if (traits_.stochastic) out.loss += alpha * static_cast<double>(log_prob.mean());
  check_finite_loss(out.loss, "actor");
  const Matrix d_joint = (Real(-1) / static_cast<Real>(batch)) * obj.d_action;
  const Vector d_log_prob = Vector::Constant(batch, static_cast<Real>(alpha / static_cast<double>(batch)));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& dev = actors_[i].spec.devices;
    Matrix da(static_cast<Eigen::Index>(dev.size()), batch);
    for (std::size_t j = 0; j < dev.size(); ++j) da.row(static_cast<Eigen::Index>(j)) = d_joint.row(static_cast<Eigen::Index>(dev[j]));
    Matrix dh;
    if (traits_.stochastic) {
      dh = tinynn::tanh_gaussian_backward<Real>(samples[i], da, d_log_prob);
    } else {
      dh = da.cwiseProduct((Matrix::Ones(da.rows(), da.cols()) - actions[i].cwiseProduct(actions[i])));
    }
    out.params.push_back(actors_[i].body.net.backward(caches[i], dh).params);
  }
  out.log_prob = std::move(log_prob);
  return out;
}

double Agent::update_actor(const OneStepBatch& b) {
  return update_actor(b, [this](const Matrix& s, const Matrix& a) { return critic_objective(s, a); });
}

double Agent::update_actor(const OneStepBatch& b, const ActionObjective& objective) {
  ActorGradients g = actor_gradients(b, objective, rng_);
  for (std::size_t i = 0; i < actors_.size(); ++i) {
    tinynn::adam_step(actors_[i].body.opt, actors_[i].body.net.params(), g.params[i]);
  }
  soft_update_actor_targets();
  last_log_prob_ = std::move(g.log_prob);
  return g.loss;
}

double Agent::temperature_gradient(const Vector& log_prob) const {
  if (log_prob.size() == 0) throw ContractViolation("temperature update needs log-probabilities");
  return -static_cast<double>(log_prob.cast<double>().mean()) - entropy_target();
}

double Agent::update_temperature(const Vector& log_prob) {
  if (!traits_.stochastic) throw ContractViolation("temperature exists only for stochastic policies");
  // chain rule through alpha = exp(log alpha)
  Eigen::VectorXd grad(1);
  grad(0) = alpha() * temperature_gradient(log_prob);
  Eigen::VectorXd param(1);
  param(0) = log_alpha_;
  tinynn::adam_step(alpha_opt_, param, grad);
  log_alpha_ = param(0);
  return alpha();
}

void Agent::soft_update_critic_targets() {
  for (auto& m : critic_p_.members) soft_update(m, config_.tau);
  for (auto& m : critic_v_.members) soft_update(m, config_.tau);
}

void Agent::soft_update_actor_targets() {
  for (auto& a : actors_) soft_update(a.body, config_.tau);
}

void Agent::check_partition(const OneStepBatch& b) const {
  if (b.agent_obs.size() != actors_.size()) {
    throw ContractViolation("batch carries " + std::to_string(b.agent_obs.size()) +
                            " agent observations for " + std::to_string(actors_.size()) + " agents");
  }
  for (std::size_t i = 0; i < actors_.size(); ++i) {
    if (b.agent_obs[i].rows() != static_cast<Eigen::Index>(actors_[i].spec.obs_rows.size()) ||
        b.agent_obs[i].cols() != b.size()) {
      throw ContractViolation("stored observation of agent " + std::to_string(i) + " does not match its view");
    }
  }
}

RoundMetrics Agent::finish_round(const OneStepBatch& b, CriticLosses losses) {
  RoundMetrics r;
  r.loss_p = losses.loss_p;
  r.loss_v = losses.loss_v;
  r.actor_loss = update_actor(b);
  r.alpha = traits_.stochastic ? update_temperature(last_log_prob_) : 0.0;
  return r;
}

RoundMetrics Agent::onestep_round(const OneStepBatch& b) {
  return finish_round(b, update_critics_onestep(b));
}

RoundMetrics Agent::update_multiagent(const OneStepBatch& b) {
  check_partition(b);
  return onestep_round(b);
}

RoundMetrics Agent::update_round(const ReplayBuffer& buffer, Rng& rng) {
  const auto n = static_cast<std::size_t>(config_.batch_size);
  if (!traits_.one_step) {
    const TdBatch b = buffer.sample_td(n, rng);
    return finish_round(b.now, update_critics_td(b));
  }
  const OneStepBatch b = buffer.sample(n, rng);
  return traits_.multi_agent ? update_multiagent(b) : onestep_round(b);
}

nlohmann::json Agent::to_json() const {
  nlohmann::json actors = nlohmann::json::array();
  for (const auto& a : actors_) {
    actors.push_back({{"obs_rows", a.spec.obs_rows}, {"devices", a.spec.devices}, {"body", network_json(a.body)}});
  }
  auto critic_json = [](const CriticSet& set) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : set.members) arr.push_back(network_json(m));
    return nlohmann::json{{"nonpositive", set.nonpositive}, {"members", arr}};
  };
  std::ostringstream rng_state;
  rng_state << rng_;
  return {{"format", "vvclab-agent"},
          {"version", 1},
          {"config", drl::to_json(config_)},
          {"obs_dim", obs_dim_},
          {"act_dim", act_dim_},
          {"actors", actors},
          {"critic_p", critic_json(critic_p_)},
          {"critic_v", critic_json(critic_v_)},
          {"log_alpha", log_alpha_},
          {"alpha_opt", tinynn::to_json(alpha_opt_)},
          {"rng", rng_state.str()}};
}

Agent Agent::from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("format", std::string()) != "vvclab-agent") throw ParseError("not an agent checkpoint");
    Agent a;
    a.config_ = algo_config_from_json(doc.at("config"));
    a.traits_ = traits_of(a.config_.algo);
    a.obs_dim_ = doc.at("obs_dim").get<std::size_t>();
    a.act_dim_ = doc.at("act_dim").get<std::size_t>();
    for (const auto& item : doc.at("actors")) {
      Actor actor;
      actor.spec.obs_rows = item.at("obs_rows").get<std::vector<std::size_t>>();
      actor.spec.devices = item.at("devices").get<std::vector<std::size_t>>();
      actor.body = network_from_json(item.at("body"));
      a.actors_.push_back(std::move(actor));
    }
    auto read_set = [](const nlohmann::json& j, CriticSet& set) {
      set.nonpositive = j.at("nonpositive").get<bool>();
      for (const auto& item : j.at("members")) set.members.push_back(network_from_json(item));
    };
    read_set(doc.at("critic_p"), a.critic_p_);
    read_set(doc.at("critic_v"), a.critic_v_);
    a.log_alpha_ = doc.at("log_alpha").get<double>();
    a.alpha_opt_ = tinynn::adam_from_json<double>(doc.at("alpha_opt"));
    std::istringstream rng_state(doc.at("rng").get<std::string>());
    rng_state >> a.rng_;
    if (a.actors_.empty() || a.critic_p_.members.empty()) throw ParseError("agent checkpoint has no networks");
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("agent checkpoint: ") + e.what());
  }
}

}  // namespace vvclab::drl
