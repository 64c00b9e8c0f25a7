#include <algorithm>
#include <cmath>
#include <set>

#include "vvclab/env.hpp"
#include "vvclab/error.hpp"

namespace vvclab::env {

using gridnet::DeviceKind;
using gridnet::PowerFlowSolution;

double voltage_violation(std::span<const double> v, const VoltageLimits& limits) {
  double total = 0.0;
  for (double x : v) total += std::max(x - limits.upper, 0.0) + std::max(limits.lower - x, 0.0);
  return total;
}

VvcEnv::VvcEnv(gridnet::NetworkCase network, EnvConfig config)
    : feeder_(network, config.power_flow),
      config_(config),
      bounds_(gridnet::action_bounds(feeder_.network())) {
  if (!(config_.voltage_margin >= 0.0) ||
      config_.limits.lower + config_.voltage_margin >= config_.limits.upper - config_.voltage_margin) {
    throw ContractViolation("voltage limits/margin leave an empty interval");
  }
  pq_scale_ = feeder_.network().max_bus_load_mva();
  if (!(pq_scale_ > 0.0)) pq_scale_ = 1.0;
}

VoltageLimits VvcEnv::objective_limits() const {
  return {config_.limits.lower + config_.voltage_margin,
          config_.limits.upper - config_.voltage_margin};
}

void VvcEnv::scenario_injections(const Scenario& s, std::vector<double>& p_load,
                                 std::vector<double>& q_load,
                                 std::vector<double>& device_p) const {
  const auto& c = network();
  if (s.load_scale.size() != c.num_buses() || s.gen_scale.size() != c.num_devices()) {
    throw ContractViolation("scenario dimensions do not match the network");
  }
  p_load.resize(c.num_buses());
  q_load.resize(c.num_buses());
  device_p.assign(c.num_devices(), 0.0);
  for (std::size_t i = 0; i < c.num_buses(); ++i) {
    p_load[i] = c.buses[i].p_load_mw * s.load_scale[i];
    q_load[i] = c.buses[i].q_load_mvar * s.load_scale[i];
  }
  for (std::size_t k = 0; k < c.num_devices(); ++k) {
    const auto& d = c.devices[k];
    if (d.kind == DeviceKind::IbEr) {
      device_p[k] = std::min(d.p_max_mw * s.gen_scale[k], d.p_max_mw);
    }
  }
}

PowerFlowSolution VvcEnv::solve(const Scenario& s, std::span<const double> q_g) const {
  std::vector<double> p_load, q_load, device_p;
  scenario_injections(s, p_load, q_load, device_p);
  return feeder_.solve({p_load, q_load, q_g, device_p});
}

Observation VvcEnv::observation_from(const PowerFlowSolution& sol,
                                     std::span<const double> q_g) const {
  Observation o;
  o.p = sol.p_inj;
  o.q = sol.q_inj;
  o.v = sol.v;
  o.q_g.assign(q_g.begin(), q_g.end());
  return o;
}

Observation VvcEnv::observe(const Scenario& s, std::span<const double> prev_q_g) const {
  return observation_from(solve(s, prev_q_g), prev_q_g);
}

RewardPair VvcEnv::reward(const PowerFlowSolution& sol, const VoltageLimits& limits) const {
  return {-sol.total_loss_mw, -voltage_violation(sol.v, limits)};
}

StepOutcome VvcEnv::apply_action(const Scenario& s, std::span<const double> q_g) const {
  if (q_g.size() != act_dim()) {
    throw ContractViolation("action has " + std::to_string(q_g.size()) + " entries, expected " +
                            std::to_string(act_dim()));
  }
  for (std::size_t k = 0; k < q_g.size(); ++k) {
    const auto& b = bounds_[k];
    // one ulp of slack for values produced by denormalize_action
    const double tol = 1e-12 * std::max(1.0, std::abs(b.high) + std::abs(b.low));
    if (!(q_g[k] >= b.low - tol && q_g[k] <= b.high + tol)) {
      throw ContractViolation("action for device " + std::to_string(k) + " (" +
                              std::to_string(q_g[k]) + " MVar) is outside [" +
                              std::to_string(b.low) + ", " + std::to_string(b.high) + "]");
    }
  }
  StepOutcome out;
  out.solution = solve(s, q_g);
  out.reward = reward(out.solution, objective_limits());
  out.reported = reward(out.solution, config_.limits);
  return out;
}

std::vector<double> VvcEnv::normalize(const Observation& obs) const {
  const std::size_t n = num_buses();
  const std::size_t m = num_devices();
  if (obs.p.size() != n || obs.q.size() != n || obs.v.size() != n || obs.q_g.size() != m) {
    throw ContractViolation("observation dimensions do not match the network");
  }
  std::vector<double> x(obs_dim());
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = obs.p[i] / pq_scale_;
    x[n + i] = obs.q[i] / pq_scale_;
    x[2 * n + i] = (obs.v[i] - 1.0) / 0.05;
  }
  for (std::size_t k = 0; k < m; ++k) {
    const double scale = std::max(std::abs(bounds_[k].low), std::abs(bounds_[k].high));
    x[3 * n + k] = scale > 0.0 ? obs.q_g[k] / scale : 0.0;
  }
  return x;
}

std::vector<double> VvcEnv::denormalize_action(std::span<const double> a) const {
  if (a.size() != act_dim()) throw ContractViolation("normalized action has the wrong length");
  std::vector<double> q(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double x = std::clamp(a[k], -1.0, 1.0);
    const auto& b = bounds_[k];
    q[k] = std::clamp(b.low + 0.5 * (x + 1.0) * (b.high - b.low), b.low, b.high);
  }
  return q;
}

std::vector<double> VvcEnv::normalize_action(std::span<const double> q_g) const {
  if (q_g.size() != act_dim()) throw ContractViolation("action has the wrong length");
  std::vector<double> a(q_g.size());
  for (std::size_t k = 0; k < q_g.size(); ++k) {
    const auto& b = bounds_[k];
    const double width = b.high - b.low;
    a[k] = width > 0.0 ? std::clamp(2.0 * (q_g[k] - b.low) / width - 1.0, -1.0, 1.0) : 0.0;
  }
  return a;
}

std::vector<std::size_t> VvcEnv::observation_rows(const AgentView& view) const {
  const std::size_t n = num_buses();
  std::vector<std::size_t> rows;
  rows.reserve(3 * view.bus_index.size() + view.devices.size());
  for (std::size_t block = 0; block < 3; ++block) {
    for (std::size_t i : view.bus_index) rows.push_back(block * n + i);
  }
  for (std::size_t k : view.devices) rows.push_back(3 * n + k);
  return rows;
}

std::vector<AgentView> make_agent_views(const gridnet::NetworkCase& c,
                                        const std::vector<std::vector<int>>& bus_sets) {
  if (bus_sets.empty()) throw ContractViolation("agent partition is empty");
  std::vector<AgentView> views(bus_sets.size());
  for (std::size_t a = 0; a < bus_sets.size(); ++a) {
    views[a].agent_id = static_cast<int>(a);
    std::set<int> unique(bus_sets[a].begin(), bus_sets[a].end());
    if (unique.size() != bus_sets[a].size()) {
      throw ContractViolation("agent " + std::to_string(a) + " lists a bus twice");
    }
    for (int id : bus_sets[a]) {
      views[a].bus_ids.push_back(id);
      views[a].bus_index.push_back(c.bus_index(id));
    }
  }
  for (std::size_t k = 0; k < c.num_devices(); ++k) {
    bool assigned = false;
    for (auto& view : views) {
      if (std::find(view.bus_ids.begin(), view.bus_ids.end(), c.devices[k].bus) != view.bus_ids.end()) {
        view.devices.push_back(k);
        assigned = true;
        break;
      }
    }
    if (!assigned) {
      throw ContractViolation("device at bus " + std::to_string(c.devices[k].bus) +
                              " is not covered by any agent");
    }
  }
  for (const auto& view : views) {
    if (view.devices.empty()) {
      throw ContractViolation("agent " + std::to_string(view.agent_id) + " controls no device");
    }
  }
  return views;
}

std::vector<AgentView> local_agent_views(const gridnet::NetworkCase& c) {
  std::vector<std::vector<int>> sets;
  for (const auto& d : c.devices) {
    const bool seen = std::any_of(sets.begin(), sets.end(),
                                  [&](const std::vector<int>& s) { return s.front() == d.bus; });
    if (!seen) sets.push_back({d.bus});
  }
  return make_agent_views(c, sets);
}

AgentView global_view(const gridnet::NetworkCase& c) {
  AgentView v;
  for (std::size_t i = 0; i < c.num_buses(); ++i) {
    v.bus_ids.push_back(c.buses[i].id);
    v.bus_index.push_back(i);
  }
  for (std::size_t k = 0; k < c.num_devices(); ++k) v.devices.push_back(k);
  return v;
}

DailyTotals evaluate_day(const VvcEnv& env, const Policy& policy, const ScenarioStream& stream,
                         int day) {
  DailyTotals totals;
  std::vector<double> q_g(env.act_dim(), 0.0);
  for (int step = 0; step < kStepsPerDay; ++step) {
    const Scenario s = stream.at(day, step);
    const Observation obs = env.observe(s, q_g);
    q_g = policy(obs, s);
    const StepOutcome out = env.apply_action(s, q_g);
    totals.loss_mw += out.solution.total_loss_mw;
    totals.vvr += -out.reported.r_v;
    totals.reward += out.reported.r_p + env.config().c_v * out.reported.r_v;
  }
  return totals;
}

}  // namespace vvclab::env
