#include <algorithm>
#include <cmath>
#include <queue>

#include "vvclab/error.hpp"
#include "vvclab/gridnet.hpp"

namespace vvclab::gridnet {

RadialFeeder::RadialFeeder(const NetworkCase& c, PowerFlowOptions options)
    : case_(c), options_(options) {
  validate_case(case_);
  const std::size_t n = case_.num_buses();
  slack_ = case_.bus_index(case_.slack_bus);

  const double z_base = case_.units == ImpedanceUnits::Ohm
                            ? case_.base_kv * case_.base_kv / case_.base_mva
                            : 1.0;
  struct Edge {
    std::size_t to;
    std::complex<double> z;
  };
  std::vector<std::vector<Edge>> adjacency(n);
  for (const auto& l : case_.lines) {
    const std::size_t f = case_.bus_index(l.from_bus);
    const std::size_t t = case_.bus_index(l.to_bus);
    const std::complex<double> z(l.r / z_base, l.x / z_base);
    adjacency[f].push_back({t, z});
    adjacency[t].push_back({f, z});
  }

  parent_.assign(n, slack_);
  z_.assign(n, {0.0, 0.0});
  order_.clear();
  order_.reserve(n);
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(slack_);
  seen[slack_] = true;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    order_.push_back(u);
    for (const auto& e : adjacency[u]) {
      if (seen[e.to]) continue;
      seen[e.to] = true;
      parent_[e.to] = u;
      z_[e.to] = e.z;
      frontier.push(e.to);
    }
  }

  device_bus_.reserve(case_.num_devices());
  for (const auto& d : case_.devices) device_bus_.push_back(case_.bus_index(d.bus));
}

PowerFlowSolution RadialFeeder::solve(const Injections& inj) const {
  const std::size_t n = case_.num_buses();
  const std::size_t m = case_.num_devices();
  if (inj.p_load_mw.size() != n || inj.q_load_mvar.size() != n) {
    throw ContractViolation("power flow: load vectors must have one entry per bus");
  }
  if (inj.device_q_mvar.size() != m || inj.device_p_mw.size() != m) {
    throw ContractViolation("power flow: device vectors must have one entry per device");
  }

  // Net demand per bus in p.u. (load minus device output).
  std::vector<std::complex<double>> demand(n);
  const double base = case_.base_mva;
  for (std::size_t i = 0; i < n; ++i) {
    demand[i] = {inj.p_load_mw[i] / base, inj.q_load_mvar[i] / base};
  }
  for (std::size_t k = 0; k < m; ++k) {
    demand[device_bus_[k]] -= std::complex<double>(inj.device_p_mw[k], inj.device_q_mvar[k]) / base;
  }
  for (const auto& s : demand) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      throw NonFiniteError("power flow: non-finite injection");
    }
  }

  const std::complex<double> v_slack(options_.slack_voltage, 0.0);
  std::vector<std::complex<double>> v(n, v_slack);
  std::vector<std::complex<double>> branch(n);

  PowerFlowSolution sol;
  double residual = 0.0;
  int iter = 0;
  for (; iter < options_.max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) branch[i] = std::conj(demand[i] / v[i]);
    for (std::size_t k = n; k-- > 1;) {
      const std::size_t bus = order_[k];
      branch[parent_[bus]] += branch[bus];
    }
    residual = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const std::size_t bus = order_[k];
      const std::complex<double> updated = v[parent_[bus]] - z_[bus] * branch[bus];
      residual = std::max(residual, std::abs(updated - v[bus]));
      v[bus] = updated;
    }
    if (!std::isfinite(residual)) break;
    if (residual < options_.tol) {
      sol.converged = true;
      ++iter;
      break;
    }
  }
  if (!sol.converged) {
    throw DivergedError("power flow did not converge after " + std::to_string(iter) +
                            " iterations (last residual " + std::to_string(residual) + ")",
                        residual);
  }

  // Final branch currents consistent with the returned voltages: the slack
  // supplies the sum of its children's currents.
  for (std::size_t i = 0; i < n; ++i) branch[i] = std::conj(demand[i] / v[i]);
  for (std::size_t k = n; k-- > 1;) {
    const std::size_t bus = order_[k];
    branch[parent_[bus]] += branch[bus];
  }
  double loss = 0.0;
  std::complex<double> out_of_slack(0.0, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t bus = order_[k];
    loss += std::norm(branch[bus]) * z_[bus].real();
    if (parent_[bus] == slack_) out_of_slack += branch[bus];
  }

  sol.iterations = iter;
  sol.v.resize(n);
  sol.theta.resize(n);
  sol.p_inj.resize(n);
  sol.q_inj.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.v[i] = std::abs(v[i]);
    sol.theta[i] = std::arg(v[i]);
    sol.p_inj[i] = -demand[i].real() * base;
    sol.q_inj[i] = -demand[i].imag() * base;
  }
  const std::complex<double> s_feeder = v[slack_] * std::conj(out_of_slack);
  sol.p_inj[slack_] = s_feeder.real() * base;
  sol.q_inj[slack_] = s_feeder.imag() * base;
  sol.slack_p_mw = (s_feeder.real() + demand[slack_].real()) * base;
  sol.slack_q_mvar = (s_feeder.imag() + demand[slack_].imag()) * base;
  sol.total_loss_mw = loss * base;
  return sol;
}

PowerFlowSolution solve_power_flow(const NetworkCase& c, const Injections& inj,
                                   PowerFlowOptions options) {
  return RadialFeeder(c, options).solve(inj);
}

}  // namespace vvclab::gridnet
