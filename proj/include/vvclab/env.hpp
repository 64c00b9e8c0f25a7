#pragma once

// One-step Volt-Var environment: daily scenarios, observations, action
// application through the radial power flow and the two-term reward.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "vvclab/gridnet.hpp"

namespace vvclab::env {

inline constexpr int kStepsPerDay = 96;

/// 96 positive multipliers, one per 15-minute interval.
struct DayProfile {
  std::vector<double> ratio;
};

/// Smooth double-peak curve in [0.6, 1.1] (morning and evening peaks, night trough).
DayProfile default_day_profile();
DayProfile load_profile(const std::filesystem::path& path);
DayProfile profile_from_json(const nlohmann::json& doc);
void validate_profile(const DayProfile& profile);

struct NoiseConfig {
  double amplitude = 0.2;
  /// Independent draw per bus and per generator; otherwise one system-wide
  /// draw for all loads and one for all generators.
  bool per_bus = true;
  bool gen_follows_profile = true;
};

struct Scenario {
  int step_index = 0;
  std::vector<double> load_scale;  // per bus
  std::vector<double> gen_scale;   // per device (unused for SVCs)
};

/// multiplier = profile[step] * (1 + u), u ~ Uniform(-amplitude, amplitude).
Scenario sample_scenario(const DayProfile& profile, int step, std::size_t num_buses,
                         std::size_t num_devices, const NoiseConfig& noise, std::mt19937_64& rng);

/// Random-access scenario source: the scenario for (day, step) depends only on
/// the seed, so training and evaluation streams never share state.
class ScenarioStream {
 public:
  ScenarioStream(DayProfile profile, NoiseConfig noise, std::uint64_t seed,
                 std::size_t num_buses, std::size_t num_devices);
  Scenario at(int day, int step) const;
  std::uint64_t seed() const { return seed_; }
  const DayProfile& profile() const { return profile_; }
  const NoiseConfig& noise() const { return noise_; }

 private:
  DayProfile profile_;
  NoiseConfig noise_;
  std::uint64_t seed_;
  std::size_t num_buses_;
  std::size_t num_devices_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Engineering-unit state (P, Q, V, Q_G).
struct Observation {
  std::vector<double> p;    // MW net injection per bus
  std::vector<double> q;    // MVar net injection per bus
  std::vector<double> v;    // p.u.
  std::vector<double> q_g;  // MVar per device
};

struct RewardPair {
  double r_p = 0.0;  // -loss (MW)
  double r_v = 0.0;  // -sum of limit excursions (p.u.)
};

struct VoltageLimits {
  double lower = 0.95;
  double upper = 1.05;
};

/// Sum over buses of max(V - upper, 0) + max(lower - V, 0).
double voltage_violation(std::span<const double> v, const VoltageLimits& limits);

struct EnvConfig {
  VoltageLimits limits{};
  /// Shrinks the limits used for the training reward to
  /// [lower + margin, upper - margin]; reporting keeps `limits`.
  double voltage_margin = 0.0;
  double c_v = 50.0;
  gridnet::PowerFlowOptions power_flow{};
};

struct StepOutcome {
  gridnet::PowerFlowSolution solution;
  RewardPair reward;    // against the training-objective limits
  RewardPair reported;  // against the nominal limits
};

/// Bus/device subset seen and controlled by one agent.
struct AgentView {
  int agent_id = 0;
  std::vector<int> bus_ids;
  std::vector<std::size_t> bus_index;
  std::vector<std::size_t> devices;  // indices into NetworkCase::devices, ascending
};

class VvcEnv {
 public:
  VvcEnv(gridnet::NetworkCase network, EnvConfig config = {});

  const gridnet::NetworkCase& network() const { return feeder_.network(); }
  const gridnet::RadialFeeder& feeder() const { return feeder_; }
  const EnvConfig& config() const { return config_; }
  const std::vector<gridnet::Bound>& bounds() const { return bounds_; }
  std::size_t num_buses() const { return network().num_buses(); }
  std::size_t num_devices() const { return network().num_devices(); }
  std::size_t obs_dim() const { return 3 * num_buses() + num_devices(); }
  std::size_t act_dim() const { return num_devices(); }
  VoltageLimits objective_limits() const;

  /// Loads and IB-ER active output for a scenario. IB-ER output is capped at
  /// its rating so the reactive bound stays valid.
  void scenario_injections(const Scenario& s, std::vector<double>& p_load,
                           std::vector<double>& q_load, std::vector<double>& device_p) const;

  gridnet::PowerFlowSolution solve(const Scenario& s, std::span<const double> q_g) const;

  /// State under the scenario with the previous reactive dispatch held.
  Observation observe(const Scenario& s, std::span<const double> prev_q_g) const;
  Observation observation_from(const gridnet::PowerFlowSolution& sol,
                               std::span<const double> q_g) const;

  /// Runs the power flow with `q_g` (MVar) and scores the resulting state.
  /// Throws ContractViolation when q_g leaves the device bounds.
  StepOutcome apply_action(const Scenario& s, std::span<const double> q_g) const;
  RewardPair reward(const gridnet::PowerFlowSolution& sol, const VoltageLimits& limits) const;

  /// Fixed affine scaling: P, Q by the largest nominal bus load, V as
  /// (v - 1) / 0.05, Q_G by the device's largest bound magnitude.
  std::vector<double> normalize(const Observation& obs) const;
  /// [-1, 1]^d to MVar, linear onto [low, high] per device.
  std::vector<double> denormalize_action(std::span<const double> a) const;
  std::vector<double> normalize_action(std::span<const double> q_g) const;

  /// Rows of the normalized observation visible through `view`.
  std::vector<std::size_t> observation_rows(const AgentView& view) const;

 private:
  gridnet::RadialFeeder feeder_;
  EnvConfig config_;
  std::vector<gridnet::Bound> bounds_;
  double pq_scale_ = 1.0;
};

/// Assigns each device to the first bus set containing its bus. Throws
/// ContractViolation when an agent ends up without devices or a device is
/// left unassigned.
std::vector<AgentView> make_agent_views(const gridnet::NetworkCase& c,
                                        const std::vector<std::vector<int>>& bus_sets);
/// One agent per distinct device bus, observing only that bus.
std::vector<AgentView> local_agent_views(const gridnet::NetworkCase& c);
/// Single agent seeing every bus and controlling every device.
AgentView global_view(const gridnet::NetworkCase& c);

/// Policy in engineering units. The scenario is available to model-based
/// policies; learned policies use only the observation.
using Policy = std::function<std::vector<double>(const Observation&, const Scenario&)>;

struct DailyTotals {
  double reward = 0.0;   // sum of r_p + c_v * r_v (nominal limits)
  double loss_mw = 0.0;  // sum of per-step losses
  double vvr = 0.0;      // sum of per-step violations (>= 0)
};

/// Runs one 96-step day starting from zero reactive output, holding each
/// action until the next step's observation.
DailyTotals evaluate_day(const VvcEnv& env, const Policy& policy, const ScenarioStream& stream,
                         int day);

}  // namespace vvclab::env
