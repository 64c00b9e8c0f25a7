#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace vvclab::drl {

enum class Algo {
  Ddpg,
  OsDp,
  TcDp,
  OstcDp,
  Sac,
  OsSac,
  TcSac,
  OstcSac,
  MaOstcDp,
  MaOstcSac,
};

struct AlgoTraits {
  bool one_step = false;    // regresses immediate rewards, never reads s'
  bool two_critic = false;  // separate loss and violation critics
  bool stochastic = false;  // tanh-Gaussian actor with learned temperature
  bool multi_agent = false;
  bool twin = false;        // clipped double-Q (discounted SAC baselines only)
};

AlgoTraits traits_of(Algo algo);
std::string_view algo_name(Algo algo);
/// Accepts the names printed by algo_name (case-insensitive).
Algo parse_algo(std::string_view name);
const std::vector<Algo>& all_algos();

struct AlgoConfig {
  Algo algo = Algo::OstcDp;
  double gamma = 0.9;
  double c_v = 50.0;
  double exploration_sigma = 0.1;
  int initial_random_steps = 960;
  int updates_per_step = 4;
  int batch_size = 128;
  int buffer_capacity = 30000;
  /// Updates start once the buffer holds this many transitions.
  int update_after = 128;
  double critic_lr = 3e-4;
  double actor_lr = 1e-4;
  double tau = 0.005;
  bool use_target_networks = true;
  /// Defaults to -dim(A) when unset.
  std::optional<double> entropy_target;
  double temperature_lr = 3e-4;
  double initial_alpha = 1e-3;
  std::vector<int> hidden = {512, 512};
  /// false: critic regresses c_v * r_v and the actor adds Q_v unweighted.
  /// true: critic regresses r_v and the actor adds c_v * Q_v.
  bool cv_in_actor = false;
  double actor_final_scale = 1e-3;
  /// Passes the violation critic through -softplus, matching r_v <= 0.
  bool nonpositive_violation_critic = true;
};

nlohmann::json to_json(const AlgoConfig& c);
/// Fields absent from `doc` keep the values of `base`.
AlgoConfig algo_config_from_json(const nlohmann::json& doc, AlgoConfig base = {});

}  // namespace vvclab::drl
