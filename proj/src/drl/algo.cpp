#include "vvclab/drl/algo.hpp"

#include <algorithm>
#include <cctype>

#include "vvclab/error.hpp"

namespace vvclab::drl {

AlgoTraits traits_of(Algo algo) {
  switch (algo) {
    case Algo::Ddpg: return {false, false, false, false, false};
    case Algo::OsDp: return {true, false, false, false, false};
    case Algo::TcDp: return {false, true, false, false, false};
    case Algo::OstcDp: return {true, true, false, false, false};
    case Algo::Sac: return {false, false, true, false, true};
    case Algo::OsSac: return {true, false, true, false, false};
    case Algo::TcSac: return {false, true, true, false, true};
    case Algo::OstcSac: return {true, true, true, false, false};
    case Algo::MaOstcDp: return {true, true, false, true, false};
    case Algo::MaOstcSac: return {true, true, true, true, false};
  }
  throw ContractViolation("unknown algorithm");
}

std::string_view algo_name(Algo algo) {
  switch (algo) {
    case Algo::Ddpg: return "DDPG";
    case Algo::OsDp: return "OS-DP";
    case Algo::TcDp: return "TC-DP";
    case Algo::OstcDp: return "OSTC-DP";
    case Algo::Sac: return "SAC";
    case Algo::OsSac: return "OS-SAC";
    case Algo::TcSac: return "TC-SAC";
    case Algo::OstcSac: return "OSTC-SAC";
    case Algo::MaOstcDp: return "MA-OSTC-DP";
    case Algo::MaOstcSac: return "MA-OSTC-SAC";
  }
  return "?";
}

const std::vector<Algo>& all_algos() {
  static const std::vector<Algo> algos = {Algo::Ddpg,   Algo::OsDp,    Algo::TcDp,    Algo::OstcDp,
                                          Algo::Sac,    Algo::OsSac,   Algo::TcSac,   Algo::OstcSac,
                                          Algo::MaOstcDp, Algo::MaOstcSac};
  return algos;
}

Algo parse_algo(std::string_view name) {
  auto upper = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    return out;
  };
  const std::string wanted = upper(name);
  for (Algo a : all_algos()) {
    if (upper(algo_name(a)) == wanted) return a;
  }
  throw ParseError("unknown algorithm '" + std::string(name) + "'");
}

nlohmann::json to_json(const AlgoConfig& c) {
  nlohmann::json doc = {
      {"algo", std::string(algo_name(c.algo))},
      {"gamma", c.gamma},
      {"c_v", c.c_v},
      {"exploration_sigma", c.exploration_sigma},
      {"initial_random_steps", c.initial_random_steps},
      {"updates_per_step", c.updates_per_step},
      {"batch_size", c.batch_size},
      {"buffer_capacity", c.buffer_capacity},
      {"update_after", c.update_after},
      {"critic_lr", c.critic_lr},
      {"actor_lr", c.actor_lr},
      {"tau", c.tau},
      {"use_target_networks", c.use_target_networks},
      {"temperature_lr", c.temperature_lr},
      {"initial_alpha", c.initial_alpha},
      {"hidden", c.hidden},
      {"cv_in_actor", c.cv_in_actor},
      {"actor_final_scale", c.actor_final_scale},
      {"nonpositive_violation_critic", c.nonpositive_violation_critic},
  };
  doc["entropy_target"] = c.entropy_target ? nlohmann::json(*c.entropy_target) : nlohmann::json();
  return doc;
}

AlgoConfig algo_config_from_json(const nlohmann::json& doc, AlgoConfig c) {
  if (!doc.is_object()) throw ParseError("algorithm settings must be a JSON object");
  try {
    if (doc.contains("algo")) c.algo = parse_algo(doc.at("algo").get<std::string>());
    auto read = [&](const char* key, auto& field) {
      if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
    };
    read("gamma", c.gamma);
    read("c_v", c.c_v);
    read("exploration_sigma", c.exploration_sigma);
    read("initial_random_steps", c.initial_random_steps);
    read("updates_per_step", c.updates_per_step);
    read("batch_size", c.batch_size);
    read("buffer_capacity", c.buffer_capacity);
    read("update_after", c.update_after);
    read("critic_lr", c.critic_lr);
    read("actor_lr", c.actor_lr);
    read("tau", c.tau);
    read("use_target_networks", c.use_target_networks);
    read("temperature_lr", c.temperature_lr);
    read("initial_alpha", c.initial_alpha);
    read("hidden", c.hidden);
    read("cv_in_actor", c.cv_in_actor);
    read("actor_final_scale", c.actor_final_scale);
    read("nonpositive_violation_critic", c.nonpositive_violation_critic);
    if (doc.contains("entropy_target")) {
      const auto& e = doc.at("entropy_target");
      c.entropy_target = e.is_null() ? std::nullopt : std::optional<double>(e.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("algorithm settings: ") + e.what());
  }
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw ParseError("gamma must lie in [0, 1)");
  if (c.batch_size <= 0 || c.buffer_capacity <= 0 || c.updates_per_step < 0) {
    throw ParseError("batch_size and buffer_capacity must be positive");
  }
  if (!(c.initial_alpha > 0.0)) throw ParseError("initial_alpha must be positive");
  return c;
}

}  // namespace vvclab::drl
