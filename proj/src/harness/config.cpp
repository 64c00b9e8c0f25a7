#include <fstream>

#include "vvclab/error.hpp"
#include "vvclab/harness.hpp"

namespace vvclab::harness {

namespace {

std::string partition_name(Partition p) {
  switch (p) {
    case Partition::Subareas:
      return "subareas";
    case Partition::Local:
      return "local";
    case Partition::Global:
      return "global";
  }
  return "subareas";
}

Partition parse_partition(const std::string& s) {
  if (s == "subareas") return Partition::Subareas;
  if (s == "local") return Partition::Local;
  if (s == "global") return Partition::Global;
  throw ParseError("run config: field 'partition' must be \"subareas\", \"local\" or \"global\"");
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json doc = {
      {"case", c.case_path.string()},
      {"algo", std::string(drl::algo_name(c.algo.algo))},
      {"days", c.days},
      {"seeds", c.seeds},
      {"eval_cadence", c.eval_cadence},
      {"eval_seed", c.eval_seed},
      {"test_seed", c.test_seed},
      {"test_days", c.test_days},
      {"final_window", c.final_window},
      {"noise", {{"amplitude", c.noise.amplitude},
                 {"per_bus", c.noise.per_bus},
                 {"gen_follows_profile", c.noise.gen_follows_profile}}},
      {"voltage_margin", c.voltage_margin},
      {"partition", partition_name(c.partition)},
      {"compute_mbo", c.compute_mbo},
      {"mbo", {{"penalty", c.mbo.penalty},
               {"tol", c.mbo.tol},
               {"initial_step", c.mbo.initial_step},
               {"max_evaluations", c.mbo.max_evaluations},
               {"polish_iterations", c.mbo.polish_iterations},
               {"restore_feasibility", c.mbo.restore_feasibility}}},
      {"record_wall_time", c.record_wall_time},
      {"out", c.out_dir.string()},
      {"name", c.name},
      {"hyperparameters", drl::to_json(c.algo)},
  };
  if (c.profile_path) doc["profile"] = c.profile_path->string();
  return doc;
}

RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ParseError("run config must be a JSON object");
  RunConfig c;
  try {
    if (!doc.contains("case")) throw ParseError("run config: missing field 'case'");
    c.case_path = resolve(doc.at("case").get<std::string>(), base_dir);
    if (doc.contains("profile") && !doc.at("profile").is_null()) {
      c.profile_path = resolve(doc.at("profile").get<std::string>(), base_dir);
    }
    if (doc.contains("hyperparameters")) c.algo = drl::algo_config_from_json(doc.at("hyperparameters"), c.algo);
    if (doc.contains("algo")) c.algo.algo = drl::parse_algo(doc.at("algo").get<std::string>());
    c.days = doc.value("days", c.days);
    if (doc.contains("seeds")) c.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    c.eval_cadence = doc.value("eval_cadence", c.eval_cadence);
    c.eval_seed = doc.value("eval_seed", c.eval_seed);
    c.test_seed = doc.value("test_seed", c.test_seed);
    c.test_days = doc.value("test_days", c.test_days);
    c.final_window = doc.value("final_window", c.final_window);
    if (doc.contains("noise")) {
      const auto& n = doc.at("noise");
      c.noise.amplitude = n.value("amplitude", c.noise.amplitude);
      c.noise.per_bus = n.value("per_bus", c.noise.per_bus);
      c.noise.gen_follows_profile = n.value("gen_follows_profile", c.noise.gen_follows_profile);
    }
    c.voltage_margin = doc.value("voltage_margin", c.voltage_margin);
    if (doc.contains("partition")) c.partition = parse_partition(doc.at("partition").get<std::string>());
    c.compute_mbo = doc.value("compute_mbo", c.compute_mbo);
    if (doc.contains("mbo")) {
      const auto& m = doc.at("mbo");
      c.mbo.penalty = m.value("penalty", c.mbo.penalty);
      c.mbo.tol = m.value("tol", c.mbo.tol);
      c.mbo.initial_step = m.value("initial_step", c.mbo.initial_step);
      c.mbo.max_evaluations = m.value("max_evaluations", c.mbo.max_evaluations);
      c.mbo.polish_iterations = m.value("polish_iterations", c.mbo.polish_iterations);
      c.mbo.restore_feasibility = m.value("restore_feasibility", c.mbo.restore_feasibility);
    }
    c.record_wall_time = doc.value("record_wall_time", c.record_wall_time);
    if (doc.contains("out")) c.out_dir = resolve(doc.at("out").get<std::string>(), base_dir);
    c.name = doc.value("name", c.name);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open run config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what());
  }
  return run_config_from_json(doc, path.parent_path());
}

void validate(const RunConfig& c) {
  if (c.case_path.empty()) throw ParseError("run config: field 'case' is empty");
  if (c.days < 1) throw ParseError("run config: field 'days' must be at least 1");
  if (c.seeds.empty()) throw ParseError("run config: field 'seeds' must not be empty");
  if (c.eval_cadence != 1 && c.eval_cadence != env::kStepsPerDay) {
    throw ParseError("run config: field 'eval_cadence' must be 1 or 96");
  }
  if (c.test_days < 0) throw ParseError("run config: field 'test_days' must not be negative");
  if (c.final_window < 1) throw ParseError("run config: field 'final_window' must be at least 1");
  if (c.voltage_margin < 0.0) throw ParseError("run config: field 'voltage_margin' must not be negative");
  if (c.noise.amplitude < 0.0 || c.noise.amplitude >= 1.0) {
    throw ParseError("run config: field 'noise.amplitude' must lie in [0, 1)");
  }
}

env::DayProfile resolve_profile(const RunConfig& c) {
  return c.profile_path ? env::load_profile(*c.profile_path) : env::default_day_profile();
}

env::EnvConfig env_config(const RunConfig& c) {
  env::EnvConfig e;
  e.c_v = c.algo.c_v;
  e.voltage_margin = c.voltage_margin;
  return e;
}

std::vector<env::AgentView> agent_views(const RunConfig& c, const gridnet::NetworkCase& network) {
  if (!drl::traits_of(c.algo.algo).multi_agent || c.partition == Partition::Global) {
    return {env::global_view(network)};
  }
  if (c.partition == Partition::Local) return env::local_agent_views(network);
  if (network.subareas.empty()) throw ParseError("case '" + network.name + "' defines no subareas");
  return env::make_agent_views(network, network.subareas);
}

double compute_accuracy(double algo_reward, double mbo_reward) {
  if (mbo_reward == 0.0) throw ContractViolation("accuracy needs a nonzero MBO reward");
  return (algo_reward - mbo_reward) / mbo_reward;
}

}  // namespace vvclab::harness
