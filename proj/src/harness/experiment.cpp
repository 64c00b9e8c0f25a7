#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "vvclab/drl/trainer.hpp"
#include "vvclab/error.hpp"
#include "vvclab/harness.hpp"

namespace vvclab::harness {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCheckpointFormat = "vvclab-checkpoint";
constexpr std::uint64_t kTrainStreamSalt = 0x747261696eULL;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    nlohmann::json doc;
    in >> doc;
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string mbo_cache_key(const env::VvcEnv& env, const env::ScenarioStream& stream, const mbo::OracleOptions& o) {
  std::string key = gridnet::case_to_json(env.network()).dump();
  for (double r : stream.profile().ratio) key += " " + num(r);
  const auto& n = stream.noise();
  key += " noise " + num(n.amplitude) + " " + std::to_string(n.per_bus) + " " + std::to_string(n.gen_follows_profile);
  key += " seed " + std::to_string(stream.seed());
  const auto& c = env.config();
  key += " limits " + num(c.limits.lower) + " " + num(c.limits.upper) + " cv " + num(c.c_v);
  key += " mbo " + num(o.penalty) + " " + num(o.tol) + " " + num(o.initial_step) + " " +
         std::to_string(o.max_evaluations) + " " + std::to_string(o.polish_iterations) + " " +
         std::to_string(o.restore_feasibility);
  char hex[20];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(key)));
  return hex;
}

double window_mean(const std::vector<double>& v, int window) {
  if (v.empty()) return 0.0;
  const std::size_t n = std::min(v.size(), static_cast<std::size_t>(window));
  return std::accumulate(v.end() - static_cast<std::ptrdiff_t>(n), v.end(), 0.0) / static_cast<double>(n);
}

RunConfig absolute_paths(RunConfig c) {
  c.case_path = fs::absolute(c.case_path);
  if (c.profile_path) c.profile_path = fs::absolute(*c.profile_path);
  c.out_dir = fs::absolute(c.out_dir);
  return c;
}

struct Setup {
  gridnet::NetworkCase network;
  env::DayProfile profile;
  env::VvcEnv env;

  explicit Setup(const RunConfig& c)
      : network(gridnet::load_case(c.case_path)), profile(resolve_profile(c)), env(network, env_config(c)) {}

  env::ScenarioStream stream(const RunConfig& c, std::uint64_t seed) const {
    return env::ScenarioStream(profile, c.noise, seed, env.num_buses(), env.num_devices());
  }
};

std::string totals_row(const std::string& step, int day, const env::DailyTotals& t, double loss_qp, double loss_qv,
                       double alpha, double wall) {
  return step + "," + std::to_string(day) + "," + num(t.reward) + "," + num(t.loss_mw) + "," + num(t.vvr) + "," +
         num(loss_qp) + "," + num(loss_qv) + "," + num(alpha) + "," + num(wall);
}

std::vector<env::DailyTotals> test_policy(const env::VvcEnv& env, const env::Policy& policy,
                                          const env::ScenarioStream& stream, int days) {
  std::vector<env::DailyTotals> out;
  for (int d = 0; d < days; ++d) out.push_back(env::evaluate_day(env, policy, stream, d));
  return out;
}

}  // namespace

std::vector<double> RunResult::final_rewards() const {
  std::vector<double> r;
  for (const auto& s : seeds) {
    if (s.ok) r.push_back(s.final_reward);
  }
  return r;
}

double RunResult::mean_final_reward() const {
  const auto r = final_rewards();
  if (r.empty()) return 0.0;
  return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

std::vector<env::DailyTotals> mbo_reference(const env::VvcEnv& env, const env::ScenarioStream& stream, int days,
                                            const mbo::OracleOptions& options) {
  return test_policy(env, mbo::oracle_policy(env, options), stream, days);
}

void write_daily_totals(const fs::path& csv, const std::vector<env::DailyTotals>& days) {
  std::ofstream out(csv);
  if (!out) throw Error("cannot write " + csv.string());
  out << "day,reward,loss_mw,vvr\n";
  for (std::size_t d = 0; d < days.size(); ++d) {
    out << d << ',' << num(days[d].reward) << ',' << num(days[d].loss_mw) << ',' << num(days[d].vvr) << '\n';
  }
}

std::vector<env::DailyTotals> read_daily_totals(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw ParseError("cannot open " + csv.string());
  std::string line;
  if (!std::getline(in, line) || line != "day,reward,loss_mw,vvr") {
    throw ParseError(csv.string() + ": expected header day,reward,loss_mw,vvr");
  }
  std::vector<env::DailyTotals> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    int day = 0;
    env::DailyTotals t;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &day, &t.reward, &t.loss_mw, &t.vvr) != 4 ||
        day != static_cast<int>(out.size())) {
      throw ParseError(csv.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    out.push_back(t);
  }
  return out;
}

SeedResult run_seed(const RunConfig& config_in, std::uint64_t seed, const fs::path& dir) {
  const RunConfig config = absolute_paths(config_in);
  SeedResult result;
  result.seed = seed;
  result.dir = dir;
  fs::create_directories(dir);
  {
    nlohmann::json cfg = to_json(config);
    cfg["seed"] = seed;
    write_json(dir / "config.json", cfg);
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    if (!config.record_wall_time) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  try {
    std::ofstream metrics(dir / "metrics.csv");
    if (!metrics) throw Error("cannot write " + (dir / "metrics.csv").string());
    metrics << kMetricsHeader << '\n';
    validate(config);
    const Setup setup(config);
    const env::VvcEnv& env = setup.env;
    const env::ScenarioStream eval_stream = setup.stream(config, config.eval_seed);
    drl::Trainer trainer(env, setup.stream(config, env::mix_seed(seed, kTrainStreamSalt)), config.algo,
                         agent_views(config, setup.network), seed);
    const env::Policy policy = drl::make_policy(env, trainer.agent());
    const double c_v = env.config().c_v;

    for (int day = 0; day < config.days; ++day) {
      env::DailyTotals running;
      std::vector<double> q_g(env.act_dim(), 0.0);
      double sum_qp = 0.0, sum_qv = 0.0, alpha = 0.0;
      int rounds = 0;
      for (int k = 0; k < env::kStepsPerDay; ++k) {
        const drl::StepMetrics m = trainer.step();
        if (m.failed) throw Error("training step " + std::to_string(m.step) + " failed: " + m.error);
        if (m.updates > 0) {
          sum_qp += m.round.loss_p;
          sum_qv += m.round.loss_v;
          alpha = m.round.alpha;
          ++rounds;
        }
        std::string row = std::to_string(m.step) + "," + std::to_string(day) + ",";
        if (config.eval_cadence == 1) {
          const env::Scenario s = eval_stream.at(day, k);
          q_g = policy(env.observe(s, q_g), s);
          const env::StepOutcome out = env.apply_action(s, q_g);
          running.loss_mw += out.solution.total_loss_mw;
          running.vvr += -out.reported.r_v;
          running.reward += out.reported.r_p + c_v * out.reported.r_v;
          row += num(running.reward) + "," + num(running.loss_mw) + "," + num(running.vvr) + ",";
        } else {
          row += ",,,";
        }
        row += (m.updates > 0 ? num(m.round.loss_p) + "," + num(m.round.loss_v) + "," + num(m.round.alpha)
                              : std::string(",,")) +
               "," + num(wall());
        metrics << row << '\n';
      }
      if (config.eval_cadence != 1) running = env::evaluate_day(env, policy, eval_stream, day);
      const double n = rounds > 0 ? static_cast<double>(rounds) : 1.0;
      DayRecord rec{day, running.reward, running.loss_mw, running.vvr, sum_qp / n, sum_qv / n, alpha};
      metrics << totals_row(kSummaryStep, day, running, rec.loss_qp, rec.loss_qv, rec.alpha, wall()) << '\n';
      metrics.flush();
      result.days.push_back(rec);
      result.days_completed = day + 1;
    }

    nlohmann::json ckpt = {{"format", kCheckpointFormat},
                           {"run", to_json(config)},
                           {"seed", seed},
                           {"agent", trainer.agent().to_json()}};
    write_json(dir / "checkpoint.json", ckpt);

    const env::ScenarioStream test_stream = setup.stream(config, config.test_seed);
    result.test = test_policy(env, policy, test_stream, config.test_days);
    write_daily_totals(dir / "test.csv", result.test);
    result.ok = true;
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }

  std::vector<double> rewards, losses, vvrs;
  for (const auto& d : result.days) {
    rewards.push_back(d.reward);
    losses.push_back(d.loss_mw);
    vvrs.push_back(d.vvr);
  }
  result.final_reward = window_mean(rewards, config.final_window);
  result.final_loss_mw = window_mean(losses, config.final_window);
  result.final_vvr = window_mean(vvrs, config.final_window);
  for (const auto& t : result.test) {
    result.test_vvr_mean += t.vvr / static_cast<double>(result.test.size());
    result.test_reward_mean += t.reward / static_cast<double>(result.test.size());
  }

  nlohmann::json status = {{"ok", result.ok},
                           {"seed", seed},
                           {"days_completed", result.days_completed},
                           {"final_reward", result.final_reward},
                           {"final_loss_mw", result.final_loss_mw},
                           {"final_vvr", result.final_vvr},
                           {"test_reward_mean", result.test_reward_mean},
                           {"test_vvr_mean", result.test_vvr_mean}};
  if (!result.ok) status["error"] = result.error;
  write_json(dir / "status.json", status);
  return result;
}

RunResult run_experiment(const RunConfig& config_in) {
  const RunConfig config = absolute_paths(config_in);
  validate(config);
  RunResult run;
  const std::string name = config.name.empty() ? std::string(drl::algo_name(config.algo.algo)) : config.name;
  run.dir = config.out_dir / name;
  fs::create_directories(run.dir);
  write_json(run.dir / "config.json", to_json(config));

  if (config.compute_mbo) {
    const Setup setup(config);
    const env::ScenarioStream eval_stream = setup.stream(config, config.eval_seed);
    const fs::path cache = config.out_dir / "mbo_cache" /
                           (mbo_cache_key(setup.env, eval_stream, config.mbo) + ".csv");
    if (fs::exists(cache)) {
      auto cached = read_daily_totals(cache);
      if (static_cast<int>(cached.size()) >= config.days) {
        cached.resize(static_cast<std::size_t>(config.days));
        run.mbo = std::move(cached);
      }
    }
    if (run.mbo.empty()) {
      run.mbo = mbo_reference(setup.env, eval_stream, config.days, config.mbo);
      fs::create_directories(cache.parent_path());
      write_daily_totals(cache, run.mbo);
    }
    write_daily_totals(run.dir / "mbo.csv", run.mbo);
    std::vector<double> r;
    for (const auto& d : run.mbo) r.push_back(d.reward);
    run.mbo_final_reward = window_mean(r, config.final_window);
  }

  for (std::uint64_t seed : config.seeds) {
    const fs::path dir = run.dir / ("seed_" + std::to_string(seed));
    try {
      run.seeds.push_back(run_seed(config, seed, dir));
    } catch (const std::exception& e) {
      SeedResult failed;
      failed.seed = seed;
      failed.dir = dir;
      failed.error = e.what();
      run.seeds.push_back(std::move(failed));
    }
  }

  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : run.seeds) {
    nlohmann::json j = {{"seed", s.seed},
                        {"ok", s.ok},
                        {"days_completed", s.days_completed},
                        {"final_reward", s.final_reward},
                        {"final_loss_mw", s.final_loss_mw},
                        {"final_vvr", s.final_vvr},
                        {"test_reward_mean", s.test_reward_mean},
                        {"test_vvr_mean", s.test_vvr_mean}};
    if (!s.ok) j["error"] = s.error;
    seeds.push_back(j);
  }
  nlohmann::json summary = {{"algo", std::string(drl::algo_name(config.algo.algo))},
                            {"case", config.case_path.string()},
                            {"days", config.days},
                            {"final_window", config.final_window},
                            {"seeds", seeds},
                            {"mean_final_reward", run.mean_final_reward()}};
  if (config.compute_mbo) {
    summary["mbo_final_reward"] = run.mbo_final_reward;
    if (run.mbo_final_reward != 0.0 && !run.final_rewards().empty()) {
      summary["accuracy"] = compute_accuracy(run.mean_final_reward(), run.mbo_final_reward);
    }
  }
  write_json(run.dir / "summary.json", summary);
  return run;
}

std::vector<env::DailyTotals> evaluate_checkpoint(const fs::path& checkpoint, int days) {
  const nlohmann::json doc = read_json(checkpoint);
  if (!doc.is_object() || doc.value("format", std::string()) != kCheckpointFormat) {
    throw ParseError(checkpoint.string() + ": not a vvclab checkpoint");
  }
  try {
    const RunConfig config = run_config_from_json(doc.at("run"));
    const drl::Agent agent = drl::Agent::from_json(doc.at("agent"));
    const Setup setup(config);
    if (agent.obs_dim() != setup.env.obs_dim() || agent.act_dim() != setup.env.act_dim()) {
      throw ParseError(checkpoint.string() + ": agent dimensions do not match the case");
    }
    const env::ScenarioStream test_stream = setup.stream(config, config.test_seed);
    return test_policy(setup.env, drl::make_policy(setup.env, agent), test_stream,
                       days < 0 ? config.test_days : days);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(checkpoint.string() + ": " + e.what());
  }
}

}  // namespace vvclab::harness
