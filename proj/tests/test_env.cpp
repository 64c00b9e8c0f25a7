#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "support.hpp"
#include "vvclab/env.hpp"
#include "vvclab/error.hpp"

using namespace vvclab;
using namespace vvclab::env;

namespace {

DayProfile flat_profile(double value) { return DayProfile{std::vector<double>(kStepsPerDay, value)}; }

VvcEnv case33_env() { return VvcEnv(gridnet::load_case(vvtest::case33_path())); }

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

}  // namespace

TEST_CASE("default profile is a valid 96-point curve in [0.6, 1.1]") {
  const DayProfile p = default_day_profile();
  REQUIRE(p.ratio.size() == kStepsPerDay);
  CHECK_NOTHROW(validate_profile(p));
  const auto [lo, hi] = std::minmax_element(p.ratio.begin(), p.ratio.end());
  CHECK(*lo >= 0.6 - 1e-12);
  CHECK(*hi <= 1.1 + 1e-12);
  CHECK(*hi - *lo > 0.3);
}

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(validate_profile(DayProfile{std::vector<double>(95, 1.0)}), ParseError);
  DayProfile neg = flat_profile(1.0);
  neg.ratio[10] = -0.1;
  CHECK_THROWS_AS(validate_profile(neg), ParseError);
  CHECK_THROWS_AS(profile_from_json(nlohmann::json::array({1.0, 2.0})), ParseError);
  const DayProfile back = profile_from_json(nlohmann::json(default_day_profile().ratio));
  CHECK(back.ratio == default_day_profile().ratio);
}

TEST_CASE("scenario multipliers stay within the noise band") {
  std::mt19937_64 rng(3);
  const DayProfile p = flat_profile(1.0);
  for (int step = 0; step < kStepsPerDay; ++step) {
    const Scenario s = sample_scenario(p, step, 33, 4, NoiseConfig{}, rng);
    CHECK(s.step_index == step);
    REQUIRE(s.load_scale.size() == 33);
    REQUIRE(s.gen_scale.size() == 4);
    for (double m : s.load_scale) {
      CHECK(m >= 0.8);
      CHECK(m <= 1.2);
    }
    for (double m : s.gen_scale) {
      CHECK(m >= 0.8);
      CHECK(m <= 1.2);
    }
  }
}

TEST_CASE("zero noise reproduces the profile exactly") {
  std::mt19937_64 rng(3);
  const DayProfile p = default_day_profile();
  NoiseConfig noise;
  noise.amplitude = 0.0;
  for (int step = 0; step < kStepsPerDay; step += 7) {
    const Scenario s = sample_scenario(p, step, 5, 2, noise, rng);
    for (double m : s.load_scale) CHECK(m == p.ratio[static_cast<std::size_t>(step)]);
    for (double m : s.gen_scale) CHECK(m == p.ratio[static_cast<std::size_t>(step)]);
  }
  CHECK_THROWS_AS(sample_scenario(p, 96, 5, 2, noise, rng), ContractViolation);
}

TEST_CASE("system-wide noise draws one multiplier for every bus") {
  std::mt19937_64 rng(5);
  NoiseConfig noise;
  noise.per_bus = false;
  const Scenario s = sample_scenario(flat_profile(1.0), 0, 10, 3, noise, rng);
  for (double m : s.load_scale) CHECK(m == s.load_scale.front());
  for (double m : s.gen_scale) CHECK(m == s.gen_scale.front());
}

TEST_CASE("scenario streams are random-access and seed-determined") {
  const ScenarioStream a(default_day_profile(), {}, 42, 33, 4);
  const ScenarioStream b(default_day_profile(), {}, 42, 33, 4);
  const ScenarioStream c(default_day_profile(), {}, 43, 33, 4);
  const Scenario late = a.at(9, 50);
  a.at(0, 0);
  CHECK(a.at(9, 50).load_scale == late.load_scale);
  CHECK(b.at(9, 50).load_scale == late.load_scale);
  CHECK(b.at(9, 50).gen_scale == late.gen_scale);
  CHECK(c.at(9, 50).load_scale != late.load_scale);
  CHECK(a.at(9, 51).load_scale != late.load_scale);
}

TEST_CASE("zero loads give a flat observation") {
  gridnet::NetworkCase c = gridnet::load_case(vvtest::case33_path());
  for (auto& b : c.buses) b.p_load_mw = b.q_load_mvar = 0.0;
  for (auto& d : c.devices) d.p_max_mw = 0.0;
  const VvcEnv env(c);
  Scenario s;
  s.load_scale.assign(c.num_buses(), 1.0);
  s.gen_scale.assign(c.num_devices(), 1.0);
  const Observation obs = env.observe(s, zeros(env.act_dim()));
  for (double v : obs.p) CHECK(v == doctest::Approx(0.0));
  for (double v : obs.q) CHECK(v == doctest::Approx(0.0));
  for (double v : obs.v) CHECK(v == doctest::Approx(1.0));
  for (double v : obs.q_g) CHECK(v == 0.0);
}

TEST_CASE("case33 observation has 103 entries") {
  const VvcEnv env = case33_env();
  CHECK(env.obs_dim() == 103);
  CHECK(env.act_dim() == 4);
  const ScenarioStream stream(default_day_profile(), {}, 1, env.num_buses(), env.num_devices());
  const Observation obs = env.observe(stream.at(0, 30), zeros(env.act_dim()));
  const auto x = env.normalize(obs);
  CHECK(x.size() == 103);
  for (double v : x) CHECK(std::isfinite(v));
}

TEST_CASE("sub-area view slices four buses and the local device") {
  const VvcEnv env = case33_env();
  const auto views = make_agent_views(env.network(), env.network().subareas);
  REQUIRE(views.size() == 4);
  const AgentView& v = views[1];
  CHECK(v.bus_ids == std::vector<int>{19, 20, 21, 22});
  REQUIRE(v.devices.size() == 1);
  CHECK(env.network().devices[v.devices[0]].bus == 22);
  const auto rows = env.observation_rows(v);
  CHECK(rows.size() == 3 * 4 + 1);
  // P, Q and V blocks of bus 19 (index 18), then the device entry
  CHECK(rows[0] == 18);
  CHECK(rows[4] == 33 + 18);
  CHECK(rows[8] == 66 + 18);
  CHECK(rows.back() == 99 + v.devices[0]);

  std::set<std::size_t> seen;
  for (const auto& view : views) {
    for (std::size_t d : view.devices) CHECK(seen.insert(d).second);
  }
  CHECK(seen.size() == env.num_devices());

  const AgentView g = global_view(env.network());
  CHECK(env.observation_rows(g).size() == env.obs_dim());
  CHECK_THROWS_AS(make_agent_views(env.network(), {{1, 2, 3}}), ContractViolation);
}

TEST_CASE("voltage violation examples") {
  const VoltageLimits lim{};
  std::vector<double> v(33, 1.0);
  CHECK(voltage_violation(v, lim) == 0.0);
  v[4] = 1.06;
  CHECK(voltage_violation(v, lim) == doctest::Approx(0.01).epsilon(1e-12));
  v[7] = 0.94;
  v[4] = 1.07;
  CHECK(voltage_violation(v, lim) == doctest::Approx(0.03).epsilon(1e-12));
  v.assign(33, 0.95);
  v[3] = 1.05;
  CHECK(voltage_violation(v, lim) == 0.0);

  const VvcEnv env = case33_env();
  gridnet::PowerFlowSolution sol;
  sol.v.assign(33, 1.0);
  sol.v[12] = 1.06;
  sol.total_loss_mw = 0.2;
  const RewardPair r = env.reward(sol, lim);
  CHECK(r.r_v == doctest::Approx(-0.01).epsilon(1e-12));
  CHECK(r.r_p == -0.2);
}

TEST_CASE("reward depends only on scenario and action") {
  const VvcEnv env = case33_env();
  const ScenarioStream stream(default_day_profile(), {}, 9, env.num_buses(), env.num_devices());
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Scenario s = stream.at(0, 5 * t % kStepsPerDay);
    std::vector<double> a(env.act_dim());
    for (auto& x : a) x = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const auto q = env.denormalize_action(a);
    const StepOutcome first = env.apply_action(s, q);
    const StepOutcome again = env.apply_action(s, q);
    CHECK(first.reward.r_p == again.reward.r_p);
    CHECK(first.reward.r_v == again.reward.r_v);
    CHECK(first.reward.r_p == -first.solution.total_loss_mw);
    CHECK((first.reward.r_v == 0.0) ==
          std::all_of(first.solution.v.begin(), first.solution.v.end(),
                      [](double v) { return v >= 0.95 && v <= 1.05; }));
    CHECK(first.reward.r_p <= 0.0);
    CHECK(first.reward.r_v <= 0.0);
  }
}

TEST_CASE("actions map linearly onto device bounds") {
  const VvcEnv env = case33_env();
  const auto lo = env.denormalize_action(std::vector<double>(4, -1.0));
  const auto hi = env.denormalize_action(std::vector<double>(4, 1.0));
  const auto mid = env.denormalize_action(std::vector<double>(4, 0.0));
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(lo[k] == doctest::Approx(env.bounds()[k].low));
    CHECK(hi[k] == doctest::Approx(env.bounds()[k].high));
    CHECK(mid[k] == doctest::Approx(0.5 * (env.bounds()[k].low + env.bounds()[k].high)));
  }
  const std::vector<double> a{0.3, -0.7, 0.1, 0.9};
  const auto back = env.normalize_action(env.denormalize_action(a));
  for (std::size_t k = 0; k < 4; ++k) CHECK(back[k] == doctest::Approx(a[k]));

  const ScenarioStream stream(default_day_profile(), {}, 9, env.num_buses(), env.num_devices());
  std::vector<double> q(4, 0.0);
  q[0] = env.bounds()[0].high + 0.1;
  CHECK_THROWS_AS(env.apply_action(stream.at(0, 0), q), ContractViolation);
}

TEST_CASE("voltage margin tightens only the training reward") {
  gridnet::NetworkCase c = gridnet::load_case(vvtest::case33_path());
  EnvConfig cfg;
  cfg.voltage_margin = 0.01;
  const VvcEnv env(c, cfg);
  const ScenarioStream stream(flat_profile(1.0), {0.0, true, true}, 1, env.num_buses(), env.num_devices());
  const StepOutcome out = env.apply_action(stream.at(0, 0), zeros(4));
  CHECK(out.reward.r_v < out.reported.r_v);
  CHECK(out.reported.r_v == doctest::Approx(-voltage_violation(out.solution.v, VoltageLimits{})));
}

TEST_CASE("daily evaluation") {
  SUBCASE("same seed and policy give the same totals") {
    const VvcEnv env = case33_env();
    const ScenarioStream stream(default_day_profile(), {}, 17, env.num_buses(), env.num_devices());
    const Policy half = [&](const Observation&, const Scenario&) {
      return env.denormalize_action(std::vector<double>(env.act_dim(), 0.5));
    };
    const DailyTotals a = evaluate_day(env, half, stream, 3);
    const DailyTotals b = evaluate_day(env, half, stream, 3);
    CHECK(a.reward == b.reward);
    CHECK(a.loss_mw == b.loss_mw);
    CHECK(a.vvr == b.vvr);
    CHECK(a.loss_mw > 0.0);
    CHECK(a.reward == doctest::Approx(-a.loss_mw - env.config().c_v * a.vvr));
  }
  SUBCASE("zero-load day loses nothing") {
    gridnet::NetworkCase c = gridnet::load_case(vvtest::case33_path());
    for (auto& b : c.buses) b.p_load_mw = b.q_load_mvar = 0.0;
    for (auto& d : c.devices) d.p_max_mw = 0.0;
    const VvcEnv env(c);
    const ScenarioStream stream(default_day_profile(), {}, 17, env.num_buses(), env.num_devices());
    const Policy idle = [&](const Observation&, const Scenario&) { return zeros(env.act_dim()); };
    const DailyTotals d = evaluate_day(env, idle, stream, 0);
    CHECK(d.loss_mw == doctest::Approx(0.0));
    CHECK(d.vvr == 0.0);
  }
}
