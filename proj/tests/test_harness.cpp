#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "support.hpp"
#include "vvclab/error.hpp"
#include "vvclab/harness.hpp"

using namespace vvclab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vvclab_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

harness::RunConfig small_config(const fs::path& out) {
  harness::RunConfig c;
  c.case_path = vvtest::case33_path();
  c.days = 1;
  c.seeds = {7};
  c.test_days = 1;
  c.compute_mbo = false;
  c.out_dir = out;
  c.algo.hidden = {16, 16};
  c.algo.initial_random_steps = 40;
  c.algo.update_after = 32;
  c.algo.batch_size = 16;
  c.algo.updates_per_step = 1;
  return c;
}

void write_metrics(const fs::path& dir, const std::vector<double>& rewards) {
  fs::create_directories(dir);
  std::ofstream out(dir / "metrics.csv");
  out << harness::kMetricsHeader << '\n';
  for (std::size_t d = 0; d < rewards.size(); ++d) {
    out << d * 96 + 95 << ',' << d << ',' << rewards[d] << ",1,0,0,0,0,0\n";
    out << "total," << d << ',' << rewards[d] << ",1,0,0.5,0.25,0,0\n";
  }
}

}  // namespace

TEST_CASE("run config round-trips through JSON") {
  harness::RunConfig c;
  c.case_path = "/data/case69.json";
  c.profile_path = "/data/profile.json";
  c.algo.algo = drl::Algo::MaOstcSac;
  c.algo.hidden = {64, 32};
  c.algo.c_v = 20.0;
  c.days = 7;
  c.seeds = {4, 5};
  c.eval_cadence = 96;
  c.partition = harness::Partition::Local;
  c.voltage_margin = 0.005;
  c.noise.amplitude = 0.1;
  c.mbo.initial_step = 0.1;
  c.name = "x";
  const nlohmann::json doc = harness::to_json(c);
  const harness::RunConfig back = harness::run_config_from_json(doc);
  CHECK(harness::to_json(back) == doc);
  CHECK(back.algo.algo == drl::Algo::MaOstcSac);
  CHECK(back.algo.hidden == std::vector<int>{64, 32});
  CHECK(harness::env_config(back).c_v == 20.0);
}

TEST_CASE("run config resolves relative paths and rejects bad fields") {
  const nlohmann::json doc = {{"case", "case33.json"}, {"algo", "DDPG"}, {"hyperparameters", {{"gamma", 0.5}}}};
  const harness::RunConfig c = harness::run_config_from_json(doc, "/base");
  CHECK(c.case_path == fs::path("/base/case33.json"));
  CHECK(c.algo.algo == drl::Algo::Ddpg);
  CHECK(c.algo.gamma == 0.5);
  CHECK_THROWS_AS(harness::run_config_from_json({{"algo", "DDPG"}}), ParseError);
  CHECK_THROWS_AS(harness::run_config_from_json({{"case", "a"}, {"days", 0}}), ParseError);
  CHECK_THROWS_AS(harness::run_config_from_json({{"case", "a"}, {"seeds", nlohmann::json::array()}}), ParseError);
  CHECK_THROWS_AS(harness::run_config_from_json({{"case", "a"}, {"eval_cadence", 5}}), ParseError);
  CHECK_THROWS_AS(harness::run_config_from_json({{"case", "a"}, {"algo", "PPO"}}), ParseError);
}

TEST_CASE("accuracy is the signed relative gap to the oracle") {
  CHECK(harness::compute_accuracy(-4.199, -4.199) == 0.0);
  // the published percentage was computed from unrounded rewards
  CHECK(std::abs(harness::compute_accuracy(-4.270, -4.199) - 0.01694) < 1e-4);
  CHECK(harness::compute_accuracy(-4.898, -4.199) == doctest::Approx(0.16647).epsilon(1e-4));
  CHECK_THROWS_AS(harness::compute_accuracy(-1.0, 0.0), ContractViolation);
}

TEST_CASE("one-day run writes 96 step rows and a daily summary") {
  const fs::path out = scratch("one_day");
  const harness::RunResult r = harness::run_experiment(small_config(out));
  REQUIRE(r.seeds.size() == 1);
  REQUIRE(r.seeds[0].ok);
  const fs::path dir = r.seeds[0].dir;
  const auto rows = lines_of(dir / "metrics.csv");
  REQUIRE(rows.size() == 1 + 96 + 1);
  CHECK(rows[0] == harness::kMetricsHeader);
  CHECK(rows.back().rfind("total,0,", 0) == 0);
  for (const char* f : {"test.csv", "checkpoint.json", "config.json", "status.json"}) CHECK(fs::exists(dir / f));
  CHECK(fs::exists(r.dir / "summary.json"));

  const auto days = harness::read_day_records(dir / "metrics.csv");
  REQUIRE(days.size() == 1);
  CHECK(days[0].vvr >= 0.0);
  CHECK(days[0].loss_mw > 0.0);

  // the final per-step row carries the same cumulative test totals
  std::stringstream last(rows[96]);
  std::string step, day, reward;
  std::getline(last, step, ',');
  std::getline(last, day, ',');
  std::getline(last, reward, ',');
  CHECK(step == "95");
  CHECK(std::stod(reward) == doctest::Approx(days[0].reward).epsilon(1e-11));

  const auto test = harness::evaluate_checkpoint(dir / "checkpoint.json");
  REQUIRE(test.size() == 1);
  CHECK(test[0].reward == doctest::Approx(r.seeds[0].test[0].reward).epsilon(1e-9));
}

TEST_CASE("identical config and seed give byte-identical metrics") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  harness::RunConfig c = small_config(a);
  c.days = 2;
  const auto ra = harness::run_experiment(c);
  c.out_dir = b;
  const auto rb = harness::run_experiment(c);
  const std::string ma = slurp(ra.seeds[0].dir / "metrics.csv");
  CHECK(ma.size() > 1000);
  CHECK(ma == slurp(rb.seeds[0].dir / "metrics.csv"));
}

TEST_CASE("daily-cadence evaluation still writes one row per step") {
  const fs::path out = scratch("cadence");
  harness::RunConfig c = small_config(out);
  c.eval_cadence = 96;
  const auto r = harness::run_experiment(c);
  REQUIRE(r.seeds[0].ok);
  CHECK(lines_of(r.seeds[0].dir / "metrics.csv").size() == 98);
  CHECK(r.seeds[0].days[0].vvr >= 0.0);
}

TEST_CASE("a failing seed is recorded and the others still run") {
  const fs::path out = scratch("isolate");
  harness::RunConfig c = small_config(out);
  c.seeds = {1, 2};
  c.name = "iso";
  // a directory where the metrics file should go makes seed 2 fail
  fs::create_directories(out / "iso" / "seed_2" / "metrics.csv");
  const auto r = harness::run_experiment(c);
  REQUIRE(r.seeds.size() == 2);
  CHECK(r.seeds[0].ok);
  CHECK_FALSE(r.seeds[1].ok);
  CHECK_FALSE(r.seeds[1].error.empty());
  CHECK(r.final_rewards().size() == 1);
  const auto summary = nlohmann::json::parse(slurp(r.dir / "summary.json"));
  CHECK(summary["seeds"][1]["ok"] == false);
}

TEST_CASE("MBO reference is cached and reused as a prefix") {
  const fs::path out = scratch("mbo_cache");
  harness::RunConfig c = small_config(out);
  c.compute_mbo = true;
  c.mbo.initial_step = 0.1;
  c.mbo.max_evaluations = 200;
  const auto first = harness::run_experiment(c);
  REQUIRE(first.mbo.size() == 1);
  REQUIRE(fs::exists(out / "mbo_cache"));
  const auto entry = fs::directory_iterator(out / "mbo_cache")->path();
  // make the cache recognisable: a reused entry returns its stored value
  auto stored = harness::read_daily_totals(entry);
  stored[0].reward = -123.0;
  harness::write_daily_totals(entry, stored);
  const auto second = harness::run_experiment(c);
  CHECK(second.mbo[0].reward == -123.0);
  CHECK(first.mbo[0].vvr >= 0.0);
}

TEST_CASE("learning curve of one run equals its daily rewards") {
  const std::vector<harness::DayRecord> run = {{0, -5.0}, {1, -4.5}, {2, -4.25}};
  const auto curve = harness::learning_curve({run});
  REQUIRE(curve.size() == 3);
  for (std::size_t d = 0; d < 3; ++d) {
    CHECK(curve[d].mean == run[d].reward);
    CHECK(curve[d].min == run[d].reward);
    CHECK(curve[d].max == run[d].reward);
  }
}

TEST_CASE("plots average seeds and report the reward error against MBO") {
  const fs::path out = scratch("plots");
  write_metrics(out / "s1", {-6.0, -5.0});
  write_metrics(out / "s2", {-4.0, -4.5});
  write_metrics(out / "s3", {-5.0, -4.0});
  harness::write_daily_totals(out / "mbo.csv", {{-4.0, 4.0, 0.0}, {-4.1, 4.1, 0.0}});
  harness::PlotOptions opt;
  opt.mbo_csv = out / "mbo.csv";
  opt.final_window = 1;
  opt.svg = true;
  harness::emit_plots({out / "s1", out / "s2", out / "s3" / "metrics.csv"}, out / "fig", opt);
  const auto curve = lines_of(out / "fig" / "curve.csv");
  REQUIRE(curve.size() == 3);
  CHECK(curve[0] == "day,mean,min,max");
  CHECK(curve[1] == "0,-5,-6,-4");
  CHECK(curve[2] == "1,-4.5,-5,-4");
  const auto err = harness::read_day_records(out / "s1" / "metrics.csv");
  CHECK(err.size() == 2);
  const auto table = lines_of(out / "fig" / "reward_error.csv");
  REQUIRE(table.size() == 4);
  CHECK(table[1] == "0,1");
  CHECK(table[2] == "1,0.4");
  CHECK(table[3] == "final_mean,0.4");
  CHECK(fs::file_size(out / "fig" / "curve.svg") > 200);
}

TEST_CASE("runs of different lengths cannot be aggregated") {
  const std::vector<harness::DayRecord> a = {{0, -5.0}, {1, -4.0}};
  const std::vector<harness::DayRecord> b = {{0, -5.0}};
  CHECK_THROWS_AS(harness::learning_curve({a, b}), AlignmentError);
  const std::vector<harness::DayRecord> c = {{0, -5.0}, {2, -4.0}};
  CHECK_THROWS_AS(harness::learning_curve({a, c}), AlignmentError);
  const fs::path out = scratch("align");
  write_metrics(out / "s1", {-6.0, -5.0});
  write_metrics(out / "s2", {-4.0});
  CHECK_THROWS_AS(harness::emit_plots({out / "s1", out / "s2"}, out / "fig"), AlignmentError);
}

TEST_CASE("metrics reader rejects foreign files") {
  const fs::path out = scratch("reader");
  std::ofstream(out / "bad.csv") << "a,b,c\n";
  CHECK_THROWS_AS(harness::read_day_records(out / "bad.csv"), ParseError);
  CHECK_THROWS_AS(harness::read_day_records(out / "missing.csv"), ParseError);
}
