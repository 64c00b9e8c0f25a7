#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "vvclab/error.hpp"
#include "vvclab/harness.hpp"
#include "process.hpp"

using namespace vvclab;
namespace fs = std::filesystem;

namespace {

void print_totals(const std::vector<env::DailyTotals>& days) {
  std::printf("day,reward,loss_mw,vvr\n");
  double reward = 0.0, vvr = 0.0;
  for (std::size_t d = 0; d < days.size(); ++d) {
    std::printf("%zu,%.12g,%.12g,%.12g\n", d, days[d].reward, days[d].loss_mw, days[d].vvr);
    reward += days[d].reward;
    vvr += days[d].vvr;
  }
  if (!days.empty()) {
    const double n = static_cast<double>(days.size());
    std::fprintf(stderr, "mean daily reward %.6g, mean daily vvr %.6g\n", reward / n, vvr / n);
  }
}

/// Seed directories of an experiment directory, or the path itself.
std::vector<fs::path> expand_runs(const fs::path& p, std::optional<fs::path>& mbo_csv) {
  if (!fs::is_directory(p) || fs::exists(p / "metrics.csv")) return {p};
  std::vector<fs::path> seeds;
  for (const auto& e : fs::directory_iterator(p)) {
    if (e.is_directory() && e.path().filename().string().rfind("seed_", 0) == 0 && fs::exists(e.path() / "metrics.csv")) {
      seeds.push_back(e.path());
    }
  }
  std::sort(seeds.begin(), seeds.end());
  if (!mbo_csv && fs::exists(p / "mbo.csv")) mbo_csv = p / "mbo.csv";
  if (seeds.empty()) throw ParseError(p.string() + " holds no seed runs");
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  vvclab::tools::tune_allocator();
  CLI::App app{"Volt-Var control with one-step two-critic reinforcement learning"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train an algorithm over the configured seeds");
  std::string config_path, algo, case_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> days;
  train->add_option("--config", config_path, "Run configuration JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "Train this seed only");
  train->add_option("--algo", algo, "Override the algorithm");
  train->add_option("--case", case_path, "Override the case file");
  train->add_option("--days", days, "Override the number of training days");
  train->add_option("--out", out_dir, "Override the output directory");

  auto* mbo_cmd = app.add_subcommand("mbo", "Per-step model-based dispatch on the evaluation stream");
  std::string mbo_case;
  int mbo_days = 1;
  std::uint64_t mbo_seed = harness::RunConfig{}.eval_seed;
  mbo_cmd->add_option("--case", mbo_case, "Case file")->required()->check(CLI::ExistingFile);
  mbo_cmd->add_option("--days", mbo_days, "Days to dispatch")->check(CLI::PositiveNumber);
  mbo_cmd->add_option("--seed", mbo_seed, "Scenario stream seed");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the held-out test days");
  std::string checkpoint;
  int eval_days = -1;
  eval->add_option("--checkpoint", checkpoint, "checkpoint.json written by train")->required()->check(CLI::ExistingFile);
  eval->add_option("--days", eval_days, "Test days (default: as configured)");

  auto* plot = app.add_subcommand("plot", "Learning curves and reward-error tables");
  std::vector<std::string> runs;
  std::string plot_out = "plots", mbo_csv;
  harness::PlotOptions plot_opts;
  plot->add_option("--runs", runs, "Seed directories, experiment directories or metrics.csv files")->required();
  plot->add_option("--out", plot_out, "Output directory");
  plot->add_option("--mbo", mbo_csv, "MBO daily totals CSV");
  plot->add_option("--window", plot_opts.final_window, "Final averaging window (days)");
  plot->add_flag("--svg", plot_opts.svg, "Also render curve.svg");

  auto* vcase = app.add_subcommand("validate-case", "Parse and check a case file");
  std::string vcase_path;
  vcase->add_option("path", vcase_path, "Case file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      harness::RunConfig c = harness::load_run_config(config_path);
      if (seed) c.seeds = {*seed};
      if (!algo.empty()) c.algo.algo = drl::parse_algo(algo);
      if (!case_path.empty()) c.case_path = case_path;
      if (days) c.days = *days;
      if (!out_dir.empty()) c.out_dir = out_dir;
      harness::validate(c);
      const harness::RunResult r = harness::run_experiment(c);
      int failed = 0;
      for (const auto& s : r.seeds) {
        if (s.ok) {
          std::printf("seed %llu: final reward %.6g, final vvr %.6g, test vvr %.6g\n",
                      static_cast<unsigned long long>(s.seed), s.final_reward, s.final_vvr, s.test_vvr_mean);
        } else {
          ++failed;
          std::printf("seed %llu: FAILED after %d days: %s\n", static_cast<unsigned long long>(s.seed),
                      s.days_completed, s.error.c_str());
        }
      }
      if (c.compute_mbo && r.mbo_final_reward != 0.0 && !r.final_rewards().empty()) {
        std::printf("MBO final reward %.6g, accuracy %.4g%%\n", r.mbo_final_reward,
                    100.0 * harness::compute_accuracy(r.mean_final_reward(), r.mbo_final_reward));
      }
      std::printf("results in %s\n", r.dir.string().c_str());
      return failed == 0 ? 0 : 1;
    }
    if (*mbo_cmd) {
      const env::VvcEnv e(gridnet::load_case(mbo_case));
      const env::ScenarioStream stream(env::default_day_profile(), {}, mbo_seed, e.num_buses(), e.num_devices());
      std::printf("step");
      for (const auto& d : e.network().devices) std::printf(",q_bus%d", d.bus);
      std::printf(",loss_mw,vvr\n");
      for (int day = 0; day < mbo_days; ++day) {
        for (int k = 0; k < env::kStepsPerDay; ++k) {
          const mbo::OracleResult r = mbo::optimize_step(e, stream.at(day, k));
          std::printf("%d", day * env::kStepsPerDay + k);
          for (double q : r.action) std::printf(",%.12g", q);
          std::printf(",%.12g,%.12g\n", r.loss_mw, r.vvr);
        }
      }
      return 0;
    }
    if (*eval) {
      print_totals(harness::evaluate_checkpoint(checkpoint, eval_days));
      return 0;
    }
    if (*plot) {
      if (!mbo_csv.empty()) plot_opts.mbo_csv = fs::path(mbo_csv);
      std::vector<fs::path> files;
      for (const auto& r : runs) {
        for (auto& p : expand_runs(r, plot_opts.mbo_csv)) files.push_back(std::move(p));
      }
      harness::emit_plots(files, plot_out, plot_opts);
      std::printf("wrote %s\n", plot_out.c_str());
      return 0;
    }
    if (*vcase) {
      const gridnet::NetworkCase c = gridnet::load_case(vcase_path);
      const std::string sum = gridnet::compute_checksum(c);
      std::printf("%s: %zu buses, %zu lines, %zu devices, %zu subareas, checksum %s%s\n", c.name.c_str(),
                  c.num_buses(), c.lines.size(), c.num_devices(), c.subareas.size(), sum.c_str(),
                  c.checksum.empty() ? "" : (c.checksum == sum ? " (matches)" : " (MISMATCH)"));
      return c.checksum.empty() || c.checksum == sum ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
