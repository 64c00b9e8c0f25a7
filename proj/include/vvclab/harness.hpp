#pragma once

// Experiment orchestration: run configuration, per-seed training with a
// held-out evaluation stream, metrics files, the MBO reference and the
// figure-data tables.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vvclab/drl/algo.hpp"
#include "vvclab/env.hpp"
#include "vvclab/mbo.hpp"

namespace vvclab::harness {

inline constexpr const char* kMetricsHeader =
    "step,day,daily_reward,daily_loss_mw,daily_vvr,loss_qp,loss_qv,alpha,wall_time_s";
/// `step` field of the end-of-day row in metrics.csv.
inline constexpr const char* kSummaryStep = "total";

/// How multi-agent algorithms split the feeder.
enum class Partition { Subareas, Local, Global };

struct RunConfig {
  std::filesystem::path case_path;
  std::optional<std::filesystem::path> profile_path;  // default curve when unset
  drl::AlgoConfig algo;
  int days = 100;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  /// 1: test the current policy on the held-out scenario of every training
  /// step. A multiple of 96: test a frozen policy on a whole held-out day at
  /// the end of every days-th day.
  int eval_cadence = 1;
  std::uint64_t eval_seed = 910001;
  /// Post-training test on days drawn from a third stream.
  std::uint64_t test_seed = 920001;
  int test_days = 10;
  int final_window = 10;
  env::NoiseConfig noise;
  double voltage_margin = 0.0;
  Partition partition = Partition::Subareas;
  bool compute_mbo = true;
  mbo::OracleOptions mbo;
  /// Off by default so that metrics.csv is byte-reproducible.
  bool record_wall_time = false;
  std::filesystem::path out_dir = "runs";
  /// Run directory name under out_dir; the algorithm name when empty.
  std::string name;
};

nlohmann::json to_json(const RunConfig& c);
/// Fields absent from `doc` keep their defaults; relative case and profile
/// paths resolve against `base_dir`. Throws ParseError.
RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
void validate(const RunConfig& c);

env::DayProfile resolve_profile(const RunConfig& c);
env::EnvConfig env_config(const RunConfig& c);
std::vector<env::AgentView> agent_views(const RunConfig& c, const gridnet::NetworkCase& network);

/// Signed relative gap (R_i - R_MBO) / R_MBO. Throws ContractViolation when
/// mbo_reward is zero.
double compute_accuracy(double algo_reward, double mbo_reward);

/// One end-of-day row of metrics.csv.
struct DayRecord {
  int day = 0;
  double reward = 0.0;
  double loss_mw = 0.0;
  double vvr = 0.0;
  double loss_qp = 0.0;
  double loss_qv = 0.0;
  double alpha = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  bool ok = false;
  std::string error;
  int days_completed = 0;
  std::vector<DayRecord> days;
  /// Means over the last final_window completed days.
  double final_reward = 0.0;
  double final_loss_mw = 0.0;
  double final_vvr = 0.0;
  /// Frozen final policy on the held-out test days.
  std::vector<env::DailyTotals> test;
  double test_vvr_mean = 0.0;
  double test_reward_mean = 0.0;
};

struct RunResult {
  std::filesystem::path dir;
  std::vector<SeedResult> seeds;
  /// MBO on the evaluation days; empty unless compute_mbo.
  std::vector<env::DailyTotals> mbo;
  double mbo_final_reward = 0.0;

  std::vector<double> final_rewards() const;
  double mean_final_reward() const;
};

/// Daily MBO totals on days [0, days) of `stream`.
std::vector<env::DailyTotals> mbo_reference(const env::VvcEnv& env, const env::ScenarioStream& stream, int days,
                                            const mbo::OracleOptions& options = {});

/// Trains every seed and writes
///   out_dir/<name>/seed_<n>/{metrics.csv, test.csv, checkpoint.json, config.json, status.json}
///   out_dir/<name>/summary.json
/// A seed that fails is recorded as failed and the remaining seeds still run.
/// The MBO reference is cached under out_dir and shared by runs that face the
/// same evaluation days.
RunResult run_experiment(const RunConfig& config);

/// Trains one seed into `dir`.
SeedResult run_seed(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& dir);

/// Evaluates a frozen agent checkpoint written by run_seed on the test days.
std::vector<env::DailyTotals> evaluate_checkpoint(const std::filesystem::path& checkpoint, int days = -1);

/// End-of-day rows of a metrics.csv file. Throws ParseError.
std::vector<DayRecord> read_day_records(const std::filesystem::path& metrics_csv);
std::vector<env::DailyTotals> read_daily_totals(const std::filesystem::path& csv);
void write_daily_totals(const std::filesystem::path& csv, const std::vector<env::DailyTotals>& days);

struct PlotOptions {
  std::optional<std::filesystem::path> mbo_csv;
  int final_window = 10;
  bool svg = false;
  std::string label = "reward";
};

struct CurvePoint {
  int day = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Mean and range of the daily reward across runs. Throws AlignmentError
/// when the runs cover different days.
std::vector<CurvePoint> learning_curve(const std::vector<std::vector<DayRecord>>& runs);

/// Writes curve.csv, and with an MBO file reward_error.csv (MBO reward minus
/// the algorithm's, per day, plus the final-window mean). With `svg` also
/// curve.svg. `runs` are seed directories or metrics.csv files.
void emit_plots(const std::vector<std::filesystem::path>& runs, const std::filesystem::path& out,
                const PlotOptions& options = {});

}  // namespace vvclab::harness
