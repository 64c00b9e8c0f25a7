#include <doctest.h>

#include <cmath>
#include <limits>

#include "support.hpp"
#include "vvclab/env.hpp"
#include "vvclab/error.hpp"
#include "vvclab/mbo.hpp"

using namespace vvclab;

namespace {

env::Scenario nominal(const env::VvcEnv& e) {
  env::Scenario s;
  s.load_scale.assign(e.num_buses(), 1.0);
  s.gen_scale.assign(e.num_devices(), 1.0);
  return s;
}

double penalized(const env::VvcEnv& e, const env::Scenario& s, const std::vector<double>& q) {
  const auto sol = e.solve(s, q);
  return sol.total_loss_mw + 10.0 * e.config().c_v * env::voltage_violation(sol.v, e.config().limits);
}

struct GridBest {
  std::vector<double> q;
  double value = std::numeric_limits<double>::infinity();
};

/// Exhaustive search over a box at a fixed resolution; one or two devices.
GridBest grid_search(const env::VvcEnv& e, const env::Scenario& s, const std::vector<gridnet::Bound>& box,
                     double step) {
  GridBest best;
  const std::size_t m = box.size();
  std::vector<long> count(m);
  for (std::size_t k = 0; k < m; ++k) count[k] = std::lround((box[k].high - box[k].low) / step) + 1;
  const long total = m == 1 ? count[0] : count[0] * count[1];
  for (long idx = 0; idx < total; ++idx) {
    std::vector<double> q(m);
    q[0] = std::min(box[0].low + step * static_cast<double>(idx % count[0]), box[0].high);
    if (m == 2) q[1] = std::min(box[1].low + step * static_cast<double>(idx / count[0]), box[1].high);
    const double v = penalized(e, s, q);
    if (v < best.value) {
      best.value = v;
      best.q = q;
    }
  }
  return best;
}

/// Coarse grid at `step`, then a grid a hundred times finer around the winner.
GridBest refined_grid(const env::VvcEnv& e, const env::Scenario& s, double step) {
  const GridBest coarse = grid_search(e, s, e.bounds(), step);
  std::vector<gridnet::Bound> box;
  for (std::size_t k = 0; k < coarse.q.size(); ++k) {
    box.push_back({std::max(coarse.q[k] - step, e.bounds()[k].low), std::min(coarse.q[k] + step, e.bounds()[k].high)});
  }
  return grid_search(e, s, box, step / 100.0);
}

}  // namespace

TEST_CASE("two-bus oracle compensates the local reactive load") {
  gridnet::NetworkCase c = vvtest::two_bus(0.05, 0.05, 0.5, 0.5);
  c.devices = {vvtest::ib_er(2, 2.0, 0.0)};
  const env::VvcEnv e(c);
  const env::Scenario s = nominal(e);
  const mbo::OracleResult r = mbo::optimize_step(e, s);
  REQUIRE(r.action.size() == 1);

  // 201-point grid over [-2, 2]
  const GridBest grid = grid_search(e, s, e.bounds(), 0.02);
  CHECK(std::abs(r.action[0] - grid.q[0]) <= 0.02);
  CHECK(r.action[0] == doctest::Approx(0.5).epsilon(0.05));
  CHECK(r.vvr == 0.0);
  CHECK(r.loss_mw <= e.solve(s, grid.q).total_loss_mw + 1e-9);
  CHECK(r.evaluations > 0);
}

TEST_CASE("zero-load scenario needs no dispatch") {
  gridnet::NetworkCase c = gridnet::load_case(vvtest::case33_path());
  for (auto& b : c.buses) b.p_load_mw = b.q_load_mvar = 0.0;
  for (auto& d : c.devices) d.p_max_mw = 0.0;
  const env::VvcEnv e(c);
  const mbo::OracleResult r = mbo::optimize_step(e, nominal(e));
  for (double q : r.action) CHECK(q == 0.0);
  CHECK(r.loss_mw == doctest::Approx(0.0));
  CHECK(r.vvr == 0.0);
}

TEST_CASE("oracle is never worse than zero dispatch") {
  for (const auto& path : {vvtest::case33_path(), vvtest::case69_path()}) {
    CAPTURE(path.string());
    const env::VvcEnv e(gridnet::load_case(path));
    const env::ScenarioStream stream(env::default_day_profile(), {}, 5, e.num_buses(), e.num_devices());
    for (int step = 0; step < env::kStepsPerDay; step += 19) {
      const env::Scenario s = stream.at(0, step);
      const std::vector<double> zero(e.act_dim(), 0.0);
      const auto z = e.apply_action(s, zero);
      const double zero_value = z.solution.total_loss_mw - e.config().c_v * z.reported.r_v;
      const mbo::OracleReport rep = mbo::optimize_step_report(e, s);
      CHECK(rep.chosen.objective <= zero_value + 1e-12);
      CHECK(rep.penalized.loss_mw >= 0.0);
      CHECK(rep.chosen.objective <= rep.penalized.objective);
      CHECK(rep.chosen.objective <= rep.restored.objective);
      for (std::size_t k = 0; k < e.act_dim(); ++k) {
        CHECK(rep.chosen.action[k] >= e.bounds()[k].low);
        CHECK(rep.chosen.action[k] <= e.bounds()[k].high);
      }
    }
  }
}

TEST_CASE("case33 nominal scenario beats zero-action loss") {
  const env::VvcEnv e(gridnet::load_case(vvtest::case33_path()));
  const env::Scenario s = nominal(e);
  const mbo::OracleResult r = mbo::optimize_step(e, s);
  const double zero_loss = e.solve(s, std::vector<double>(4, 0.0)).total_loss_mw;
  CHECK(r.loss_mw <= zero_loss);
  CHECK(r.loss_mw < 0.8 * zero_loss);
}

TEST_CASE("oracle agrees with exhaustive grid search on toy feeders") {
  SUBCASE("one device") {
    gridnet::NetworkCase c = vvtest::two_bus(0.04, 0.08, 0.6, 0.35);
    c.devices = {vvtest::svc(2, -1.0, 1.0)};
    const env::VvcEnv e(c);
    const env::Scenario s = nominal(e);
    const GridBest grid = refined_grid(e, s, 0.01);
    const mbo::OracleResult r = mbo::optimize_step(e, s);
    CHECK(std::abs(r.action[0] - grid.q[0]) < 1e-3);
  }
  SUBCASE("one device against a binding limit") {
    gridnet::NetworkCase c = vvtest::two_bus(0.04, 0.08, 0.6, 0.35);
    c.devices = {vvtest::svc(2, -0.2, 0.2)};
    const env::VvcEnv e(c);
    const env::Scenario s = nominal(e);
    const GridBest grid = refined_grid(e, s, 0.01);
    const mbo::OracleResult r = mbo::optimize_step(e, s);
    CHECK(std::abs(r.action[0] - grid.q[0]) < 1e-3);
    CHECK(r.action[0] == doctest::Approx(0.2));
  }
  SUBCASE("two devices") {
    const env::VvcEnv e(vvtest::three_bus_two_svc());
    const env::Scenario s = nominal(e);
    const GridBest grid = refined_grid(e, s, 0.01);
    const mbo::OracleResult r = mbo::optimize_step(e, s);
    CHECK(std::abs(r.action[0] - grid.q[0]) < 1e-3);
    CHECK(std::abs(r.action[1] - grid.q[1]) < 1e-3);
  }
  SUBCASE("two devices with an IB-ER") {
    gridnet::NetworkCase c = vvtest::three_bus_two_svc();
    c.devices = {vvtest::ib_er(2, 0.5, 0.3), vvtest::svc(3, -0.5, 0.5)};
    const env::VvcEnv e(c);
    const env::Scenario s = nominal(e);
    const GridBest grid = refined_grid(e, s, 0.01);
    const mbo::OracleResult r = mbo::optimize_step(e, s);
    CHECK(std::abs(r.action[0] - grid.q[0]) < 1e-3);
    CHECK(std::abs(r.action[1] - grid.q[1]) < 1e-3);
  }
}

TEST_CASE("oracle reports both the penalized and the restored solution") {
  // heavy loading with a weak feeder: the penalized search trades violation for loss
  gridnet::NetworkCase c = vvtest::two_bus(0.08, 0.1, 0.9, 0.2);
  c.devices = {vvtest::svc(2, -0.3, 0.3)};
  const env::VvcEnv e(c);
  const mbo::OracleReport rep = mbo::optimize_step_report(e, nominal(e));
  CHECK(rep.restored.vvr <= rep.penalized.vvr);
  CHECK(rep.chosen.objective == doctest::Approx(rep.chosen.loss_mw + e.config().c_v * rep.chosen.vvr));
}

TEST_CASE("oracle fails loudly when every power flow diverges") {
  gridnet::NetworkCase c = vvtest::two_bus(0.05, 0.05, 20.0, 20.0);
  c.devices = {vvtest::svc(2, -0.1, 0.1)};
  const env::VvcEnv e(c);
  CHECK_THROWS_AS(mbo::optimize_step(e, nominal(e)), OracleError);
}
