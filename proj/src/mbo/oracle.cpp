#include "vvclab/mbo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vvclab/error.hpp"

namespace vvclab::mbo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Search {
 public:
  Search(const env::VvcEnv& env, const env::Scenario& scenario, double penalty, int budget)
      : env_(env), scenario_(scenario), penalty_(penalty), budget_(budget) {}

  double value(const std::vector<double>& q) {
    if (evaluations_ >= budget_) return kInf;
    ++evaluations_;
    try {
      const auto sol = env_.solve(scenario_, q);
      const double vvr = env::voltage_violation(sol.v, env_.config().limits);
      return sol.total_loss_mw + penalty_ * vvr;
    } catch (const DivergedError&) {
      return kInf;
    }
  }

  std::vector<double> clamp(std::vector<double> q) const {
    const auto& b = env_.bounds();
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = std::clamp(q[k], b[k].low, b[k].high);
    return q;
  }

  /// Compass search: coordinate directions, then pairwise diagonals when no
  /// coordinate move improves; the step halves after a failed poll.
  void pattern(std::vector<double>& x, double& fx, const OracleOptions& opt) {
    const auto& b = env_.bounds();
    const std::size_t m = x.size();
    std::vector<double> step(m);
    for (std::size_t k = 0; k < m; ++k) step[k] = opt.initial_step * (b[k].high - b[k].low);
    auto try_move = [&](const std::vector<double>& dir, std::vector<double>& best, double& fbest) {
      std::vector<double> c(m);
      for (std::size_t k = 0; k < m; ++k) c[k] = x[k] + dir[k] * step[k];
      c = clamp(c);
      if (c == x) return;
      const double fc = value(c);
      if (fc < fbest) {
        fbest = fc;
        best = c;
      }
    };
    while (*std::max_element(step.begin(), step.end()) > opt.tol && evaluations_ < budget_) {
      std::vector<double> best = x;
      double fbest = fx;
      std::vector<double> dir(m, 0.0);
      for (std::size_t k = 0; k < m; ++k) {
        for (double sgn : {1.0, -1.0}) {
          dir[k] = sgn;
          try_move(dir, best, fbest);
          dir[k] = 0.0;
        }
      }
      if (!(fbest < fx)) {
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = i + 1; j < m; ++j) {
            for (double si : {1.0, -1.0}) {
              for (double sj : {1.0, -1.0}) {
                dir[i] = si;
                dir[j] = sj;
                try_move(dir, best, fbest);
                dir[i] = dir[j] = 0.0;
              }
            }
          }
        }
      }
      if (fbest < fx) {
        x = best;
        fx = fbest;
      } else {
        for (auto& s : step) s *= 0.5;
      }
    }
  }

  /// Projected finite-difference gradient steps with backtracking; only
  /// improvements are kept.
  void polish(std::vector<double>& x, double& fx, int iterations) {
    const std::size_t m = x.size();
    const auto& b = env_.bounds();
    const double h = 1e-6;
    for (int it = 0; it < iterations && evaluations_ < budget_; ++it) {
      std::vector<double> g(m, 0.0);
      for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> up = x, dn = x;
        up[k] = std::min(x[k] + h, b[k].high);
        dn[k] = std::max(x[k] - h, b[k].low);
        if (up[k] == dn[k]) continue;
        const double fu = value(up);
        const double fd = value(dn);
        if (!std::isfinite(fu) || !std::isfinite(fd)) return;
        g[k] = (fu - fd) / (up[k] - dn[k]);
      }
      double gnorm = 0.0;
      for (double v : g) gnorm += v * v;
      gnorm = std::sqrt(gnorm);
      if (gnorm < 1e-12) return;
      double t = 0.1 / gnorm;
      bool moved = false;
      for (int ls = 0; ls < 30 && evaluations_ < budget_; ++ls, t *= 0.5) {
        std::vector<double> c(m);
        for (std::size_t k = 0; k < m; ++k) c[k] = x[k] - t * g[k];
        c = clamp(c);
        const double fc = value(c);
        if (fc < fx) {
          x = c;
          fx = fc;
          moved = true;
          break;
        }
      }
      if (!moved) return;
    }
  }

  int evaluations() const { return evaluations_; }

 private:
  const env::VvcEnv& env_;
  const env::Scenario& scenario_;
  double penalty_;
  int budget_;
  int evaluations_ = 0;
};

OracleResult score(const env::VvcEnv& env, const env::Scenario& scenario, std::vector<double> q,
                   int evaluations) {
  OracleResult r;
  const auto sol = env.solve(scenario, q);
  r.action = std::move(q);
  r.loss_mw = sol.total_loss_mw;
  r.vvr = env::voltage_violation(sol.v, env.config().limits);
  r.objective = r.loss_mw + env.config().c_v * r.vvr;
  r.evaluations = evaluations + 1;
  return r;
}

OracleResult run(const env::VvcEnv& env, const env::Scenario& scenario, std::vector<double> x,
                 double penalty, const OracleOptions& options) {
  Search search(env, scenario, penalty, options.max_evaluations);
  x = search.clamp(std::move(x));
  double fx = search.value(x);
  if (!std::isfinite(fx)) {
    // incumbent diverged: probe the box centre and corners for a converging start
    const auto& b = env.bounds();
    const std::size_t m = x.size();
    const std::size_t corners = m < 16 ? (std::size_t{1} << m) : 0;
    for (std::size_t mask = 0; mask <= corners && !std::isfinite(fx); ++mask) {
      std::vector<double> c(m);
      for (std::size_t k = 0; k < m; ++k) {
        c[k] = mask == 0 ? 0.5 * (b[k].low + b[k].high) : ((mask - 1) >> k & 1 ? b[k].high : b[k].low);
      }
      const double fc = search.value(c);
      if (std::isfinite(fc)) {
        x = c;
        fx = fc;
      }
    }
    if (!std::isfinite(fx)) throw OracleError("every candidate dispatch made the power flow diverge");
  }
  search.pattern(x, fx, options);
  search.polish(x, fx, options.polish_iterations);
  return score(env, scenario, std::move(x), search.evaluations());
}

}  // namespace

OracleReport optimize_step_report(const env::VvcEnv& env, const env::Scenario& scenario,
                                  const OracleOptions& options) {
  const double penalty = options.penalty > 0.0 ? options.penalty : 10.0 * env.config().c_v;
  OracleReport report;
  report.penalized = run(env, scenario, std::vector<double>(env.act_dim(), 0.0), penalty, options);
  report.restored = report.penalized;
  if (options.restore_feasibility && report.penalized.vvr > 0.0) {
    OracleOptions fine = options;
    fine.initial_step = 0.02;
    OracleResult r = run(env, scenario, report.penalized.action, 1e3 * penalty, fine);
    r.evaluations += report.penalized.evaluations;
    if (r.vvr < report.penalized.vvr) report.restored = std::move(r);
  }
  report.chosen = report.restored.objective < report.penalized.objective ? report.restored : report.penalized;
  // the search penalty differs from c_v, so the start dispatch stays a candidate
  try {
    OracleResult start = score(env, scenario, std::vector<double>(env.act_dim(), 0.0), 0);
    if (start.objective < report.chosen.objective) {
      start.evaluations = report.chosen.evaluations + 1;
      report.chosen = std::move(start);
    }
  } catch (const DivergedError&) {
  }
  return report;
}

OracleResult optimize_step(const env::VvcEnv& env, const env::Scenario& scenario, const OracleOptions& options) {
  return optimize_step_report(env, scenario, options).chosen;
}

env::Policy oracle_policy(const env::VvcEnv& env, const OracleOptions& options) {
  return [&env, options](const env::Observation&, const env::Scenario& s) {
    return optimize_step(env, s, options).action;
  };
}

}  // namespace vvclab::mbo
