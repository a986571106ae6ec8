#pragma once

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cecran/report.hpp"

namespace cecran::detail {

template <class Vars>
struct StepOutcome {
  bool ok = false;
  Vars next;
  double residual = 0.0;  // original problem, at the raw solver point
  int newton = 0;
  std::string message;
};

inline void check_config(const AlgoConfig& c) {
  if (!(c.delta > 0.0)) throw std::invalid_argument("config: delta must be > 0");
  if (c.t_max < 1) throw std::invalid_argument("config: t_max must be >= 1");
  if (c.pinned_split && *c.pinned_split != 0.0 && *c.pinned_split != 1.0)
    throw std::invalid_argument("config: pinned split must be 0 or 1");
}

// Alternates aux updates and convex solves (inside step) until the latency
// change drops to delta or t_max solves have run.
template <class Vars, class Step, class Total>
SolveReport<Vars> run_alternating(Vars vars, double init_residual, const AlgoConfig& cfg, Step&& step,
                                  Total&& total) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport<Vars> rep;
  rep.history.push_back(total(vars).total);
  rep.residuals.push_back(init_residual);
  rep.status = RunStatus::max_iter;
  for (int t = 1; t <= cfg.t_max; ++t) {
    StepOutcome<Vars> o = step(vars);
    rep.newton_steps += o.newton;
    if (!o.ok) {
      rep.status = RunStatus::solver_failure;
      rep.message = o.message;
      break;
    }
    vars = std::move(o.next);
    rep.iterations = t;
    rep.history.push_back(total(vars).total);
    rep.residuals.push_back(o.residual);
    if (std::abs(rep.history[static_cast<std::size_t>(t)] - rep.history[static_cast<std::size_t>(t - 1)]) <=
        cfg.delta) {
      rep.status = RunStatus::converged;
      break;
    }
  }
  rep.vars = std::move(vars);
  rep.breakdown = total(rep.vars);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace cecran::detail
