#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cecran/convex.hpp"

namespace cecran {

/// Six latency components (seconds) of the bottleneck and the total tau_T.
struct LatencyBreakdown {
  double ul_edge = 0.0;
  double ul_fronthaul = 0.0;
  double exe_edge = 0.0;
  double exe_cloud = 0.0;
  double dl_fronthaul = 0.0;
  double dl_edge = 0.0;
  double total = 0.0;
};

enum class RunStatus { converged, max_iter, solver_failure };
const char* run_status_name(RunStatus s);

struct AlgoConfig {
  double delta = 1e-4;  // seconds
  int t_max = 30;
  // opt_tol is relative to the epigraph value in ms; a tight gap keeps the
  // latency history monotone well below the 1e-6 s slack.
  convex::SolverOptions solver{1e-7, 1e-9, 200};
  std::uint64_t seed = 1;  // random initial covariances
  // Pins every c_k to 0 (cloud only) or 1 (edge only).
  std::optional<double> pinned_split;
};

template <class Vars>
struct SolveReport {
  std::vector<double> history;    // tau_T per iterate (seconds), [0] is the initial point
  std::vector<double> residuals;  // original-problem residual per iterate
  Vars vars;
  LatencyBreakdown breakdown;
  RunStatus status = RunStatus::max_iter;
  int iterations = 0;
  int newton_steps = 0;
  double wall_seconds = 0.0;
  std::string message;
};

// Solver-side units: ms, Mbit, Mcycles. Rates per second map to per ms.
namespace units {
inline constexpr double time = 1e3;    // s -> ms
inline constexpr double amount = 1e-6;  // bits or cycles -> Mbit or Mcycles
inline constexpr double rate = 1e-9;    // per second -> millions per ms
}  // namespace units

}  // namespace cecran
