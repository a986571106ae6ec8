#pragma once

#include <vector>

#include "cecran/convex.hpp"
#include "cecran/model.hpp"
#include "cecran/report.hpp"

namespace cecran::dran {

using model::ChannelSet;
using model::Scenario;

inline constexpr double split_eps = 1e-6;  // c kept in [eps, 1 - eps]
inline constexpr double u_floor = 1e-6;    // TDMA time fractions

/// log2(1 + SNR_ul ||h_{i_k,k}||^2), bits per channel use.
double tdma_rate_ul(const Scenario& s, const ChannelSet& ch, int k);
/// log2(1 + SNR_dl ||h_{k,i_k}||^2) under conjugate beamforming.
double tdma_rate_dl(const Scenario& s, const ChannelSet& ch, int k);

/// c b V / F in seconds; latency_sentinel when F = 0 and c > 0.
double exec_latency_edge(double c, double bits, double cycles_per_bit, double f_alloc);
/// (1 - c) b V / F in seconds.
double exec_latency_cloud(double c, double bits, double cycles_per_bit, double f_alloc);
/// bits / cap in seconds; latency_sentinel when cap = 0 and bits > 0.
double fronthaul_latency_dran(double bits, double cap_alloc);

/// Per-UE latency terms in seconds.
struct UeLatency {
  double ul_edge = 0.0;
  double ul_fronthaul = 0.0;
  double exe_edge = 0.0;
  double exe_cloud = 0.0;
  double dl_fronthaul = 0.0;
  double dl_edge = 0.0;

  /// ul_edge + max(exe_edge, ul_fronthaul + exe_cloud + dl_fronthaul) + dl_edge
  double total() const;
};

/// Maximum over UEs; the breakdown carries the bottleneck UE's components.
LatencyBreakdown total_latency_dran(const std::vector<UeLatency>& per_ue);

/// Parallel decoding at the serving EN, every other UE interferes.
double noma_rate_ul(const Scenario& s, const ChannelSet& ch, const std::vector<double>& powers, int k);
/// Downlink rate with interference from every other UE's covariance at its own EN.
double noma_rate_dl(const Scenario& s, const ChannelSet& ch, const std::vector<cmat>& covariances, int k);

// Variables are in SI units: seconds, bits/s, cycles/s. Powers are normalized
// (noise = 1).
struct ComputeVariables {
  std::vector<double> c;
  std::vector<double> f_edge;   // F_{E,i_k,k}
  std::vector<double> f_cloud;  // F_{C,k}
  std::vector<double> cf_ul;    // C^ul_{F,k}
  std::vector<double> cf_dl;    // C^dl_{F,k}
  std::vector<UeLatency> tau;
};

struct TdmaVariables : ComputeVariables {
  std::vector<double> u_ul;
  std::vector<double> u_dl;
};

struct NomaVariables : ComputeVariables {
  std::vector<double> p_sqrt;  // sqrt of uplink power
  std::vector<cmat> q_sqrt;    // Hermitian square roots of downlink covariances
  std::vector<double> r_ul;    // bits per channel use
  std::vector<double> r_dl;

  std::vector<double> powers() const;
  std::vector<cmat> covariances() const;
};

/// lambda values of the ratio surrogates, in seconds^{1/2}.
struct TdmaAux {
  std::vector<double> fh_ul;
  std::vector<double> fh_dl;
  std::vector<double> exe_edge;
  std::vector<double> exe_cloud;
};

struct NomaAux {
  TdmaAux lambda;
  std::vector<cmat> gamma_ul;  // 1 x 1
  std::vector<cmat> theta_ul;  // n x 1
  std::vector<cmat> gamma_dl;  // n x n
  std::vector<cmat> theta_dl;  // 1 x n
};

/// Closed-form lambda with c clamped to [split_eps, 1 - split_eps].
TdmaAux update_aux_tdma(const ComputeVariables& vars);
NomaAux update_aux_noma(const Scenario& s, const ChannelSet& ch, const NomaVariables& vars);

/// Variable ids of one UE inside a surrogate problem (-1 when absent).
struct UeIds {
  int c = -1;
  int u_ul = -1, u_dl = -1;
  int p_sqrt = -1, p = -1, q_sqrt = -1, q = -1, r_ul = -1, r_dl = -1;
  int f_edge = -1, f_cloud = -1, cf_ul = -1, cf_dl = -1;
  int te_ul = -1, tf_ul = -1, te_dl = -1, tf_dl = -1, tx_edge = -1, tx_cloud = -1;
  int branch = -1;  // max of the edge and cloud paths
};

/// Convex subproblem in solver units (ms, Mbit, Mcycles) and the current
/// point packed as its start.
struct Surrogate {
  convex::ConvexProblem problem;
  rvec start;
  std::vector<UeIds> ue;
  int total = -1;
};

Surrogate surrogate_tdma(const Scenario& s, const ChannelSet& ch, const TdmaVariables& vars, const TdmaAux& aux,
                         std::optional<double> pinned_split = std::nullopt);
Surrogate surrogate_noma(const Scenario& s, const ChannelSet& ch, const NomaVariables& vars, const NomaAux& aux,
                         std::optional<double> pinned_split = std::nullopt);

/// Initial points: equal shares, c = 1/2 (or the pinned value), full uplink
/// power and Frobenius-scaled random downlink roots for NOMA.
TdmaVariables init_tdma(const Scenario& s, const ChannelSet& ch, std::optional<double> pinned_split = std::nullopt);
NomaVariables init_noma(const Scenario& s, const ChannelSet& ch, model::Rng& rng,
                        std::optional<double> pinned_split = std::nullopt);

/// Sets every latency to its value implied by the allocation (and, for NOMA,
/// the rates to the achievable ones).
void tighten(const Scenario& s, const ChannelSet& ch, TdmaVariables& vars);
void tighten(const Scenario& s, const ChannelSet& ch, NomaVariables& vars);

/// Largest relative violation of the original problem's constraints.
double residual_tdma(const Scenario& s, const ChannelSet& ch, const TdmaVariables& vars);
double residual_noma(const Scenario& s, const ChannelSet& ch, const NomaVariables& vars);

LatencyBreakdown latency(const ComputeVariables& vars);

SolveReport<TdmaVariables> algorithm1(const Scenario& s, const ChannelSet& ch, const AlgoConfig& config);
SolveReport<NomaVariables> algorithm2(const Scenario& s, const ChannelSet& ch, const AlgoConfig& config);

}  // namespace cecran::dran
