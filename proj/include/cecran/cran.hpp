#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cecran/convex.hpp"
#include "cecran/model.hpp"
#include "cecran/report.hpp"

namespace cecran::cran {

using model::ChannelSet;
using model::Scenario;

inline constexpr double split_eps = 1e-6;
inline constexpr double omega_floor = 1e-9;  // times the noise power

/// Uplink superposition powers per UE (normalized units).
struct UplinkPowers {
  std::vector<double> edge;   // p_E
  std::vector<double> cloud;  // p_C
};

/// Edge stream at the serving EN; every other edge stream and every cloud
/// stream (the UE's own included) interferes.
double uplink_edge_rate(const Scenario& s, const ChannelSet& ch, const UplinkPowers& p, int k);

/// log2det(S_i + noise I + Omega_i) - log2det(Omega_i), S_i without the edge
/// streams of UEs served by EN i (cancelled after local decoding).
double compression_rate_ul(const Scenario& s, const ChannelSet& ch, const UplinkPowers& p, const cmat& omega, int en);

/// max_i W tau_E gamma_i / C_F in seconds.
double fronthaul_latency_ul(const Scenario& s, double tau_edge, const std::vector<double>& gamma);
double fronthaul_latency_dl(const Scenario& s, double tau_edge, const std::vector<double>& gamma);

/// Cloud stream decoded at the CP from the stacked quantized signals.
double uplink_cloud_rate(const Scenario& s, const ChannelSet& ch, const UplinkPowers& p,
                         const std::vector<cmat>& omega_ul, int k);

/// max_k max(c b_I / (W r_E), (1 - c) b_I / (W r_C)); rates in bits per use.
double uplink_edge_latency(const Scenario& s, const std::vector<double>& c, const std::vector<double>& rate_edge,
                           const std::vector<double>& rate_cloud);
double downlink_edge_latency(const Scenario& s, const std::vector<double>& c, const std::vector<double>& rate_edge,
                             const std::vector<double>& rate_cloud);

/// log2det(sum_k E_i^H Q_C,k E_i + Omega_i) - log2det(Omega_i).
double compression_rate_dl(const Scenario& s, const std::vector<cmat>& q_cloud, const cmat& omega, int en);

/// (edge, cloud) downlink rates of UE k in bits per use.
std::pair<double, double> downlink_rates(const Scenario& s, const ChannelSet& ch, const std::vector<cmat>& q_edge,
                                         const std::vector<cmat>& q_cloud, const std::vector<cmat>& omega_dl, int k);

/// Network-wide latency terms in seconds; execution terms are per UE.
struct LatencyTerms {
  double ul_edge = 0.0;
  double ul_fronthaul = 0.0;
  double dl_fronthaul = 0.0;
  double dl_edge = 0.0;
  std::vector<double> exe_edge;
  std::vector<double> exe_cloud;
};

/// ul_edge + max(max exe_edge, ul_fronthaul + max exe_cloud + dl_fronthaul) + dl_edge
LatencyBreakdown total_latency_cran(const LatencyTerms& t);

struct CranVariables {
  std::vector<double> c;
  std::vector<double> pe_sqrt, pc_sqrt;  // square roots of the uplink powers
  std::vector<cmat> qe_sqrt;             // Hermitian roots, n_{E,i_k} x n_{E,i_k}
  std::vector<cmat> qc_sqrt;             // n_E x n_E
  std::vector<cmat> omega_ul, omega_dl;  // per EN
  std::vector<double> gamma_ul, gamma_dl;
  std::vector<double> f_edge, f_cloud;  // cycles/s
  std::vector<double> r_ul_edge, r_ul_cloud, r_dl_edge, r_dl_cloud;  // bits per use
  LatencyTerms tau;

  UplinkPowers powers() const;
  std::vector<cmat> q_edge() const;
  std::vector<cmat> q_cloud() const;
};

/// Auxiliary values in SI units (lambda in s^{1/2}, alpha in s^{-1/2}).
struct CranAux {
  std::vector<double> exe_edge, exe_cloud;
  std::vector<double> ul_edge, ul_cloud, dl_edge, dl_cloud;
  double alpha_ul = 0.0, alpha_dl = 0.0;
  std::vector<cmat> sigma_ul, sigma_dl;  // per EN
  std::vector<cmat> gamma_ul_edge, theta_ul_edge;
  std::vector<cmat> gamma_ul_cloud, theta_ul_cloud;
  std::vector<cmat> gamma_dl_edge, theta_dl_edge;
  std::vector<cmat> gamma_dl_cloud, theta_dl_cloud;
};

CranAux update_aux_cran(const Scenario& s, const ChannelSet& ch, const CranVariables& vars);

/// Variable ids inside a surrogate problem (-1 when absent).
struct CranIds {
  struct Ue {
    int c = -1;
    int pe_sqrt = -1, pe = -1, pc_sqrt = -1, pc = -1;
    int qe_sqrt = -1, qc_sqrt = -1;  // covariances enter as R R^H
    int r_ul_edge = -1, r_ul_cloud = -1, r_dl_edge = -1, r_dl_cloud = -1;
    int f_edge = -1, f_cloud = -1, tx_edge = -1, tx_cloud = -1;
  };
  struct En {
    int omega_ul = -1, omega_dl = -1, gamma_ul = -1, gamma_dl = -1;
    int dl_load = -1;  // bounds the Q_C part of the downlink compression linearization
  };
  std::vector<Ue> ue;
  std::vector<En> en;
  int te_ul = -1, tf_ul = -1, te_dl = -1, tf_dl = -1, branch = -1, total = -1;
};

struct Surrogate {
  convex::ConvexProblem problem;
  rvec start;
  CranIds ids;
};

/// Convex subproblem in solver units with the current point as start.
/// pinned_split may only be 0 (cloud only).
Surrogate surrogate_cran(const Scenario& s, const ChannelSet& ch, const CranVariables& vars, const CranAux& aux,
                         std::optional<double> pinned_split = std::nullopt);

/// c = 1/2, p_E = p_C = P/2, Omega_ul = noise I, random Q and Omega_dl halved
/// until every EN meets its power budget.
CranVariables init_cran(const Scenario& s, const ChannelSet& ch, model::Rng& rng,
                        std::optional<double> pinned_split = std::nullopt);

/// Rates, compression rates and latencies set to their achieved values.
void tighten(const Scenario& s, const ChannelSet& ch, CranVariables& vars);

/// Largest relative violation of the original problem's constraints.
double residual_cran(const Scenario& s, const ChannelSet& ch, const CranVariables& vars);

LatencyBreakdown latency(const CranVariables& vars);

SolveReport<CranVariables> algorithm3(const Scenario& s, const ChannelSet& ch, const AlgoConfig& config);

}  // namespace cecran::cran
