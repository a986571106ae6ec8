#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cecran/dran.hpp"

using namespace cecran;
using namespace cecran::dran;

namespace {

// One EN with `n` antennas, `nu` UEs, channels set by the caller.
Scenario small_scenario(int nu, int n = 1) {
  model::ScenarioSpec sp;
  sp.num_ues = nu;
  sp.num_ens = 1;
  sp.antennas_per_en = n;
  return model::make_scenario(sp);
}

ChannelSet flat_channels(const Scenario& s, const std::vector<double>& gains_ul, const std::vector<double>& gains_dl) {
  ChannelSet ch;
  const int n = s.antennas[0];
  ch.h_ul.assign(1, std::vector<cvec>(static_cast<std::size_t>(s.num_ues)));
  ch.h_dl.assign(static_cast<std::size_t>(s.num_ues), std::vector<cvec>(1));
  for (int k = 0; k < s.num_ues; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    ch.h_ul[0][ku] = cvec::Constant(n, std::sqrt(gains_ul[ku] / n));
    ch.h_dl[ku][0] = cvec::Constant(n, std::sqrt(gains_dl[ku] / n));
  }
  model::finalize_channels(ch, s);
  return ch;
}

struct Instance {
  Scenario s;
  ChannelSet ch;
};

// Fig. 2 layout: 4 UEs, 2 ENs with 2 antennas each, random drop.
Instance fig2_instance(std::uint64_t seed, double snr_db = 20.0) {
  model::ScenarioSpec sp;
  sp.snr_db = snr_db;
  Instance in{model::make_scenario(sp), {}};
  model::Rng rng(seed);
  model::TopologyParams tp;
  const auto pos = model::generate_topology(rng, tp, in.s.num_ues, in.s.num_ens);
  model::set_association(in.s, model::associate(pos));
  in.ch = model::sample_channels(rng, pos, tp, in.s);
  return in;
}

void expect_monotone_and_feasible(const std::vector<double>& history, const std::vector<double>& residuals) {
  for (std::size_t t = 1; t < history.size(); ++t) EXPECT_LE(history[t], history[t - 1] + 1e-6) << "step " << t;
  for (double r : residuals) EXPECT_LE(r, 1e-6);
}

}  // namespace

TEST(rates, tdma_examples) {
  const Scenario s = small_scenario(1);
  ChannelSet ch = flat_channels(s, {1.0}, {2.0});
  EXPECT_NEAR(tdma_rate_ul(s, ch, 0), 6.65821148275179, 1e-12);
  EXPECT_NEAR(s.bw_ul * tdma_rate_ul(s, ch, 0), 1.33164e8, 1e3);
  EXPECT_NEAR(tdma_rate_dl(s, ch, 0), 7.65105169117893, 1e-12);
  ch = flat_channels(s, {0.0}, {0.0});
  EXPECT_EQ(tdma_rate_ul(s, ch, 0), 0.0);
  EXPECT_EQ(tdma_rate_dl(s, ch, 0), 0.0);
}

TEST(rates, conjugate_beamforming_beats_random_covariances) {
  model::Rng rng(5);
  const double P = 100.0;
  for (int trial = 0; trial < 20; ++trial) {
    const cvec h = rng.complex_normal_matrix(3, 1);
    const double best = std::log2(1.0 + P * h.squaredNorm());
    for (int r = 0; r < 100; ++r) {
      const cmat V = rng.complex_normal_matrix(3, 3);
      cmat Q = V * V.adjoint();
      Q *= P / Q.trace().real();
      const double mi = std::log2(1.0 + (h.adjoint() * Q * h)(0, 0).real());
      EXPECT_GE(best, mi - 1e-12);
    }
  }
}

TEST(latency, execution_and_fronthaul_examples) {
  EXPECT_NEAR(exec_latency_edge(1.0, 1e6, 700, 1e10), 0.07, 1e-15);
  EXPECT_EQ(exec_latency_edge(0.0, 1e6, 700, 1e10), 0.0);
  EXPECT_NEAR(exec_latency_edge(0.5, 1e6, 700, 0.5e10), 0.07, 1e-15);
  EXPECT_EQ(exec_latency_edge(0.5, 1e6, 700, 0.0), latency_sentinel);
  EXPECT_NEAR(exec_latency_cloud(0.0, 1e6, 700, 1e11), 7e-3, 1e-15);
  EXPECT_EQ(exec_latency_cloud(1.0, 1e6, 700, 1e11), 0.0);
  EXPECT_NEAR(exec_latency_cloud(0.5, 1e6, 700, 0.5e11), 7e-3, 1e-15);
  EXPECT_NEAR(fronthaul_latency_dran(0.5e6, 0.5e9), 1e-3, 1e-15);
  EXPECT_EQ(fronthaul_latency_dran(0.0, 1e9), 0.0);
  EXPECT_NEAR(fronthaul_latency_dran(1e6, 1e9), 1e-3, 1e-15);
  EXPECT_EQ(fronthaul_latency_dran(1e6, 0.0), latency_sentinel);
}

TEST(latency, total_examples) {
  UeLatency a{0.01, 0.001, 0.07, 0.007, 0.001, 0.008};
  LatencyBreakdown b = total_latency_dran({a});
  EXPECT_NEAR(b.total, 0.088, 1e-15);
  EXPECT_EQ(total_latency_dran({UeLatency{}}).total, 0.0);
  UeLatency c = a;
  c.exe_edge = 0.0;  // cloud path 0.009 now dominates
  EXPECT_NEAR(c.total(), 0.01 + 0.009 + 0.008, 1e-15);
  b = total_latency_dran({c, a});
  EXPECT_NEAR(b.total, 0.088, 1e-15);
  EXPECT_EQ(b.exe_edge, 0.07);
}

TEST(noma, uplink_two_ue_hand_case) {
  const Scenario s = small_scenario(2);
  const ChannelSet ch = flat_channels(s, {1.0, 0.1}, {1.0, 1.0});
  EXPECT_NEAR(noma_rate_ul(s, ch, {100.0, 100.0}, 0), std::log2(1.0 + 100.0 / 11.0), 1e-12);
  EXPECT_NEAR(noma_rate_ul(s, ch, {100.0, 0.0}, 0), tdma_rate_ul(s, ch, 0), 1e-12);
  double prev = std::numeric_limits<double>::infinity();
  for (double p : {0.0, 1.0, 10.0, 50.0, 100.0}) {
    const double r = noma_rate_ul(s, ch, {100.0, p}, 0);
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(noma, uplink_multi_antenna_zero_interference_matches_tdma) {
  const Scenario s = small_scenario(2, 3);
  const ChannelSet ch = flat_channels(s, {0.7, 0.3}, {1.0, 1.0});
  EXPECT_NEAR(noma_rate_ul(s, ch, {100.0, 0.0}, 0), tdma_rate_ul(s, ch, 0), 1e-12);
}

TEST(noma, downlink_cases) {
  const Scenario s1 = small_scenario(1, 2);
  const ChannelSet ch1 = flat_channels(s1, {1.0}, {2.0});
  cmat Q = cmat::Identity(2, 2) * 3.0;
  const cvec& h = ch1.h_dl[0][0];
  EXPECT_NEAR(noma_rate_dl(s1, ch1, {Q}, 0), std::log2(1.0 + (h.adjoint() * Q * h)(0, 0).real()), 1e-12);
  EXPECT_EQ(noma_rate_dl(s1, ch1, {cmat::Zero(2, 2)}, 0), 0.0);

  const Scenario s2 = small_scenario(2);
  const ChannelSet ch2 = flat_channels(s2, {1.0, 1.0}, {1.0, 1.0});
  const cmat q = cmat::Constant(1, 1, 50.0);
  EXPECT_NEAR(noma_rate_dl(s2, ch2, {q, q}, 0), std::log2(1.0 + 50.0 / 51.0), 1e-12);
}

TEST(aux, closed_form_lambda) {
  ComputeVariables v;
  v.c = {0.5, 1.0, 0.3};
  v.tau.assign(3, UeLatency{});
  v.tau[0].exe_edge = 0.04;
  v.tau[1].ul_fronthaul = 0.01;
  const TdmaAux a = update_aux_tdma(v);
  EXPECT_NEAR(a.exe_edge[0], 0.4, 1e-15);
  const double lam = a.exe_edge[0];
  EXPECT_NEAR(2.0 * lam * std::sqrt(0.04) - lam * lam * 0.5, 0.08, 1e-15);
  EXPECT_TRUE(std::isfinite(a.fh_ul[1]));
  EXPECT_EQ(a.exe_cloud[2], 0.0);
}

// The surrogate built at the current point with its own aux values must be
// tight: each FP bound equals the original latency or rate.
TEST(aux, surrogate_tight_at_current_point) {
  const Instance in = fig2_instance(3);
  model::Rng rng(8);
  NomaVariables v = init_noma(in.s, in.ch, rng);
  const Surrogate sur = surrogate_noma(in.s, in.ch, v, update_aux_noma(in.s, in.ch, v));
  int checked = 0;
  for (const auto& c : sur.problem.constraints) {
    const bool rate = c.label.rfind("rate_", 0) == 0;
    const bool ratio = c.label.rfind("exe_", 0) == 0 || c.label.rfind("fh_", 0) == 0;
    if (!rate && !ratio) continue;
    const double viol = convex::constraint_violation(sur.problem, c, sur.start);
    EXPECT_LE(viol, 1e-9 * 1e3) << c.label;
    if (rate) {
      // r - phi(aux) = 0 exactly at the aux optimum
      const double gap = std::get<convex::AffineLe>(c.body).expr.eval(sur.start);
      EXPECT_NEAR(gap, 0.0, 1e-9) << c.label;
    }
    ++checked;
  }
  EXPECT_EQ(checked, 4 * 2 + 4 * 4);
}

TEST(algorithm1, single_ue_oracle) {
  const Scenario s = small_scenario(1);
  const ChannelSet ch = flat_channels(s, {1.0}, {1.0});
  const auto rep = algorithm1(s, ch, AlgoConfig{});
  const double A = 1e6 * 700 / 1e10, B = 1e6 / 1e9 + 1e6 * 700 / 1e11 + 1e6 / 1e9;
  const double c_star = B / (A + B);
  EXPECT_NEAR(c_star, 0.113924, 1e-6);
  const UeLatency& t = rep.vars.tau[0];
  const double middle = std::max(t.exe_edge, t.ul_fronthaul + t.exe_cloud + t.dl_fronthaul);
  EXPECT_NEAR(middle, 7.9747e-3, 7.9747e-5);
  EXPECT_NEAR(rep.vars.c[0], c_star, 0.01 * c_star);
  EXPECT_EQ(rep.status, RunStatus::converged);
}

TEST(algorithm1, infinite_delta_stops_after_one_iteration) {
  const Instance in = fig2_instance(1);
  AlgoConfig cfg;
  cfg.delta = std::numeric_limits<double>::infinity();
  const auto rep = algorithm1(in.s, in.ch, cfg);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_EQ(rep.history.size(), 2u);
}

TEST(algorithm1, fig2_converges_monotonically) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Instance in = fig2_instance(seed);
    const auto rep = algorithm1(in.s, in.ch, AlgoConfig{});
    EXPECT_EQ(rep.status, RunStatus::converged) << rep.message;
    EXPECT_LE(rep.iterations, 30);
    expect_monotone_and_feasible(rep.history, rep.residuals);
    double su = 0.0;
    for (double x : rep.vars.u_ul) su += x;
    EXPECT_NEAR(su, 1.0, 1e-12);
    EXPECT_NEAR(rep.breakdown.total, rep.history.back(), 1e-15);
  }
}

TEST(algorithm1, bad_config_throws) {
  const Instance in = fig2_instance(1);
  AlgoConfig cfg;
  cfg.t_max = 0;
  EXPECT_THROW(algorithm1(in.s, in.ch, cfg), std::invalid_argument);
  cfg = AlgoConfig{};
  cfg.pinned_split = 0.5;
  EXPECT_THROW(algorithm1(in.s, in.ch, cfg), std::invalid_argument);
}

TEST(algorithm2, single_ue_matches_tdma) {
  const Scenario s = small_scenario(1, 2);
  model::Rng rng(4);
  ChannelSet ch;
  ch.h_ul = {{rng.complex_normal_matrix(2, 1)}};
  ch.h_dl = {{rng.complex_normal_matrix(2, 1)}};
  model::finalize_channels(ch, s);
  const auto tdma = algorithm1(s, ch, AlgoConfig{});
  const auto noma = algorithm2(s, ch, AlgoConfig{});
  EXPECT_NEAR(noma.breakdown.total, tdma.breakdown.total, 0.01 * tdma.breakdown.total);
  expect_monotone_and_feasible(noma.history, noma.residuals);
}

TEST(algorithm2, fig2_converges_monotonically) {
  for (std::uint64_t seed : {1, 2}) {
    for (double snr : {0.0, 20.0}) {
      const Instance in = fig2_instance(seed, snr);
      const auto rep = algorithm2(in.s, in.ch, AlgoConfig{});
      EXPECT_EQ(rep.status, RunStatus::converged) << rep.message;
      expect_monotone_and_feasible(rep.history, rep.residuals);
      for (double r : rep.vars.r_ul) EXPECT_GT(r, 0.0);
      for (double r : rep.vars.r_dl) EXPECT_GT(r, 0.0);
    }
  }
}

TEST(algorithm2, pinned_edge_only_reports_exact_split) {
  const Instance in = fig2_instance(2);
  AlgoConfig cfg;
  cfg.pinned_split = 1.0;
  const auto rep = algorithm2(in.s, in.ch, cfg);
  for (double c : rep.vars.c) EXPECT_EQ(c, 1.0);
  EXPECT_EQ(rep.breakdown.exe_cloud, 0.0);
  EXPECT_EQ(rep.breakdown.ul_fronthaul, 0.0);
  expect_monotone_and_feasible(rep.history, rep.residuals);
}

TEST(algorithm2, deterministic_for_a_seed) {
  const Instance in = fig2_instance(4);
  const auto a = algorithm2(in.s, in.ch, AlgoConfig{});
  const auto b = algorithm2(in.s, in.ch, AlgoConfig{});
  EXPECT_EQ(a.history, b.history);
}
