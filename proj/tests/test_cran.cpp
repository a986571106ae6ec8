#include <gtest/gtest.h>

#include <cmath>

#include "cecran/cran.hpp"
#include "cecran/dran.hpp"
#include "cecran/numerics.hpp"

using namespace cecran;
using namespace cecran::cran;

namespace {

Scenario scenario(int nu, int ne, int n = 1) {
  model::ScenarioSpec sp;
  sp.num_ues = nu;
  sp.num_ens = ne;
  sp.antennas_per_en = n;
  return model::make_scenario(sp);
}

// Constant channel vectors with the given power gains: ul[en][ue], dl[ue][en].
ChannelSet channels(const Scenario& s, const std::vector<std::vector<double>>& ul,
                    const std::vector<std::vector<double>>& dl) {
  ChannelSet ch;
  ch.h_ul.assign(static_cast<std::size_t>(s.num_ens), std::vector<cvec>(static_cast<std::size_t>(s.num_ues)));
  ch.h_dl.assign(static_cast<std::size_t>(s.num_ues), std::vector<cvec>(static_cast<std::size_t>(s.num_ens)));
  for (int i = 0; i < s.num_ens; ++i)
    for (int k = 0; k < s.num_ues; ++k) {
      const auto iu = static_cast<std::size_t>(i), ku = static_cast<std::size_t>(k);
      const int n = s.antennas[iu];
      ch.h_ul[iu][ku] = cvec::Constant(n, std::sqrt(ul[iu][ku] / n));
      ch.h_dl[ku][iu] = cvec::Constant(n, cplx(0.0, std::sqrt(dl[ku][iu] / n)));
    }
  model::finalize_channels(ch, s);
  return ch;
}

cmat eye(int n, double v) { return v * cmat::Identity(n, n); }

struct Instance {
  Scenario s;
  ChannelSet ch;
};

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

double dl_power(const Scenario& s, const CranVariables& v, int en) {
  const int off = s.antenna_offset(en), n = s.antennas[static_cast<std::size_t>(en)];
  double p = v.omega_dl[static_cast<std::size_t>(en)].trace().real();
  const auto qe = v.q_edge();
  for (int k : s.served_sets[static_cast<std::size_t>(en)])
    if (qe[static_cast<std::size_t>(k)].size() > 0) p += qe[static_cast<std::size_t>(k)].trace().real();
  for (const auto& q : v.q_cloud()) p += q.block(off, off, n, n).trace().real();
  return p;
}

}  // namespace

TEST(uplink, edge_rate_examples) {
  const Scenario s = scenario(1, 1);
  const ChannelSet ch = channels(s, {{1.0}}, {{1.0}});
  EXPECT_NEAR(uplink_edge_rate(s, ch, {{50.0}, {0.0}}, 0), std::log2(51.0), 1e-12);
  EXPECT_NEAR(uplink_edge_rate(s, ch, {{50.0}, {50.0}}, 0), std::log2(1.0 + 50.0 / 51.0), 1e-12);
  EXPECT_NEAR(std::log2(1.0 + 50.0 / 51.0), 0.98578, 1e-5);
  double prev = 1e9;
  for (double pc : {0.0, 1.0, 10.0, 40.0, 90.0}) {
    const double r = uplink_edge_rate(s, ch, {{10.0}, {pc}}, 0);
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(uplink, compression_rate_examples) {
  const Scenario s = scenario(1, 1);
  const ChannelSet ch = channels(s, {{1.0}}, {{1.0}});
  EXPECT_NEAR(compression_rate_ul(s, ch, {{7.0}, {1.0}}, eye(1, 1.0), 0), std::log2(3.0), 1e-12);
  // served edge stream is cancelled before quantization
  EXPECT_DOUBLE_EQ(compression_rate_ul(s, ch, {{7.0}, {1.0}}, eye(1, 1.0), 0),
                   compression_rate_ul(s, ch, {{70.0}, {1.0}}, eye(1, 1.0), 0));
  EXPECT_LT(compression_rate_ul(s, ch, {{0.0}, {1.0}}, eye(1, 1e9), 0), 1e-8);

  // an unserved UE's edge stream is not cancelled
  Scenario s2 = scenario(2, 2);
  const ChannelSet ch2 = channels(s2, {{1.0, 1.0}, {1.0, 1.0}}, {{1.0, 1.0}, {1.0, 1.0}});
  const UplinkPowers p{{1.0, 1.0}, {0.0, 0.0}};
  EXPECT_NEAR(compression_rate_ul(s2, ch2, p, eye(1, 1.0), 0), std::log2(3.0), 1e-12);
}

TEST(fronthaul, latency_examples) {
  const Scenario s = scenario(1, 2);
  EXPECT_NEAR(fronthaul_latency_ul(s, 0.01, {5.0, 2.0}), 1e-3, 1e-15);
  EXPECT_NEAR(fronthaul_latency_dl(s, 0.01, {2.0, 5.0}), 1e-3, 1e-15);
  EXPECT_EQ(fronthaul_latency_ul(s, 0.01, {0.0, 0.0}), 0.0);
}

TEST(uplink, cloud_rate_hand_reduction) {
  const Scenario s = scenario(1, 1);
  const ChannelSet ch = channels(s, {{2.0}}, {{1.0}});
  const double omega = 0.7;
  const double want = std::log2(1.0 + 30.0 * 2.0 / (1.0 + omega));
  EXPECT_NEAR(uplink_cloud_rate(s, ch, {{0.0}, {30.0}}, {eye(1, omega)}, 0), want, 1e-12);
  // the edge stream was decoded at the EN and is absent from the CP model
  EXPECT_NEAR(uplink_cloud_rate(s, ch, {{20.0}, {30.0}}, {eye(1, omega)}, 0), want, 1e-12);
  EXPECT_LT(uplink_cloud_rate(s, ch, {{0.0}, {30.0}}, {eye(1, 1e12)}, 0), 1e-9);
}

TEST(uplink, cloud_rate_permutation_invariant) {
  Scenario s = scenario(2, 2, 2);
  model::set_association(s, {0, 1});
  const std::vector<std::vector<double>> ul{{1.0, 0.3}, {0.2, 2.0}}, dl{{1.0, 0.5}, {0.4, 1.5}};
  const ChannelSet ch = channels(s, ul, dl);
  Scenario t = scenario(2, 2, 2);
  model::set_association(t, {1, 0});
  const ChannelSet cht = channels(t, {ul[1], ul[0]}, {{dl[0][1], dl[0][0]}, {dl[1][1], dl[1][0]}});
  const UplinkPowers p{{3.0, 5.0}, {7.0, 2.0}};
  cmat o0 = eye(2, 0.5), o1 = eye(2, 1.5);
  o0(0, 1) = cplx(0.1, 0.2);
  o0(1, 0) = std::conj(o0(0, 1));
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(uplink_cloud_rate(s, ch, p, {o0, o1}, k), uplink_cloud_rate(t, cht, p, {o1, o0}, k), 1e-12);
    EXPECT_NEAR(uplink_edge_rate(s, ch, p, k), uplink_edge_rate(t, cht, p, k), 1e-12);
  }
}

TEST(latency, edge_latency_examples) {
  const Scenario s = scenario(1, 1);
  const double r = 2.0;
  EXPECT_NEAR(uplink_edge_latency(s, {0.5}, {r}, {r}), 0.5 * 1e6 / (20e6 * r), 1e-15);
  EXPECT_NEAR(uplink_edge_latency(s, {1.0}, {r}, {0.0}), 1e6 / (20e6 * r), 1e-15);
  EXPECT_EQ(downlink_edge_latency(s, {0.5}, {0.0}, {r}), latency_sentinel);
  const Scenario s2 = scenario(2, 1);
  EXPECT_NEAR(downlink_edge_latency(s2, {0.5, 0.5}, {1.0, 4.0}, {1.0, 4.0}), 0.5 * 1e6 / 20e6, 1e-15);
}

TEST(downlink, compression_rate_examples) {
  const Scenario s = scenario(1, 1);
  EXPECT_NEAR(compression_rate_dl(s, {eye(1, 3.0)}, eye(1, 1.0), 0), 2.0, 1e-12);
  EXPECT_EQ(compression_rate_dl(s, {eye(1, 0.0)}, eye(1, 1.0), 0), 0.0);
  EXPECT_LT(compression_rate_dl(s, {eye(1, 3.0)}, eye(1, 1.0), 0), compression_rate_dl(s, {eye(1, 4.0)}, eye(1, 1.0), 0));
  EXPECT_GT(compression_rate_dl(s, {eye(1, 3.0)}, eye(1, 1.0), 0), compression_rate_dl(s, {eye(1, 3.0)}, eye(1, 1.1), 0));
}

TEST(downlink, rate_examples) {
  const Scenario s = scenario(1, 1);
  const ChannelSet ch = channels(s, {{1.0}}, {{2.0}});
  auto [e0, c0] = downlink_rates(s, ch, {eye(1, 0.0)}, {eye(1, 0.0)}, {eye(1, 0.5)}, 0);
  EXPECT_EQ(e0, 0.0);
  EXPECT_EQ(c0, 0.0);
  const double qe = 4.0, qc = 3.0, w = 0.5, g = 2.0;
  auto [e, c] = downlink_rates(s, ch, {eye(1, qe)}, {eye(1, qc)}, {eye(1, w)}, 0);
  EXPECT_NEAR(e, std::log2(1.0 + qe * g / (1.0 + g * (qc + w))), 1e-12);
  EXPECT_NEAR(c, std::log2(1.0 + qc * g / (1.0 + g * (qe + w))), 1e-12);
  auto [e2, c2] = downlink_rates(s, ch, {eye(1, qe)}, {eye(1, qc)}, {eye(1, 2.0 * w)}, 0);
  EXPECT_LT(e2, e);
  EXPECT_LT(c2, c);
}

TEST(latency, total_examples) {
  LatencyTerms t;
  t.ul_edge = 0.01;
  t.ul_fronthaul = 0.001;
  t.dl_fronthaul = 0.001;
  t.dl_edge = 0.008;
  t.exe_edge = {0.07, 0.01};
  t.exe_cloud = {0.002, 0.007};
  EXPECT_NEAR(total_latency_cran(t).total, 0.088, 1e-15);
  t.exe_edge = {0.001};
  EXPECT_NEAR(total_latency_cran(t).total, 0.01 + 0.009 + 0.008, 1e-15);
  EXPECT_EQ(total_latency_cran(LatencyTerms{}).total, 0.0);
}

TEST(aux, closed_forms) {
  const Instance in = fig2_instance(5);
  model::Rng rng(3);
  CranVariables v = init_cran(in.s, in.ch, rng);
  v.tau.ul_fronthaul = 1e-4;
  v.tau.ul_edge = 0.01;
  const CranAux a = update_aux_cran(in.s, in.ch, v);
  EXPECT_NEAR(a.alpha_ul, 1.0, 1e-12);
  const double c = v.c[0];
  EXPECT_NEAR(2.0 * a.ul_edge[0] * std::sqrt(0.01) - a.ul_edge[0] * a.ul_edge[0] * c, 0.01 / c, 1e-12);

  // scalar Gamma of the edge uplink stream is its SINR
  const auto p = v.powers();
  for (int k = 0; k < in.s.num_ues; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const int i = in.s.association[ku];
    const cvec& h = in.ch.h_ul[static_cast<std::size_t>(i)][ku];
    cmat noise = eye(2, in.s.noise_ul);
    for (int l = 0; l < in.s.num_ues; ++l) {
      const cvec& g = in.ch.h_ul[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
      noise += (p.cloud[static_cast<std::size_t>(l)] + (l == k ? 0.0 : p.edge[static_cast<std::size_t>(l)])) *
               g * g.adjoint();
    }
    const double sinr = p.edge[ku] * (h.adjoint() * noise.inverse() * h)(0, 0).real();
    EXPECT_NEAR(a.gamma_ul_edge[ku](0, 0).real(), sinr, 1e-9 * std::max(1.0, sinr));
  }
}

TEST(aux, phi_reproduces_psi_rates) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance in = fig2_instance(seed);
    model::Rng rng(seed + 10);
    const CranVariables v = init_cran(in.s, in.ch, rng);
    const CranAux a = update_aux_cran(in.s, in.ch, v);
    const auto p = v.powers();
    for (int k = 0; k < in.s.num_ues; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const cvec& hs = in.ch.h_ul_stacked[ku];
      cmat D = eye(in.s.total_antennas(), in.s.noise_ul);
      for (int i = 0; i < in.s.num_ens; ++i) {
        const cmat E = in.ch.selector[static_cast<std::size_t>(i)].cast<cplx>();
        D += E * v.omega_ul[static_cast<std::size_t>(i)] * E.adjoint();
      }
      for (int l = 0; l < in.s.num_ues; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        D += p.edge[lu] * in.ch.h_ul_tilde[lu] * in.ch.h_ul_tilde[lu].adjoint() +
             p.cloud[lu] * in.ch.h_ul_stacked[lu] * in.ch.h_ul_stacked[lu].adjoint();
      }
      const double phi = numerics::phi(a.gamma_ul_cloud[ku], a.theta_ul_cloud[ku], v.pc_sqrt[ku] * hs, D);
      EXPECT_NEAR(phi, v.r_ul_cloud[ku], 1e-9 * std::max(1.0, v.r_ul_cloud[ku]));
    }
  }
}

TEST(aux, surrogate_tight_at_current_point) {
  const Instance in = fig2_instance(2);
  model::Rng rng(4);
  const CranVariables v = init_cran(in.s, in.ch, rng);
  const Surrogate sur = surrogate_cran(in.s, in.ch, v, update_aux_cran(in.s, in.ch, v));
  const auto& P = sur.problem;
  const rvec& x = sur.start;
  int rates = 0, logdets = 0, ratios = 0;
  for (const auto& c : P.constraints) {
    EXPECT_LE(convex::constraint_violation(P, c, x), 1e-6) << c.label;
    if (c.label.rfind("rate_", 0) == 0) {
      double slack = 0.0;
      if (const auto* a = std::get_if<convex::AffineLe>(&c.body)) {
        slack = -a->expr.eval(x);
      } else {
        const auto& q = std::get<convex::QuadTraceLe>(c.body);
        slack = q.rest.eval(x);
        for (const auto& t : q.terms) {
          const cmat X = convex::complex_value(P, x, t.var);
          slack -= (X.adjoint() * t.weight * X).trace().real();
        }
      }
      EXPECT_NEAR(slack, 0.0, 1e-8) << c.label;
      ++rates;
    } else if (const auto* g = std::get_if<convex::LogdetGe>(&c.body)) {
      const double slack = numerics::logdet2(convex::hermitian_value(P, x, g->omega_var)) - g->rest.eval(x);
      EXPECT_NEAR(slack, 0.0, 1e-9) << c.label;
      ++logdets;
    } else if (const auto* r = std::get_if<convex::SqrtConcaveGe>(&c.body)) {
      if (c.label.rfind("fh_", 0) == 0) {
        // only the bottleneck EN is tight
        continue;
      }
      double lhs = 2.0 * r->lambda * std::sqrt(r->tau.eval(x)) - r->lambda * r->lambda * r->v.eval(x);
      double rhs = r->kappa / r->w.eval(x) + r->rest.eval(x);
      EXPECT_GE(lhs, rhs - 1e-9 * std::max(1.0, rhs)) << c.label;
      ++ratios;
    }
  }
  EXPECT_EQ(rates, 16);
  EXPECT_EQ(logdets, 4);
  EXPECT_EQ(ratios, 24);
}

TEST(algorithm3, fig2_iterates_monotone_and_feasible) {
  for (double snr : {0.0, 20.0}) {
    const Instance in = fig2_instance(1, snr);
    AlgoConfig cfg;
    cfg.t_max = 6;
    const auto rep = algorithm3(in.s, in.ch, cfg);
    ASSERT_NE(rep.status, RunStatus::solver_failure) << rep.message;
    ASSERT_EQ(rep.history.size(), 7u);
    for (std::size_t t = 1; t < rep.history.size(); ++t) EXPECT_LE(rep.history[t], rep.history[t - 1] + 1e-6);
    for (double r : rep.residuals) EXPECT_LE(r, 1e-6);
    EXPECT_LT(rep.history.back(), rep.history.front());
    for (int i = 0; i < in.s.num_ens; ++i) {
      EXPECT_LE(dl_power(in.s, rep.vars, i), in.s.power_dl + 1e-6);
      EXPECT_GE(rep.vars.gamma_ul[static_cast<std::size_t>(i)], 0.0);
      EXPECT_GE(rep.vars.gamma_dl[static_cast<std::size_t>(i)], 0.0);
      EXPECT_GT(numerics::min_eigenvalue(rep.vars.omega_dl[static_cast<std::size_t>(i)]), 0.0);
    }
    EXPECT_NEAR(rep.breakdown.total, total_latency_cran(rep.vars.tau).total, 1e-12);
  }
}

// Single UE, single antenna, cloud only: the optimum reduces to two 1-D
// searches over the quantization noise, one per direction.
TEST(algorithm3, cloud_only_pipeline_oracle) {
  Scenario s = scenario(1, 1);
  s.cf_ul = s.cf_dl = 2e8;
  const double gu = 0.5, gd = 0.8;
  const ChannelSet ch = channels(s, {{gu}}, {{gd}});
  const double b = s.input_bits[0], bo = s.output_bits[0], W = s.bw_ul;
  auto ul = [&](double p, double w) {
    const double r = std::log2(1.0 + p * gu / (1.0 + w));
    const double gamma = std::log2(1.0 + (p * gu + 1.0) / w);
    return b / (W * r) * (1.0 + W * gamma / s.cf_ul);
  };
  auto dl = [&](double q, double w) {
    const double r = std::log2(1.0 + q * gd / (1.0 + gd * w));
    const double gamma = std::log2((q + w) / w);
    return bo / (W * r) * (1.0 + W * gamma / s.cf_dl);
  };
  // power on a linear grid, quantization noise on a log grid
  const int np = 1500, nw = 1500;
  double best_ul = 1e300, best_dl = 1e300;
  for (int j = 1; j <= np; ++j) {
    const double frac = static_cast<double>(j) / np;
    for (int m = 0; m <= nw; ++m) {
      const double w = std::pow(10.0, -4.0 + 7.0 * m / nw);
      best_ul = std::min(best_ul, ul(frac * s.power_ul, w));
      if (w < s.power_dl) best_dl = std::min(best_dl, dl(frac * (s.power_dl - w), w));
    }
  }
  const double oracle = best_ul + s.input_bits[0] * s.cycles_per_bit[0] / s.cloud_cycles + best_dl;

  AlgoConfig cfg;
  cfg.pinned_split = 0.0;
  const auto rep = algorithm3(s, ch, cfg);
  ASSERT_NE(rep.status, RunStatus::solver_failure) << rep.message;
  EXPECT_NEAR(rep.breakdown.total, oracle, 0.05 * oracle);
  EXPECT_GE(rep.breakdown.total, oracle * (1.0 - 1e-3));
  EXPECT_EQ(rep.vars.c[0], 0.0);
  EXPECT_EQ(rep.breakdown.exe_edge, 0.0);
}

// With an unconstrained fronthaul, joint processing can only help. C-RAN is
// stopped at t_max = 10, which can only raise its average.
TEST(algorithm3, unlimited_fronthaul_beats_noma) {
  double cran_sum = 0.0, noma_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Instance in = fig2_instance(seed);
    in.s.cf_ul = in.s.cf_dl = 1e12;
    AlgoConfig cfg;
    cfg.seed = seed;
    cfg.t_max = 10;
    const auto c = algorithm3(in.s, in.ch, cfg);
    cfg.t_max = 30;
    const auto d = dran::algorithm2(in.s, in.ch, cfg);
    ASSERT_NE(c.status, RunStatus::solver_failure) << c.message;
    ASSERT_NE(d.status, RunStatus::solver_failure) << d.message;
    cran_sum += c.breakdown.total;
    noma_sum += d.breakdown.total;
  }
  EXPECT_LE(cran_sum, noma_sum);
}

TEST(algorithm3, edge_only_pin_rejected) {
  const Instance in = fig2_instance(1);
  AlgoConfig cfg;
  cfg.pinned_split = 1.0;
  EXPECT_THROW(algorithm3(in.s, in.ch, cfg), std::invalid_argument);
}

TEST(algorithm3, deterministic_for_a_seed) {
  const Instance in = fig2_instance(3);
  AlgoConfig cfg;
  cfg.t_max = 2;
  const auto a = algorithm3(in.s, in.ch, cfg);
  const auto b = algorithm3(in.s, in.ch, cfg);
  EXPECT_EQ(a.history, b.history);
}
