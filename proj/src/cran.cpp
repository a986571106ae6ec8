#include "cecran/cran.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alternating.hpp"
#include "builder.hpp"
#include "cecran/numerics.hpp"
#include "fp_affine.hpp"

namespace cecran::cran {

using detail::Builder;
using detail::indexed;
using detail::rel_ge;

namespace {

std::size_t u(int k) { return static_cast<std::size_t>(k); }

int serving(const Scenario& s, int k) { return s.association[u(k)]; }

double clamp_split(double c) { return std::clamp(c, split_eps, 1.0 - split_eps); }

double ratio(double num, double den) {
  if (num <= 0.0) return 0.0;
  if (!(den > 0.0)) return latency_sentinel;
  return std::min(num / den, latency_sentinel);
}

cmat outer(const cvec& h) { return h * h.adjoint(); }

cmat selector(const ChannelSet& ch, int en) { return ch.selector[u(en)].cast<cplx>(); }

// Received covariance at EN i before local decoding, without the own-EN
// edge streams when `cancel` is set.
cmat en_covariance(const Scenario& s, const ChannelSet& ch, const UplinkPowers& p, int en, bool cancel) {
  const int n = s.antennas[u(en)];
  cmat S = s.noise_ul * cmat::Identity(n, n);
  for (int l = 0; l < s.num_ues; ++l) {
    const cvec& h = ch.h_ul[u(en)][u(l)];
    double w = p.cloud[u(l)];
    if (!(cancel && serving(s, l) == en)) w += p.edge[u(l)];
    if (w != 0.0) S += w * outer(h);
  }
  return S;
}

cmat block_diag(const Scenario& s, const ChannelSet& ch, const std::vector<cmat>& blocks) {
  const int nt = s.total_antennas();
  cmat M = cmat::Zero(nt, nt);
  for (int i = 0; i < s.num_ens; ++i) {
    const cmat E = selector(ch, i);
    M += E * blocks[u(i)] * E.adjoint();
  }
  return M;
}

// Stacked covariance seen by the CP including every cloud stream.
cmat cp_covariance(const Scenario& s, const ChannelSet& ch, const UplinkPowers& p, const std::vector<cmat>& omega) {
  const int nt = s.total_antennas();
  cmat D = s.noise_ul * cmat::Identity(nt, nt) + block_diag(s, ch, omega);
  for (int l = 0; l < s.num_ues; ++l) {
    if (p.edge[u(l)] != 0.0) D += p.edge[u(l)] * outer(ch.h_ul_tilde[u(l)]);
    if (p.cloud[u(l)] != 0.0) D += p.cloud[u(l)] * outer(ch.h_ul_stacked[u(l)]);
  }
  return D;
}

double quad(const cvec& h, const cmat& Q) { return std::max(0.0, (h.adjoint() * Q * h)(0, 0).real()); }

// Total received power at UE k (noise, quantization and every stream).
double ue_received(const Scenario& s, const ChannelSet& ch, const std::vector<cmat>& qe, const std::vector<cmat>& qc,
                   const std::vector<cmat>& omega_dl, int k) {
  double d = s.noise_dl;
  for (int i = 0; i < s.num_ens; ++i) d += quad(ch.h_dl[u(k)][u(i)], omega_dl[u(i)]);
  for (int l = 0; l < s.num_ues; ++l) {
    if (qe[u(l)].size() > 0) d += quad(ch.h_dl[u(k)][u(serving(s, l))], qe[u(l)]);
    if (qc[u(l)].size() > 0) d += quad(ch.h_dl_stacked[u(k)], qc[u(l)]);
  }
  return d;
}

bool has_edge(std::optional<double> pin) { return !pin; }

void check_pin(std::optional<double> pin) {
  if (pin && *pin != 0.0)
    throw std::invalid_argument("cran: only the cloud-only split (0) can be pinned; edge-only runs use D-RAN");
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

double uplink_edge_rate(const Scenario& s, const ChannelSet& ch, const UplinkPowers& p, int k) {
  const int i = serving(s, k);
  const cvec& h = ch.h_ul[u(i)][u(k)];
  cmat noise = en_covariance(s, ch, p, i, false) - p.edge[u(k)] * outer(h);
  return numerics::psi(p.edge[u(k)] * outer(h), noise);
}

double compression_rate_ul(const Scenario& s, const ChannelSet& ch, const UplinkPowers& p, const cmat& omega,
                           int en) {
  return numerics::logdet2(en_covariance(s, ch, p, en, true) + omega) - numerics::logdet2(omega);
}

double fronthaul_latency_ul(const Scenario& s, double tau_edge, const std::vector<double>& gamma) {
  return s.bw_ul * tau_edge * max_of(gamma) / s.cf_ul;
}

double fronthaul_latency_dl(const Scenario& s, double tau_edge, const std::vector<double>& gamma) {
  return s.bw_dl * tau_edge * max_of(gamma) / s.cf_dl;
}

double uplink_cloud_rate(const Scenario& s, const ChannelSet& ch, const UplinkPowers& p,
                         const std::vector<cmat>& omega_ul, int k) {
  const cvec& h = ch.h_ul_stacked[u(k)];
  const cmat noise = cp_covariance(s, ch, p, omega_ul) - p.cloud[u(k)] * outer(h);
  return numerics::psi(p.cloud[u(k)] * outer(h), noise);
}

double uplink_edge_latency(const Scenario& s, const std::vector<double>& c, const std::vector<double>& rate_edge,
                           const std::vector<double>& rate_cloud) {
  double t = 0.0;
  for (int k = 0; k < s.num_ues; ++k) {
    const double b = s.input_bits[u(k)];
    t = std::max({t, ratio(c[u(k)] * b, s.bw_ul * rate_edge[u(k)]),
                  ratio((1.0 - c[u(k)]) * b, s.bw_ul * rate_cloud[u(k)])});
  }
  return t;
}

double downlink_edge_latency(const Scenario& s, const std::vector<double>& c, const std::vector<double>& rate_edge,
                             const std::vector<double>& rate_cloud) {
  double t = 0.0;
  for (int k = 0; k < s.num_ues; ++k) {
    const double b = s.output_bits[u(k)];
    t = std::max({t, ratio(c[u(k)] * b, s.bw_dl * rate_edge[u(k)]),
                  ratio((1.0 - c[u(k)]) * b, s.bw_dl * rate_cloud[u(k)])});
  }
  return t;
}

double compression_rate_dl(const Scenario& s, const std::vector<cmat>& q_cloud, const cmat& omega, int en) {
  const int off = s.antenna_offset(en);
  const int n = s.antennas[u(en)];
  cmat S = omega;
  for (const auto& q : q_cloud)
    if (q.size() > 0) S += q.block(off, off, n, n);
  return numerics::logdet2(S) - numerics::logdet2(omega);
}

std::pair<double, double> downlink_rates(const Scenario& s, const ChannelSet& ch, const std::vector<cmat>& q_edge,
                                         const std::vector<cmat>& q_cloud, const std::vector<cmat>& omega_dl, int k) {
  const double total = ue_received(s, ch, q_edge, q_cloud, omega_dl, k);
  const double se = q_edge[u(k)].size() > 0 ? quad(ch.h_dl[u(k)][u(serving(s, k))], q_edge[u(k)]) : 0.0;
  const double sc = q_cloud[u(k)].size() > 0 ? quad(ch.h_dl_stacked[u(k)], q_cloud[u(k)]) : 0.0;
  auto rate = [&](double sig) {
    return numerics::psi(detail::as_matrix(sig), detail::as_matrix(std::max(total - sig, s.noise_dl)));
  };
  return {rate(se), rate(sc)};
}

LatencyBreakdown total_latency_cran(const LatencyTerms& t) {
  LatencyBreakdown b;
  b.ul_edge = t.ul_edge;
  b.ul_fronthaul = t.ul_fronthaul;
  b.exe_edge = max_of(t.exe_edge);
  b.exe_cloud = max_of(t.exe_cloud);
  b.dl_fronthaul = t.dl_fronthaul;
  b.dl_edge = t.dl_edge;
  b.total = t.ul_edge + std::max(b.exe_edge, t.ul_fronthaul + b.exe_cloud + t.dl_fronthaul) + t.dl_edge;
  return b;
}

UplinkPowers CranVariables::powers() const {
  UplinkPowers p;
  for (double x : pe_sqrt) p.edge.push_back(x * x);
  for (double x : pc_sqrt) p.cloud.push_back(x * x);
  return p;
}

std::vector<cmat> CranVariables::q_edge() const {
  std::vector<cmat> q;
  for (const auto& m : qe_sqrt) q.push_back(m.size() > 0 ? numerics::symmetrize(m * m.adjoint()) : cmat());
  return q;
}

std::vector<cmat> CranVariables::q_cloud() const {
  std::vector<cmat> q;
  for (const auto& m : qc_sqrt) q.push_back(numerics::symmetrize(m * m.adjoint()));
  return q;
}

CranAux update_aux_cran(const Scenario& s, const ChannelSet& ch, const CranVariables& v) {
  CranAux a;
  const auto p = v.powers();
  const auto qe = v.q_edge();
  const auto qc = v.q_cloud();
  const LatencyTerms& t = v.tau;
  const double rt_ul = std::sqrt(std::max(0.0, t.ul_edge));
  const double rt_dl = std::sqrt(std::max(0.0, t.dl_edge));
  for (int k = 0; k < s.num_ues; ++k) {
    const double c = clamp_split(v.c[u(k)]);
    a.exe_edge.push_back(std::sqrt(std::max(0.0, t.exe_edge[u(k)])) / c);
    a.exe_cloud.push_back(std::sqrt(std::max(0.0, t.exe_cloud[u(k)])) / (1.0 - c));
    a.ul_edge.push_back(rt_ul / c);
    a.ul_cloud.push_back(rt_ul / (1.0 - c));
    a.dl_edge.push_back(rt_dl / c);
    a.dl_cloud.push_back(rt_dl / (1.0 - c));
  }
  a.alpha_ul = t.ul_edge > 0.0 ? std::sqrt(std::max(0.0, t.ul_fronthaul)) / t.ul_edge : 0.0;
  a.alpha_dl = t.dl_edge > 0.0 ? std::sqrt(std::max(0.0, t.dl_fronthaul)) / t.dl_edge : 0.0;
  for (int i = 0; i < s.num_ens; ++i) {
    a.sigma_ul.push_back(en_covariance(s, ch, p, i, true) + v.omega_ul[u(i)]);
    const int off = s.antenna_offset(i);
    const int n = s.antennas[u(i)];
    cmat S = v.omega_dl[u(i)];
    for (const auto& q : qc) S += q.block(off, off, n, n);
    a.sigma_dl.push_back(S);
  }
  const cmat D_cp = cp_covariance(s, ch, p, v.omega_ul);
  for (int k = 0; k < s.num_ues; ++k) {
    const int i = serving(s, k);
    const cvec& h = ch.h_ul[u(i)][u(k)];
    auto ue = numerics::phi_optimal_aux(v.pe_sqrt[u(k)] * h, en_covariance(s, ch, p, i, false));
    a.gamma_ul_edge.push_back(ue.gamma);
    a.theta_ul_edge.push_back(ue.theta);
    auto uc = numerics::phi_optimal_aux(v.pc_sqrt[u(k)] * ch.h_ul_stacked[u(k)], D_cp);
    a.gamma_ul_cloud.push_back(uc.gamma);
    a.theta_ul_cloud.push_back(uc.theta);

    const cmat d = detail::as_matrix(ue_received(s, ch, qe, qc, v.omega_dl, k));
    const cvec& g = ch.h_dl[u(k)][u(i)];
    const cmat ce = v.qe_sqrt[u(k)].size() > 0 ? cmat(g.adjoint() * v.qe_sqrt[u(k)]) : cmat::Zero(1, g.size());
    auto de = numerics::phi_optimal_aux(ce, d);
    a.gamma_dl_edge.push_back(de.gamma);
    a.theta_dl_edge.push_back(de.theta);
    auto dc = numerics::phi_optimal_aux(ch.h_dl_stacked[u(k)].adjoint() * v.qc_sqrt[u(k)], d);
    a.gamma_dl_cloud.push_back(dc.gamma);
    a.theta_dl_cloud.push_back(dc.theta);
  }
  return a;
}

Surrogate surrogate_cran(const Scenario& s, const ChannelSet& ch, const CranVariables& v, const CranAux& aux,
                         std::optional<double> pin) {
  check_pin(pin);
  const bool edge = has_edge(pin);
  const int nu = s.num_ues, ne = s.num_ens, nt = s.total_antennas();
  const double lam = std::sqrt(units::time);
  const double w_ul = s.bw_ul * units::rate, w_dl = s.bw_dl * units::rate;
  const double floor = omega_floor * std::min(s.noise_ul, s.noise_dl);
  const LatencyTerms& tau = v.tau;

  Builder b;
  Surrogate sur;
  CranIds& id = sur.ids;
  id.ue.assign(u(nu), CranIds::Ue{});
  id.en.assign(u(ne), CranIds::En{});

  id.te_ul = b.nonneg("tau_ul_edge", tau.ul_edge * units::time);
  id.tf_ul = b.nonneg("tau_ul_fh", tau.ul_fronthaul * units::time);
  id.te_dl = b.nonneg("tau_dl_edge", tau.dl_edge * units::time);
  id.tf_dl = b.nonneg("tau_dl_fh", tau.dl_fronthaul * units::time);

  for (int k = 0; k < nu; ++k) {
    CranIds::Ue& x = id.ue[u(k)];
    const auto ku = u(k);
    const double ps = std::sqrt(s.power_ul);
    if (edge) {
      x.c = b.box(indexed("c", k), split_eps, 1.0 - split_eps, clamp_split(v.c[ku]));
      const double pe = std::clamp(v.pe_sqrt[ku], 0.0, ps);
      x.pe_sqrt = b.box(indexed("pe_sqrt", k), 0.0, ps, pe);
      x.pe = b.box(indexed("pe", k), 0.0, s.power_ul, pe * pe);
      b.p.add(indexed("pe_root", k), convex::SquareLe{b.p.coord(x.pe_sqrt), b.x(x.pe)});
      x.qe_sqrt = b.complex(indexed("qe_sqrt", k), v.qe_sqrt[ku]);
      x.r_ul_edge = b.nonneg(indexed("r_ul_edge", k), v.r_ul_edge[ku]);
      x.r_dl_edge = b.nonneg(indexed("r_dl_edge", k), v.r_dl_edge[ku]);
      x.f_edge = b.nonneg(indexed("f_edge", k), v.f_edge[ku] * units::rate);
      x.tx_edge = b.nonneg(indexed("tau_exe_edge", k), tau.exe_edge[ku] * units::time);
    }
    const double pc = std::clamp(v.pc_sqrt[ku], 0.0, ps);
    x.pc_sqrt = b.box(indexed("pc_sqrt", k), 0.0, ps, pc);
    x.pc = b.box(indexed("pc", k), 0.0, s.power_ul, pc * pc);
    b.p.add(indexed("pc_root", k), convex::SquareLe{b.p.coord(x.pc_sqrt), b.x(x.pc)});
    x.qc_sqrt = b.complex(indexed("qc_sqrt", k), v.qc_sqrt[ku]);
    x.r_ul_cloud = b.nonneg(indexed("r_ul_cloud", k), v.r_ul_cloud[ku]);
    x.r_dl_cloud = b.nonneg(indexed("r_dl_cloud", k), v.r_dl_cloud[ku]);
    x.f_cloud = b.nonneg(indexed("f_cloud", k), v.f_cloud[ku] * units::rate);
    x.tx_cloud = b.nonneg(indexed("tau_exe_cloud", k), tau.exe_cloud[ku] * units::time);
  }
  for (int i = 0; i < ne; ++i) {
    CranIds::En& e = id.en[u(i)];
    e.omega_ul = b.hermitian(indexed("omega_ul", i), v.omega_ul[u(i)], floor);
    e.omega_dl = b.hermitian(indexed("omega_dl", i), v.omega_dl[u(i)], floor);
    e.gamma_ul = b.nonneg(indexed("gamma_ul", i), v.gamma_ul[u(i)]);
    e.gamma_dl = b.nonneg(indexed("gamma_dl", i), v.gamma_dl[u(i)]);
  }

  auto c_of = [&](int k) { return edge ? b.x(id.ue[u(k)].c) : convex::AffineExpr(0.0); };
  auto one_minus_c = [&](int k) {
    convex::AffineExpr e = edge ? b.x(id.ue[u(k)].c, -1.0) : convex::AffineExpr();
    e.constant = 1.0;
    return e;
  };
  auto ratio_ge = [&](const std::string& label, double l, int t, const convex::AffineExpr& vv, double kappa,
                      int w) {
    convex::SqrtConcaveGe g;
    g.lambda = l * lam;
    g.tau = b.x(t);
    g.v = vv;
    g.kappa = kappa;
    g.w = b.x(w);
    b.p.add(label, g);
  };

  // Edge-link latencies and execution latencies.
  for (int k = 0; k < nu; ++k) {
    const CranIds::Ue& x = id.ue[u(k)];
    const auto ku = u(k);
    const double bi = s.input_bits[ku] * units::amount, bo = s.output_bits[ku] * units::amount;
    const double cyc = bi * s.cycles_per_bit[ku];
    if (edge) {
      ratio_ge(indexed("lat_ul_edge", k), aux.ul_edge[ku], id.te_ul, c_of(k), bi / w_ul, x.r_ul_edge);
      ratio_ge(indexed("lat_dl_edge", k), aux.dl_edge[ku], id.te_dl, c_of(k), bo / w_dl, x.r_dl_edge);
      ratio_ge(indexed("exe_edge", k), aux.exe_edge[ku], x.tx_edge, c_of(k), cyc, x.f_edge);
    }
    ratio_ge(indexed("lat_ul_cloud", k), aux.ul_cloud[ku], id.te_ul, one_minus_c(k), bi / w_ul, x.r_ul_cloud);
    ratio_ge(indexed("lat_dl_cloud", k), aux.dl_cloud[ku], id.te_dl, one_minus_c(k), bo / w_dl, x.r_dl_cloud);
    ratio_ge(indexed("exe_cloud", k), aux.exe_cloud[ku], x.tx_cloud, one_minus_c(k), cyc, x.f_cloud);
  }

  // Fronthaul: ratio form of tau_F >= W tau_E gamma / C_F plus the logdet
  // linearization of the compression rate.
  const double alpha_scale = 1.0 / std::sqrt(units::time);
  for (int i = 0; i < ne; ++i) {
    CranIds::En& e = id.en[u(i)];
    const int n = s.antennas[u(i)];
    for (int dir = 0; dir < 2; ++dir) {
      const bool ul = dir == 0;
      convex::SqrtConcaveGe g;
      g.lambda = (ul ? aux.alpha_ul : aux.alpha_dl) * alpha_scale;
      g.tau = b.x(ul ? id.tf_ul : id.tf_dl);
      g.v = b.x(ul ? id.te_ul : id.te_dl);
      g.rest = b.x(ul ? e.gamma_ul : e.gamma_dl, ul ? s.bw_ul / s.cf_ul : s.bw_dl / s.cf_dl);
      b.p.add(indexed(ul ? "fh_ul" : "fh_dl", i), g);
    }
    {
      const cmat& sig = aux.sigma_ul[u(i)];
      const cmat si = numerics::regularized_inverse(sig);
      convex::LogdetGe g;
      g.omega_var = e.omega_ul;
      g.rest.constant = numerics::logdet2(sig) - n / ln2 + s.noise_ul * si.trace().real() / ln2;
      for (int l = 0; l < nu; ++l) {
        const cvec& h = ch.h_ul[u(i)][u(l)];
        const double w = (h.adjoint() * si * h)(0, 0).real() / ln2;
        if (edge && serving(s, l) != i) g.rest.add(b.x(id.ue[u(l)].pe, w));
        g.rest.add(b.x(id.ue[u(l)].pc, w));
      }
      b.p.add_re_trace(g.rest, e.omega_ul, si, 1.0 / ln2);
      g.rest.add(b.x(e.gamma_ul, -1.0));
      b.p.add(indexed("compress_ul", i), g);
    }
    {
      const cmat& sig = aux.sigma_dl[u(i)];
      const cmat si = numerics::regularized_inverse(sig);
      const cmat E = selector(ch, i);
      const cmat W = E * si * E.adjoint() / ln2;
      convex::QuadTraceLe load;
      double load0 = 0.0;
      for (int l = 0; l < nu; ++l) {
        load.terms.push_back({id.ue[u(l)].qc_sqrt, W});
        load0 += (v.qc_sqrt[u(l)].adjoint() * W * v.qc_sqrt[u(l)]).trace().real();
      }
      e.dl_load = b.nonneg(indexed("dl_load", i), load0);
      load.rest = b.x(e.dl_load);
      b.p.add(indexed("dl_load", i), load);
      convex::LogdetGe g;
      g.omega_var = e.omega_dl;
      g.rest.constant = numerics::logdet2(sig) - n / ln2;
      g.rest.add(b.x(e.dl_load));
      b.p.add_re_trace(g.rest, e.omega_dl, si, 1.0 / ln2);
      g.rest.add(b.x(e.gamma_dl, -1.0));
      b.p.add(indexed("compress_dl", i), g);
    }
  }

  // Rates bounded by the matrix-FP surrogates.
  for (int k = 0; k < nu; ++k) {
    const CranIds::Ue& x = id.ue[u(k)];
    const auto ku = u(k);
    const int ik = serving(s, k);
    auto rate_le = [&](const std::string& label, int r, const detail::PhiAffine& phi) {
      if (phi.quad.empty()) {
        convex::AffineExpr e = b.x(r);
        e.add(phi.expr, -1.0);
        b.le(label, e, 0.0);
        return;
      }
      convex::QuadTraceLe q;
      q.terms = phi.quad;
      q.rest = phi.expr;
      q.rest.add(b.x(r), -1.0);
      b.p.add(label, q);
    };
    if (edge) {
      const int n = s.antennas[u(ik)];
      detail::PhiAffine ul(b.p, aux.gamma_ul_edge[ku], aux.theta_ul_edge[ku]);
      ul.signal(x.pe_sqrt, ch.h_ul[u(ik)][ku]);
      for (int l = 0; l < nu; ++l) {
        const cvec& h = ch.h_ul[u(ik)][u(l)];
        ul.noise(id.ue[u(l)].pe, h);
        ul.noise(id.ue[u(l)].pc, h);
      }
      ul.noise_constant(s.noise_ul * cmat::Identity(n, n));
      rate_le(indexed("rate_ul_edge", k), x.r_ul_edge, ul);
    }
    {
      detail::PhiAffine ul(b.p, aux.gamma_ul_cloud[ku], aux.theta_ul_cloud[ku]);
      ul.signal(x.pc_sqrt, ch.h_ul_stacked[ku]);
      for (int l = 0; l < nu; ++l) {
        if (edge) ul.noise(id.ue[u(l)].pe, ch.h_ul_tilde[u(l)]);
        ul.noise(id.ue[u(l)].pc, ch.h_ul_stacked[u(l)]);
      }
      for (int i = 0; i < ne; ++i) ul.noise(id.en[u(i)].omega_ul, selector(ch, i));
      ul.noise_constant(s.noise_ul * cmat::Identity(nt, nt));
      rate_le(indexed("rate_ul_cloud", k), x.r_ul_cloud, ul);
    }
    const cmat hk = ch.h_dl_stacked[ku].adjoint();
    auto dl_noise = [&](detail::PhiAffine& dl) {
      for (int l = 0; l < nu; ++l) {
        if (edge) dl.noise_root(id.ue[u(l)].qe_sqrt, ch.h_dl[ku][u(serving(s, l))].adjoint());
        dl.noise_root(id.ue[u(l)].qc_sqrt, hk);
      }
      for (int i = 0; i < ne; ++i) dl.noise(id.en[u(i)].omega_dl, ch.h_dl[ku][u(i)].adjoint());
      dl.noise_constant(detail::as_matrix(s.noise_dl));
    };
    if (edge) {
      detail::PhiAffine dl(b.p, aux.gamma_dl_edge[ku], aux.theta_dl_edge[ku]);
      dl.signal(x.qe_sqrt, ch.h_dl[ku][u(ik)].adjoint());
      dl_noise(dl);
      rate_le(indexed("rate_dl_edge", k), x.r_dl_edge, dl);
    }
    {
      detail::PhiAffine dl(b.p, aux.gamma_dl_cloud[ku], aux.theta_dl_cloud[ku]);
      dl.signal(x.qc_sqrt, hk);
      dl_noise(dl);
      rate_le(indexed("rate_dl_cloud", k), x.r_dl_cloud, dl);
    }
  }

  // Power and computing budgets.
  for (int k = 0; k < nu; ++k) {
    convex::AffineExpr e = b.x(id.ue[u(k)].pc);
    if (edge) e.add(b.x(id.ue[u(k)].pe));
    b.le(indexed("power_ul", k), e, s.power_ul);
  }
  for (int i = 0; i < ne; ++i) {
    const cmat E = selector(ch, i);
    const int n = s.antennas[u(i)];
    convex::QuadTraceLe q;
    if (edge)
      for (int k : s.served_sets[u(i)]) q.terms.push_back({id.ue[u(k)].qe_sqrt, cmat::Identity(n, n)});
    for (int k = 0; k < nu; ++k) q.terms.push_back({id.ue[u(k)].qc_sqrt, E * E.adjoint()});
    q.rest.constant = s.power_dl;
    b.p.add_re_trace(q.rest, id.en[u(i)].omega_dl, cmat::Identity(n, n), -1.0);
    b.p.add(indexed("power_dl", i), q);
    if (edge && !s.served_sets[u(i)].empty()) {
      convex::AffineExpr f;
      for (int k : s.served_sets[u(i)]) f.add(b.x(id.ue[u(k)].f_edge));
      b.le(indexed("edge_cycles", i), f, s.edge_cycles[u(i)] * units::rate);
    }
  }
  {
    convex::AffineExpr f;
    for (int k = 0; k < nu; ++k) f.add(b.x(id.ue[u(k)].f_cloud));
    b.le("cloud_cycles", f, s.cloud_cycles * units::rate);
  }

  // Epigraph of the total latency.
  const LatencyBreakdown cur = total_latency_cran(tau);
  id.branch = b.nonneg("branch", (cur.total - cur.ul_edge - cur.dl_edge) * units::time);
  id.total = b.nonneg("tau_T", cur.total * units::time);
  b.p.objective = id.total;
  for (int k = 0; k < nu; ++k) {
    if (edge) {
      convex::AffineExpr e = b.x(id.ue[u(k)].tx_edge);
      e.add(b.x(id.branch), -1.0);
      b.le(indexed("branch_edge", k), e, 0.0);
    }
    convex::AffineExpr e = b.x(id.tf_ul);
    e.add(b.x(id.ue[u(k)].tx_cloud)).add(b.x(id.tf_dl)).add(b.x(id.branch), -1.0);
    b.le(indexed("branch_cloud", k), e, 0.0);
  }
  {
    convex::AffineExpr e = b.x(id.te_ul);
    e.add(b.x(id.branch)).add(b.x(id.te_dl)).add(b.x(id.total), -1.0);
    b.le("total", e, 0.0);
  }
  sur.start = b.start();
  sur.problem = std::move(b.p);
  return sur;
}

CranVariables init_cran(const Scenario& s, const ChannelSet& ch, model::Rng& rng, std::optional<double> pin) {
  check_pin(pin);
  const bool edge = has_edge(pin);
  const int nu = s.num_ues, ne = s.num_ens, nt = s.total_antennas();
  CranVariables v;
  v.c.assign(u(nu), edge ? 0.5 : 0.0);
  v.pe_sqrt.assign(u(nu), edge ? std::sqrt(s.power_ul / 2.0) : 0.0);
  v.pc_sqrt.assign(u(nu), std::sqrt(edge ? s.power_ul / 2.0 : s.power_ul));
  std::vector<cmat> qe(u(nu)), qc(u(nu)), om(u(ne));
  for (int k = 0; k < nu; ++k) {
    const int n = s.antennas[u(serving(s, k))];
    const cmat ve = rng.complex_normal_matrix(n, n);
    const cmat vc = rng.complex_normal_matrix(nt, nt);
    qe[u(k)] = edge ? cmat(ve * ve.adjoint()) : cmat::Zero(n, n);
    qc[u(k)] = vc * vc.adjoint();
  }
  for (int i = 0; i < ne; ++i) {
    const int n = s.antennas[u(i)];
    const cmat vo = rng.complex_normal_matrix(n, n);
    om[u(i)] = vo * vo.adjoint();
  }
  auto power_ok = [&] {
    for (int i = 0; i < ne; ++i) {
      const int off = s.antenna_offset(i), n = s.antennas[u(i)];
      double p = om[u(i)].trace().real();
      for (int k : s.served_sets[u(i)]) p += qe[u(k)].trace().real();
      for (int k = 0; k < nu; ++k) p += qc[u(k)].block(off, off, n, n).trace().real();
      if (p > s.power_dl) return false;
    }
    return true;
  };
  while (!power_ok()) {
    for (auto& q : qe) q *= 0.5;
    for (auto& q : qc) q *= 0.5;
    for (auto& o : om) o *= 0.5;
  }
  const double floor = omega_floor * std::min(s.noise_ul, s.noise_dl);
  for (int k = 0; k < nu; ++k) {
    v.qe_sqrt.push_back(edge ? numerics::hermitian_sqrt(numerics::symmetrize(qe[u(k)])) : cmat());
    v.qc_sqrt.push_back(numerics::hermitian_sqrt(numerics::symmetrize(qc[u(k)])));
  }
  for (int i = 0; i < ne; ++i) {
    const int n = s.antennas[u(i)];
    v.omega_ul.push_back(s.noise_ul * cmat::Identity(n, n));
    // keep the random draw above the floor used by the subproblem
    v.omega_dl.push_back(numerics::symmetrize(om[u(i)]) + 2.0 * floor * cmat::Identity(n, n));
  }
  v.f_edge.assign(u(nu), 0.0);
  v.f_cloud.assign(u(nu), s.cloud_cycles / nu);
  if (edge)
    for (int k = 0; k < nu; ++k)
      v.f_edge[u(k)] = s.edge_cycles[u(serving(s, k))] / static_cast<double>(s.served_sets[u(serving(s, k))].size());
  tighten(s, ch, v);
  return v;
}

void tighten(const Scenario& s, const ChannelSet& ch, CranVariables& v) {
  const int nu = s.num_ues, ne = s.num_ens;
  const auto p = v.powers();
  const auto qe = v.q_edge();
  const auto qc = v.q_cloud();
  v.r_ul_edge.assign(u(nu), 0.0);
  v.r_ul_cloud.assign(u(nu), 0.0);
  v.r_dl_edge.assign(u(nu), 0.0);
  v.r_dl_cloud.assign(u(nu), 0.0);
  v.gamma_ul.assign(u(ne), 0.0);
  v.gamma_dl.assign(u(ne), 0.0);
  for (int k = 0; k < nu; ++k) {
    v.r_ul_edge[u(k)] = uplink_edge_rate(s, ch, p, k);
    v.r_ul_cloud[u(k)] = uplink_cloud_rate(s, ch, p, v.omega_ul, k);
    std::tie(v.r_dl_edge[u(k)], v.r_dl_cloud[u(k)]) = downlink_rates(s, ch, qe, qc, v.omega_dl, k);
  }
  for (int i = 0; i < ne; ++i) {
    v.gamma_ul[u(i)] = compression_rate_ul(s, ch, p, v.omega_ul[u(i)], i);
    v.gamma_dl[u(i)] = compression_rate_dl(s, qc, v.omega_dl[u(i)], i);
  }
  LatencyTerms& t = v.tau;
  t.ul_edge = uplink_edge_latency(s, v.c, v.r_ul_edge, v.r_ul_cloud);
  t.dl_edge = downlink_edge_latency(s, v.c, v.r_dl_edge, v.r_dl_cloud);
  t.ul_fronthaul = fronthaul_latency_ul(s, t.ul_edge, v.gamma_ul);
  t.dl_fronthaul = fronthaul_latency_dl(s, t.dl_edge, v.gamma_dl);
  t.exe_edge.assign(u(nu), 0.0);
  t.exe_cloud.assign(u(nu), 0.0);
  for (int k = 0; k < nu; ++k) {
    const double cyc = s.input_bits[u(k)] * s.cycles_per_bit[u(k)];
    t.exe_edge[u(k)] = ratio(v.c[u(k)] * cyc, v.f_edge[u(k)]);
    t.exe_cloud[u(k)] = ratio((1.0 - v.c[u(k)]) * cyc, v.f_cloud[u(k)]);
  }
}

double residual_cran(const Scenario& s, const ChannelSet& ch, const CranVariables& v) {
  const int nu = s.num_ues, ne = s.num_ens;
  const auto p = v.powers();
  const auto qe = v.q_edge();
  const auto qc = v.q_cloud();
  const LatencyTerms& t = v.tau;
  double r = 0.0;
  for (int k = 0; k < nu; ++k) {
    const auto ku = u(k);
    const double c = v.c[ku];
    const double bi = s.input_bits[ku], bo = s.output_bits[ku], cyc = bi * s.cycles_per_bit[ku];
    const auto [dl_e, dl_c] = downlink_rates(s, ch, qe, qc, v.omega_dl, k);
    r = std::max({r, rel_ge(t.ul_edge, ratio(c * bi, s.bw_ul * v.r_ul_edge[ku])),
                  rel_ge(t.ul_edge, ratio((1.0 - c) * bi, s.bw_ul * v.r_ul_cloud[ku])),
                  rel_ge(t.dl_edge, ratio(c * bo, s.bw_dl * v.r_dl_edge[ku])),
                  rel_ge(t.dl_edge, ratio((1.0 - c) * bo, s.bw_dl * v.r_dl_cloud[ku])),
                  rel_ge(t.exe_edge[ku], ratio(c * cyc, v.f_edge[ku])),
                  rel_ge(t.exe_cloud[ku], ratio((1.0 - c) * cyc, v.f_cloud[ku])),
                  rel_ge(uplink_edge_rate(s, ch, p, k), v.r_ul_edge[ku]),
                  rel_ge(uplink_cloud_rate(s, ch, p, v.omega_ul, k), v.r_ul_cloud[ku]),
                  rel_ge(dl_e, v.r_dl_edge[ku]), rel_ge(dl_c, v.r_dl_cloud[ku]),
                  rel_ge(s.power_ul, p.edge[ku] + p.cloud[ku]), std::max(0.0, -c), std::max(0.0, c - 1.0)});
    for (double a : {v.pe_sqrt[ku], v.pc_sqrt[ku], v.f_edge[ku], v.f_cloud[ku]}) r = std::max(r, std::max(0.0, -a));
  }
  double fc = 0.0;
  for (double f : v.f_cloud) fc += f;
  r = std::max(r, rel_ge(s.cloud_cycles, fc));
  for (int i = 0; i < ne; ++i) {
    const int off = s.antenna_offset(i), n = s.antennas[u(i)];
    r = std::max({r, rel_ge(t.ul_fronthaul, s.bw_ul * t.ul_edge * compression_rate_ul(s, ch, p, v.omega_ul[u(i)], i) / s.cf_ul),
                  rel_ge(t.dl_fronthaul, s.bw_dl * t.dl_edge * compression_rate_dl(s, qc, v.omega_dl[u(i)], i) / s.cf_dl)});
    double pw = v.omega_dl[u(i)].trace().real(), fe = 0.0;
    for (int k : s.served_sets[u(i)]) {
      if (qe[u(k)].size() > 0) pw += qe[u(k)].trace().real();
      fe += v.f_edge[u(k)];
    }
    for (const auto& q : qc) pw += q.block(off, off, n, n).trace().real();
    r = std::max({r, rel_ge(s.power_dl, pw), rel_ge(s.edge_cycles[u(i)], fe)});
    for (const cmat* o : {&v.omega_ul[u(i)], &v.omega_dl[u(i)]})
      r = std::max(r, std::max(0.0, -numerics::min_eigenvalue(*o)) / std::max(1.0, o->trace().real()));
  }
  return r;
}

LatencyBreakdown latency(const CranVariables& v) { return total_latency_cran(v.tau); }

namespace {

double quad_value(const convex::ConvexProblem& P, const rvec& x, const convex::QuadTraceLe& q) {
  double v = 0.0;
  for (const auto& t : q.terms) {
    const cmat X = convex::complex_value(P, x, t.var);
    v += (X.adjoint() * t.weight * X).trace().real();
  }
  return v;
}

// Moves the tight current point strictly inside the surrogate so the solver
// can skip phase one. Powers and cycle shares shrink a little, then rates,
// compression rates, latencies and the epigraph variables take a margin.
rvec interior_start(const Scenario& s, const Surrogate& sur) {
  constexpr double eps = 5e-2;
  const auto& P = sur.problem;
  const CranIds& id = sur.ids;
  rvec x = sur.start;
  auto at = [&](int var) -> double& { return x(P.coord(var)); };
  const double ps = std::sqrt(s.power_ul);
  for (const auto& e : id.ue) {
    for (auto [root, pw] : {std::pair{e.pe_sqrt, e.pe}, std::pair{e.pc_sqrt, e.pc}}) {
      if (root < 0) continue;
      at(root) = std::clamp((1.0 - eps) * at(root), 1e-6 * ps, (1.0 - eps) * ps);
      at(pw) = (1.0 + eps) * at(root) * at(root);
    }
    for (int q : {e.qe_sqrt, e.qc_sqrt})
      if (q >= 0) convex::set_complex(P, x, q, (1.0 - eps) * convex::complex_value(P, x, q));
    for (int f : {e.f_edge, e.f_cloud})
      if (f >= 0) at(f) = std::max((1.0 - eps) * at(f), 1e-9);
    if (e.c >= 0) at(e.c) = std::clamp(at(e.c), 2.0 * split_eps, 1.0 - 2.0 * split_eps);
  }

  auto raise = [&](int var, double need) { at(var) = std::max(at(var), need); };
  for (const auto& con : P.constraints) {
    const bool rate = con.label.rfind("rate_", 0) == 0;
    if (const auto* a = std::get_if<convex::AffineLe>(&con.body); a && rate) {
      const int r = a->expr.terms.front().first;
      const double phi = x(r) - a->expr.eval(x);
      if (phi > 0.0) x(r) = (1.0 - eps) * phi;
    } else if (const auto* q = std::get_if<convex::QuadTraceLe>(&con.body); q && rate) {
      const int r = q->rest.terms.back().first;  // added last with coefficient -1
      const double phi = q->rest.eval(x) - quad_value(P, x, *q) + x(r);
      if (phi > 0.0) x(r) = (1.0 - eps) * phi;
    }
  }
  for (const auto& con : P.constraints) {
    if (const auto* q = std::get_if<convex::QuadTraceLe>(&con.body); q && con.label.rfind("dl_load", 0) == 0) {
      const int load = q->rest.terms.front().first;
      x(load) = (1.0 + eps) * quad_value(P, x, *q) + 1e-12;
    }
  }
  for (const auto& con : P.constraints) {
    if (const auto* g = std::get_if<convex::LogdetGe>(&con.body)) {
      const double slack = numerics::logdet2(convex::hermitian_value(P, x, g->omega_var)) - g->rest.eval(x);
      const int gamma = g->rest.terms.back().first;
      x(gamma) += std::max(0.0, -slack) + eps * std::max(x(gamma), 1e-3);
    }
  }
  for (const auto& con : P.constraints) {
    if (const auto* g = std::get_if<convex::SqrtConcaveGe>(&con.body)) {
      if (!(g->lambda > 0.0)) continue;
      double rhs = g->lambda * g->lambda * g->v.eval(x) + g->rest.eval(x);
      if (g->kappa > 0.0) {
        const double w = g->w.eval(x);
        if (!(w > 0.0)) continue;
        rhs += g->kappa / w;
      }
      const int tau = g->tau.terms.front().first;
      if (rhs > 0.0) x(tau) = std::max(x(tau), std::pow((1.0 + eps) * rhs / (2.0 * g->lambda), 2));
    }
  }
  double branch = 0.0;
  for (const auto& e : id.ue) {
    if (e.tx_edge >= 0) branch = std::max(branch, at(e.tx_edge));
    branch = std::max(branch, at(id.tf_ul) + at(e.tx_cloud) + at(id.tf_dl));
  }
  raise(id.branch, (1.0 + eps) * branch);
  raise(id.total, (1.0 + eps) * (at(id.te_ul) + at(id.branch) + at(id.te_dl)));
  return x;
}

}  // namespace

SolveReport<CranVariables> algorithm3(const Scenario& s, const ChannelSet& ch, const AlgoConfig& cfg) {
  detail::check_config(cfg);
  check_pin(cfg.pinned_split);
  s.validate();
  const auto pin = cfg.pinned_split;
  const bool edge = has_edge(pin);
  model::Rng rng(cfg.seed);
  CranVariables v0 = init_cran(s, ch, rng, pin);
  const double r0 = residual_cran(s, ch, v0);
  auto step = [&](const CranVariables& v) {
    detail::StepOutcome<CranVariables> out;
    const Surrogate sur = surrogate_cran(s, ch, v, update_aux_cran(s, ch, v), pin);
    const convex::ConvexSolution sol = convex::solve(sur.problem, cfg.solver, interior_start(s, sur));
    out.newton = sol.newton_steps;
    if (sol.status == convex::Status::infeasible || sol.residual > cfg.solver.feas_tol) {
      out.message = std::string("convex step ") + convex::status_name(sol.status);
      return out;
    }
    const auto& P = sur.problem;
    const rvec& x = sol.x;
    auto scalar = [&](int id, double scale) { return id < 0 ? 0.0 : std::max(0.0, x(P.coord(id))) * scale; };
    auto root = [&](int id) {
      const cmat r = convex::complex_value(P, x, id);
      return numerics::hermitian_sqrt(numerics::symmetrize(r * r.adjoint()));
    };
    CranVariables n;
    const CranIds& id = sur.ids;
    for (int k = 0; k < s.num_ues; ++k) {
      const CranIds::Ue& e = id.ue[u(k)];
      n.c.push_back(edge ? std::clamp(x(P.coord(e.c)), 0.0, 1.0) : 0.0);
      n.pe_sqrt.push_back(scalar(e.pe_sqrt, 1.0));
      n.pc_sqrt.push_back(scalar(e.pc_sqrt, 1.0));
      n.qe_sqrt.push_back(edge ? root(e.qe_sqrt) : cmat());
      n.qc_sqrt.push_back(root(e.qc_sqrt));
      n.f_edge.push_back(scalar(e.f_edge, 1.0 / units::rate));
      n.f_cloud.push_back(scalar(e.f_cloud, 1.0 / units::rate));
      n.r_ul_edge.push_back(scalar(e.r_ul_edge, 1.0));
      n.r_ul_cloud.push_back(scalar(e.r_ul_cloud, 1.0));
      n.r_dl_edge.push_back(scalar(e.r_dl_edge, 1.0));
      n.r_dl_cloud.push_back(scalar(e.r_dl_cloud, 1.0));
      n.tau.exe_edge.push_back(scalar(e.tx_edge, 1.0 / units::time));
      n.tau.exe_cloud.push_back(scalar(e.tx_cloud, 1.0 / units::time));
    }
    for (int i = 0; i < s.num_ens; ++i) {
      const CranIds::En& e = id.en[u(i)];
      n.omega_ul.push_back(numerics::symmetrize(convex::hermitian_value(P, x, e.omega_ul)));
      n.omega_dl.push_back(numerics::symmetrize(convex::hermitian_value(P, x, e.omega_dl)));
      n.gamma_ul.push_back(scalar(e.gamma_ul, 1.0));
      n.gamma_dl.push_back(scalar(e.gamma_dl, 1.0));
    }
    n.tau.ul_edge = scalar(id.te_ul, 1.0 / units::time);
    n.tau.ul_fronthaul = scalar(id.tf_ul, 1.0 / units::time);
    n.tau.dl_edge = scalar(id.te_dl, 1.0 / units::time);
    n.tau.dl_fronthaul = scalar(id.tf_dl, 1.0 / units::time);
    out.residual = residual_cran(s, ch, n);
    tighten(s, ch, n);
    out.next = std::move(n);
    out.ok = true;
    return out;
  };
  return detail::run_alternating(std::move(v0), r0, cfg, step, [](const CranVariables& v) { return latency(v); });
}

}  // namespace cecran::cran
