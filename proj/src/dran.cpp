#include "cecran/dran.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alternating.hpp"
#include "builder.hpp"
#include "cecran/numerics.hpp"
#include "fp_affine.hpp"

namespace cecran::dran {

using detail::Builder;
using detail::indexed;
using detail::rel_ge;

namespace {

std::size_t u(int k) { return static_cast<std::size_t>(k); }

int serving(const Scenario& s, int k) { return s.association[u(k)]; }

const cvec& h_ul(const ChannelSet& ch, int en, int k) { return ch.h_ul[u(en)][u(k)]; }
const cvec& h_dl(const ChannelSet& ch, int k, int en) { return ch.h_dl[u(k)][u(en)]; }

double clamp_split(double c) { return std::clamp(c, split_eps, 1.0 - split_eps); }

bool has_edge(std::optional<double> pin) { return !pin || *pin != 0.0; }
bool has_cloud(std::optional<double> pin) { return !pin || *pin != 1.0; }

double ratio(double num, double den) {
  if (num <= 0.0) return 0.0;
  if (!(den > 0.0)) return latency_sentinel;
  return std::min(num / den, latency_sentinel);
}

void check_pin(std::optional<double> pin) {
  if (pin && *pin != 0.0 && *pin != 1.0) throw std::invalid_argument("pinned split must be 0 or 1");
}

// Computation and fronthaul part shared by both access schemes, plus the
// epigraph of the max-latency objective. Radio latencies te_ul/te_dl must
// already be declared in ids.
void add_compute_part(Builder& b, const Scenario& s, const ComputeVariables& v, const TdmaAux& aux,
                      std::optional<double> pin, std::vector<UeIds>& ids, int& total) {
  const int nu = s.num_ues;
  const double lam = std::sqrt(units::time);
  double t_start = 0.0;
  for (int k = 0; k < nu; ++k) {
    UeIds& id = ids[u(k)];
    const auto& tau = v.tau[u(k)];
    const double bi = s.input_bits[u(k)] * units::amount;
    const double bo = s.output_bits[u(k)] * units::amount;
    const double cyc = bi * s.cycles_per_bit[u(k)];
    convex::AffineExpr c_expr, one_minus_c;
    if (pin) {
      c_expr = convex::AffineExpr(*pin);
      one_minus_c = convex::AffineExpr(1.0 - *pin);
    } else {
      id.c = b.box(indexed("c", k), split_eps, 1.0 - split_eps, clamp_split(v.c[u(k)]));
      c_expr = b.x(id.c);
      one_minus_c = b.x(id.c, -1.0);
      one_minus_c.constant = 1.0;
    }
    double edge_path = 0.0, cloud_path = 0.0;
    if (has_edge(pin)) {
      id.f_edge = b.nonneg(indexed("f_edge", k), v.f_edge[u(k)] * units::rate);
      id.tx_edge = b.nonneg(indexed("tau_exe_edge", k), tau.exe_edge * units::time);
      edge_path = tau.exe_edge * units::time;
      convex::SqrtConcaveGe e;
      e.lambda = aux.exe_edge[u(k)] * lam;
      e.tau = b.x(id.tx_edge);
      e.v = c_expr;
      e.kappa = cyc;
      e.w = b.x(id.f_edge);
      b.p.add(indexed("exe_edge", k), e);
    }
    if (has_cloud(pin)) {
      id.f_cloud = b.nonneg(indexed("f_cloud", k), v.f_cloud[u(k)] * units::rate);
      id.cf_ul = b.nonneg(indexed("cf_ul", k), v.cf_ul[u(k)] * units::rate);
      id.cf_dl = b.nonneg(indexed("cf_dl", k), v.cf_dl[u(k)] * units::rate);
      id.tf_ul = b.nonneg(indexed("tau_fh_ul", k), tau.ul_fronthaul * units::time);
      id.tf_dl = b.nonneg(indexed("tau_fh_dl", k), tau.dl_fronthaul * units::time);
      id.tx_cloud = b.nonneg(indexed("tau_exe_cloud", k), tau.exe_cloud * units::time);
      cloud_path = (tau.ul_fronthaul + tau.exe_cloud + tau.dl_fronthaul) * units::time;
      auto ratio_con = [&](const char* label, double l, int t, double kappa, int w) {
        convex::SqrtConcaveGe e;
        e.lambda = l * lam;
        e.tau = b.x(t);
        e.v = one_minus_c;
        e.kappa = kappa;
        e.w = b.x(w);
        b.p.add(indexed(label, k), e);
      };
      ratio_con("fh_ul", aux.fh_ul[u(k)], id.tf_ul, bi, id.cf_ul);
      ratio_con("fh_dl", aux.fh_dl[u(k)], id.tf_dl, bo, id.cf_dl);
      ratio_con("exe_cloud", aux.exe_cloud[u(k)], id.tx_cloud, cyc, id.f_cloud);
    }
    const double branch = std::max(edge_path, cloud_path);
    id.branch = b.nonneg(indexed("branch", k), branch);
    if (has_edge(pin)) {
      convex::AffineExpr e = b.x(id.tx_edge);
      e.add(b.x(id.branch), -1.0);
      b.le(indexed("branch_edge", k), e, 0.0);
    }
    if (has_cloud(pin)) {
      convex::AffineExpr e = b.x(id.tf_ul);
      e.add(b.x(id.tx_cloud)).add(b.x(id.tf_dl)).add(b.x(id.branch), -1.0);
      b.le(indexed("branch_cloud", k), e, 0.0);
    }
    t_start = std::max(t_start, (tau.ul_edge + tau.dl_edge) * units::time + branch);
  }
  total = b.nonneg("tau_T", t_start);
  b.p.objective = total;
  for (int k = 0; k < nu; ++k) {
    const UeIds& id = ids[u(k)];
    convex::AffineExpr e = b.x(id.te_ul);
    e.add(b.x(id.branch)).add(b.x(id.te_dl)).add(b.x(total), -1.0);
    b.le(indexed("total", k), e, 0.0);
  }
  for (int i = 0; i < s.num_ens; ++i) {
    const auto& served = s.served_sets[u(i)];
    if (served.empty()) continue;
    convex::AffineExpr fe, cu, cd;
    for (int k : served) {
      if (has_edge(pin)) fe.add(b.x(ids[u(k)].f_edge));
      if (has_cloud(pin)) {
        cu.add(b.x(ids[u(k)].cf_ul));
        cd.add(b.x(ids[u(k)].cf_dl));
      }
    }
    if (has_edge(pin)) b.le(indexed("edge_cycles", i), fe, s.edge_cycles[u(i)] * units::rate);
    if (has_cloud(pin)) {
      b.le(indexed("fronthaul_ul", i), cu, s.cf_ul * units::rate);
      b.le(indexed("fronthaul_dl", i), cd, s.cf_dl * units::rate);
    }
  }
  if (has_cloud(pin)) {
    convex::AffineExpr fc;
    for (int k = 0; k < nu; ++k) fc.add(b.x(ids[u(k)].f_cloud));
    b.le("cloud_cycles", fc, s.cloud_cycles * units::rate);
  }
}

// Reads the compute part back in SI units.
void unpack_compute(const convex::ConvexProblem& p, const rvec& x, const std::vector<UeIds>& ids,
                    std::optional<double> pin, ComputeVariables& v) {
  const auto nu = ids.size();
  v.c.assign(nu, pin.value_or(0.0));
  v.f_edge.assign(nu, 0.0);
  v.f_cloud.assign(nu, 0.0);
  v.cf_ul.assign(nu, 0.0);
  v.cf_dl.assign(nu, 0.0);
  v.tau.assign(nu, UeLatency{});
  auto val = [&](int id, double scale) { return id < 0 ? 0.0 : std::max(0.0, x(p.coord(id))) * scale; };
  for (std::size_t k = 0; k < nu; ++k) {
    const UeIds& id = ids[k];
    if (id.c >= 0) v.c[k] = std::clamp(x(p.coord(id.c)), 0.0, 1.0);
    v.f_edge[k] = val(id.f_edge, 1.0 / units::rate);
    v.f_cloud[k] = val(id.f_cloud, 1.0 / units::rate);
    v.cf_ul[k] = val(id.cf_ul, 1.0 / units::rate);
    v.cf_dl[k] = val(id.cf_dl, 1.0 / units::rate);
    UeLatency& t = v.tau[k];
    t.ul_edge = val(id.te_ul, 1.0 / units::time);
    t.dl_edge = val(id.te_dl, 1.0 / units::time);
    t.ul_fronthaul = val(id.tf_ul, 1.0 / units::time);
    t.dl_fronthaul = val(id.tf_dl, 1.0 / units::time);
    t.exe_edge = val(id.tx_edge, 1.0 / units::time);
    t.exe_cloud = val(id.tx_cloud, 1.0 / units::time);
  }
}

void tighten_compute(const Scenario& s, ComputeVariables& v) {
  for (int k = 0; k < s.num_ues; ++k) {
    const auto ku = u(k);
    UeLatency& t = v.tau[ku];
    const double c = v.c[ku];
    t.ul_fronthaul = fronthaul_latency_dran((1.0 - c) * s.input_bits[ku], v.cf_ul[ku]);
    t.dl_fronthaul = fronthaul_latency_dran((1.0 - c) * s.output_bits[ku], v.cf_dl[ku]);
    t.exe_edge = exec_latency_edge(c, s.input_bits[ku], s.cycles_per_bit[ku], v.f_edge[ku]);
    t.exe_cloud = exec_latency_cloud(c, s.input_bits[ku], s.cycles_per_bit[ku], v.f_cloud[ku]);
  }
}

double residual_compute(const Scenario& s, const ComputeVariables& v) {
  double r = 0.0;
  for (int k = 0; k < s.num_ues; ++k) {
    const auto ku = u(k);
    const UeLatency& t = v.tau[ku];
    const double c = v.c[ku];
    const double bi = s.input_bits[ku], bo = s.output_bits[ku], cyc = bi * s.cycles_per_bit[ku];
    r = std::max({r, rel_ge(t.ul_fronthaul, ratio((1.0 - c) * bi, v.cf_ul[ku])),
                  rel_ge(t.dl_fronthaul, ratio((1.0 - c) * bo, v.cf_dl[ku])),
                  rel_ge(t.exe_edge, ratio(c * cyc, v.f_edge[ku])),
                  rel_ge(t.exe_cloud, ratio((1.0 - c) * cyc, v.f_cloud[ku])), std::max(0.0, -c), std::max(0.0, c - 1.0)});
    for (double a : {v.f_edge[ku], v.f_cloud[ku], v.cf_ul[ku], v.cf_dl[ku]}) r = std::max(r, std::max(0.0, -a));
  }
  double fc = 0.0;
  for (int k = 0; k < s.num_ues; ++k) fc += v.f_cloud[u(k)];
  r = std::max(r, rel_ge(s.cloud_cycles, fc));
  for (int i = 0; i < s.num_ens; ++i) {
    double fe = 0.0, cu = 0.0, cd = 0.0;
    for (int k : s.served_sets[u(i)]) {
      fe += v.f_edge[u(k)];
      cu += v.cf_ul[u(k)];
      cd += v.cf_dl[u(k)];
    }
    r = std::max({r, rel_ge(s.edge_cycles[u(i)], fe), rel_ge(s.cf_ul, cu), rel_ge(s.cf_dl, cd)});
  }
  return r;
}

void init_compute(const Scenario& s, std::optional<double> pin, ComputeVariables& v) {
  const auto nu = static_cast<std::size_t>(s.num_ues);
  v.c.assign(nu, pin.value_or(0.5));
  v.f_edge.assign(nu, 0.0);
  v.f_cloud.assign(nu, 0.0);
  v.cf_ul.assign(nu, 0.0);
  v.cf_dl.assign(nu, 0.0);
  v.tau.assign(nu, UeLatency{});
  for (int k = 0; k < s.num_ues; ++k) {
    const auto ku = u(k);
    const int i = serving(s, k);
    const double share = static_cast<double>(s.served_sets[u(i)].size());
    if (has_edge(pin)) v.f_edge[ku] = s.edge_cycles[u(i)] / share;
    if (has_cloud(pin)) {
      v.f_cloud[ku] = s.cloud_cycles / static_cast<double>(nu);
      v.cf_ul[ku] = s.cf_ul / share;
      v.cf_dl[ku] = s.cf_dl / share;
    }
  }
}

double uplink_time(const Scenario& s, int k, double rate_per_s) { return ratio(s.input_bits[u(k)], rate_per_s); }
double downlink_time(const Scenario& s, int k, double rate_per_s) { return ratio(s.output_bits[u(k)], rate_per_s); }

void check_inputs(const Scenario& s, const ChannelSet& ch) {
  s.validate();
  if (static_cast<int>(ch.h_ul.size()) != s.num_ens || static_cast<int>(ch.h_dl.size()) != s.num_ues)
    throw std::invalid_argument("channels do not match the scenario");
}

}  // namespace

double UeLatency::total() const {
  return ul_edge + std::max(exe_edge, ul_fronthaul + exe_cloud + dl_fronthaul) + dl_edge;
}

double tdma_rate_ul(const Scenario& s, const ChannelSet& ch, int k) {
  return std::log2(1.0 + (s.power_ul / s.noise_ul) * h_ul(ch, serving(s, k), k).squaredNorm());
}

double tdma_rate_dl(const Scenario& s, const ChannelSet& ch, int k) {
  return std::log2(1.0 + (s.power_dl / s.noise_dl) * h_dl(ch, k, serving(s, k)).squaredNorm());
}

double exec_latency_edge(double c, double bits, double cycles_per_bit, double f_alloc) {
  return ratio(c * bits * cycles_per_bit, f_alloc);
}

double exec_latency_cloud(double c, double bits, double cycles_per_bit, double f_alloc) {
  return ratio((1.0 - c) * bits * cycles_per_bit, f_alloc);
}

double fronthaul_latency_dran(double bits, double cap_alloc) { return ratio(bits, cap_alloc); }

LatencyBreakdown total_latency_dran(const std::vector<UeLatency>& per_ue) {
  LatencyBreakdown b;
  double best = -1.0;
  for (const auto& t : per_ue) {
    const double v = t.total();
    if (v > best) {
      best = v;
      b = {t.ul_edge, t.ul_fronthaul, t.exe_edge, t.exe_cloud, t.dl_fronthaul, t.dl_edge, v};
    }
  }
  if (per_ue.empty()) b.total = 0.0;
  return b;
}

double noma_rate_ul(const Scenario& s, const ChannelSet& ch, const std::vector<double>& powers, int k) {
  const int i = serving(s, k);
  const cvec& h = h_ul(ch, i, k);
  const auto n = h.size();
  cmat noise = s.noise_ul * cmat::Identity(n, n);
  for (int l = 0; l < s.num_ues; ++l)
    if (l != k) noise += powers[u(l)] * h_ul(ch, i, l) * h_ul(ch, i, l).adjoint();
  return numerics::psi(powers[u(k)] * h * h.adjoint(), noise);
}

double noma_rate_dl(const Scenario& s, const ChannelSet& ch, const std::vector<cmat>& covariances, int k) {
  const cvec& h = h_dl(ch, k, serving(s, k));
  double noise = s.noise_dl;
  for (int l = 0; l < s.num_ues; ++l) {
    if (l == k) continue;
    const cvec& g = h_dl(ch, k, serving(s, l));
    noise += (g.adjoint() * covariances[u(l)] * g)(0, 0).real();
  }
  const double sig = std::max(0.0, (h.adjoint() * covariances[u(k)] * h)(0, 0).real());
  return numerics::psi(detail::as_matrix(sig), detail::as_matrix(noise));
}

std::vector<double> NomaVariables::powers() const {
  std::vector<double> p;
  p.reserve(p_sqrt.size());
  for (double v : p_sqrt) p.push_back(v * v);
  return p;
}

std::vector<cmat> NomaVariables::covariances() const {
  std::vector<cmat> q;
  q.reserve(q_sqrt.size());
  for (const auto& m : q_sqrt) q.push_back(numerics::symmetrize(m * m.adjoint()));
  return q;
}

TdmaAux update_aux_tdma(const ComputeVariables& v) {
  TdmaAux a;
  const auto nu = v.c.size();
  a.fh_ul.resize(nu);
  a.fh_dl.resize(nu);
  a.exe_edge.resize(nu);
  a.exe_cloud.resize(nu);
  for (std::size_t k = 0; k < nu; ++k) {
    const double c = clamp_split(v.c[k]);
    const UeLatency& t = v.tau[k];
    a.fh_ul[k] = std::sqrt(std::max(0.0, t.ul_fronthaul)) / (1.0 - c);
    a.fh_dl[k] = std::sqrt(std::max(0.0, t.dl_fronthaul)) / (1.0 - c);
    a.exe_edge[k] = std::sqrt(std::max(0.0, t.exe_edge)) / c;
    a.exe_cloud[k] = std::sqrt(std::max(0.0, t.exe_cloud)) / (1.0 - c);
  }
  return a;
}

NomaAux update_aux_noma(const Scenario& s, const ChannelSet& ch, const NomaVariables& v) {
  NomaAux a;
  a.lambda = update_aux_tdma(v);
  const auto p = v.powers();
  const auto q = v.covariances();
  for (int k = 0; k < s.num_ues; ++k) {
    const int i = serving(s, k);
    const cvec& h = h_ul(ch, i, k);
    const auto n = h.size();
    cmat D = s.noise_ul * cmat::Identity(n, n);
    for (int l = 0; l < s.num_ues; ++l) D += p[u(l)] * h_ul(ch, i, l) * h_ul(ch, i, l).adjoint();
    const cmat C = v.p_sqrt[u(k)] * h;
    auto ul = numerics::phi_optimal_aux(C, D);
    a.gamma_ul.push_back(ul.gamma);
    a.theta_ul.push_back(ul.theta);

    const cvec& g = h_dl(ch, k, i);
    double d = s.noise_dl;
    for (int l = 0; l < s.num_ues; ++l) {
      const cvec& gl = h_dl(ch, k, serving(s, l));
      d += (gl.adjoint() * q[u(l)] * gl)(0, 0).real();
    }
    const cmat Cd = g.adjoint() * v.q_sqrt[u(k)];
    auto dl = numerics::phi_optimal_aux(Cd, detail::as_matrix(d));
    a.gamma_dl.push_back(dl.gamma);
    a.theta_dl.push_back(dl.theta);
  }
  return a;
}

Surrogate surrogate_tdma(const Scenario& s, const ChannelSet& ch, const TdmaVariables& v, const TdmaAux& aux,
                         std::optional<double> pin) {
  check_pin(pin);
  Builder b;
  Surrogate sur;
  sur.ue.assign(u(s.num_ues), UeIds{});
  convex::AffineExpr sum_ul, sum_dl;
  const double w_ul = s.bw_ul * units::rate, w_dl = s.bw_dl * units::rate;
  for (int k = 0; k < s.num_ues; ++k) {
    UeIds& id = sur.ue[u(k)];
    id.u_ul = b.box(indexed("u_ul", k), u_floor, 1.0, std::max(v.u_ul[u(k)], u_floor));
    id.u_dl = b.box(indexed("u_dl", k), u_floor, 1.0, std::max(v.u_dl[u(k)], u_floor));
    id.te_ul = b.nonneg(indexed("tau_ul", k), v.tau[u(k)].ul_edge * units::time);
    id.te_dl = b.nonneg(indexed("tau_dl", k), v.tau[u(k)].dl_edge * units::time);
    const double bi = s.input_bits[u(k)] * units::amount, bo = s.output_bits[u(k)] * units::amount;
    b.p.add(indexed("edge_ul", k),
            convex::Hyperbolic{b.x(id.te_ul), b.x(id.u_ul), bi / (w_ul * tdma_rate_ul(s, ch, k))});
    b.p.add(indexed("edge_dl", k),
            convex::Hyperbolic{b.x(id.te_dl), b.x(id.u_dl), bo / (w_dl * tdma_rate_dl(s, ch, k))});
    sum_ul.add(b.x(id.u_ul));
    sum_dl.add(b.x(id.u_dl));
  }
  b.le("time_ul", sum_ul, 1.0);
  b.le("time_dl", sum_dl, 1.0);
  add_compute_part(b, s, v, aux, pin, sur.ue, sur.total);
  sur.start = b.start();
  sur.problem = std::move(b.p);
  return sur;
}

Surrogate surrogate_noma(const Scenario& s, const ChannelSet& ch, const NomaVariables& v, const NomaAux& aux,
                         std::optional<double> pin) {
  check_pin(pin);
  Builder b;
  Surrogate sur;
  sur.ue.assign(u(s.num_ues), UeIds{});
  const double w_ul = s.bw_ul * units::rate, w_dl = s.bw_dl * units::rate;
  const auto q = v.covariances();
  for (int k = 0; k < s.num_ues; ++k) {
    UeIds& id = sur.ue[u(k)];
    const double ps = std::clamp(v.p_sqrt[u(k)], 0.0, std::sqrt(s.power_ul));
    id.p_sqrt = b.box(indexed("p_sqrt", k), 0.0, std::sqrt(s.power_ul), ps);
    id.p = b.box(indexed("p", k), 0.0, s.power_ul, ps * ps);
    id.q_sqrt = b.complex(indexed("q_sqrt", k), v.q_sqrt[u(k)]);
    id.q = b.hermitian(indexed("q", k), q[u(k)]);
    id.r_ul = b.nonneg(indexed("rate_ul", k), v.r_ul[u(k)]);
    id.r_dl = b.nonneg(indexed("rate_dl", k), v.r_dl[u(k)]);
    id.te_ul = b.nonneg(indexed("tau_ul", k), v.tau[u(k)].ul_edge * units::time);
    id.te_dl = b.nonneg(indexed("tau_dl", k), v.tau[u(k)].dl_edge * units::time);
    b.p.add(indexed("power_root", k), convex::SquareLe{b.p.coord(id.p_sqrt), b.x(id.p)});
    b.p.add(indexed("cov_root", k), convex::PsdSchur{id.q, id.q_sqrt});
    const double bi = s.input_bits[u(k)] * units::amount, bo = s.output_bits[u(k)] * units::amount;
    b.p.add(indexed("edge_ul", k), convex::Hyperbolic{b.x(id.te_ul), b.x(id.r_ul), bi / w_ul});
    b.p.add(indexed("edge_dl", k), convex::Hyperbolic{b.x(id.te_dl), b.x(id.r_dl), bo / w_dl});
  }
  for (int k = 0; k < s.num_ues; ++k) {
    const UeIds& id = sur.ue[u(k)];
    const int i = serving(s, k);
    const cvec& h = h_ul(ch, i, k);
    const auto n = h.size();
    detail::PhiAffine ul(b.p, aux.gamma_ul[u(k)], aux.theta_ul[u(k)]);
    ul.signal(id.p_sqrt, h);
    for (int l = 0; l < s.num_ues; ++l) ul.noise(sur.ue[u(l)].p, h_ul(ch, i, l));
    ul.noise_constant(s.noise_ul * cmat::Identity(n, n));
    convex::AffineExpr e = b.x(id.r_ul);
    e.add(ul.expr, -1.0);
    b.le(indexed("rate_ul", k), e, 0.0);

    detail::PhiAffine dl(b.p, aux.gamma_dl[u(k)], aux.theta_dl[u(k)]);
    dl.signal(id.q_sqrt, h_dl(ch, k, i).adjoint());
    for (int l = 0; l < s.num_ues; ++l) dl.noise(sur.ue[u(l)].q, h_dl(ch, k, serving(s, l)).adjoint());
    dl.noise_constant(detail::as_matrix(s.noise_dl));
    convex::AffineExpr f = b.x(id.r_dl);
    f.add(dl.expr, -1.0);
    b.le(indexed("rate_dl", k), f, 0.0);
  }
  for (int i = 0; i < s.num_ens; ++i) {
    const auto& served = s.served_sets[u(i)];
    if (served.empty()) continue;
    convex::AffineExpr pw;
    const int n = s.antennas[u(i)];
    for (int k : served) b.p.add_re_trace(pw, sur.ue[u(k)].q, cmat::Identity(n, n));
    b.le(indexed("power_dl", i), pw, s.power_dl);
  }
  add_compute_part(b, s, v, aux.lambda, pin, sur.ue, sur.total);
  sur.start = b.start();
  sur.problem = std::move(b.p);
  return sur;
}

TdmaVariables init_tdma(const Scenario& s, const ChannelSet& ch, std::optional<double> pin) {
  check_pin(pin);
  TdmaVariables v;
  init_compute(s, pin, v);
  v.u_ul.assign(u(s.num_ues), 1.0 / s.num_ues);
  v.u_dl.assign(u(s.num_ues), 1.0 / s.num_ues);
  tighten(s, ch, v);
  return v;
}

NomaVariables init_noma(const Scenario& s, const ChannelSet& ch, model::Rng& rng, std::optional<double> pin) {
  check_pin(pin);
  NomaVariables v;
  init_compute(s, pin, v);
  v.p_sqrt.assign(u(s.num_ues), std::sqrt(s.power_ul));
  std::vector<cmat> V(u(s.num_ues));
  for (int k = 0; k < s.num_ues; ++k) {
    const int n = s.antennas[u(serving(s, k))];
    V[u(k)] = rng.complex_normal_matrix(n, n);
  }
  v.q_sqrt.assign(u(s.num_ues), cmat());
  for (int i = 0; i < s.num_ens; ++i) {
    double fro = 0.0;
    for (int k : s.served_sets[u(i)]) fro += V[u(k)].squaredNorm();
    const double scale = std::sqrt(s.power_dl / fro);
    for (int k : s.served_sets[u(i)]) {
      const cmat qt = scale * V[u(k)];
      v.q_sqrt[u(k)] = numerics::hermitian_sqrt(numerics::symmetrize(qt * qt.adjoint()));
    }
  }
  tighten(s, ch, v);
  return v;
}

void tighten(const Scenario& s, const ChannelSet& ch, TdmaVariables& v) {
  tighten_compute(s, v);
  for (int k = 0; k < s.num_ues; ++k) {
    UeLatency& t = v.tau[u(k)];
    t.ul_edge = uplink_time(s, k, v.u_ul[u(k)] * s.bw_ul * tdma_rate_ul(s, ch, k));
    t.dl_edge = downlink_time(s, k, v.u_dl[u(k)] * s.bw_dl * tdma_rate_dl(s, ch, k));
  }
}

void tighten(const Scenario& s, const ChannelSet& ch, NomaVariables& v) {
  tighten_compute(s, v);
  const auto p = v.powers();
  const auto q = v.covariances();
  v.r_ul.assign(u(s.num_ues), 0.0);
  v.r_dl.assign(u(s.num_ues), 0.0);
  for (int k = 0; k < s.num_ues; ++k) {
    v.r_ul[u(k)] = noma_rate_ul(s, ch, p, k);
    v.r_dl[u(k)] = noma_rate_dl(s, ch, q, k);
    UeLatency& t = v.tau[u(k)];
    t.ul_edge = uplink_time(s, k, s.bw_ul * v.r_ul[u(k)]);
    t.dl_edge = downlink_time(s, k, s.bw_dl * v.r_dl[u(k)]);
  }
}

double residual_tdma(const Scenario& s, const ChannelSet& ch, const TdmaVariables& v) {
  double r = residual_compute(s, v);
  double su = 0.0, sd = 0.0;
  for (int k = 0; k < s.num_ues; ++k) {
    const UeLatency& t = v.tau[u(k)];
    r = std::max({r, rel_ge(t.ul_edge, uplink_time(s, k, v.u_ul[u(k)] * s.bw_ul * tdma_rate_ul(s, ch, k))),
                  rel_ge(t.dl_edge, downlink_time(s, k, v.u_dl[u(k)] * s.bw_dl * tdma_rate_dl(s, ch, k))),
                  std::max(0.0, -v.u_ul[u(k)]), std::max(0.0, -v.u_dl[u(k)])});
    su += v.u_ul[u(k)];
    sd += v.u_dl[u(k)];
  }
  return std::max({r, std::abs(su - 1.0), std::abs(sd - 1.0)});
}

double residual_noma(const Scenario& s, const ChannelSet& ch, const NomaVariables& v) {
  double r = residual_compute(s, v);
  const auto p = v.powers();
  const auto q = v.covariances();
  for (int k = 0; k < s.num_ues; ++k) {
    const UeLatency& t = v.tau[u(k)];
    r = std::max({r, rel_ge(t.ul_edge, uplink_time(s, k, s.bw_ul * v.r_ul[u(k)])),
                  rel_ge(t.dl_edge, downlink_time(s, k, s.bw_dl * v.r_dl[u(k)])),
                  rel_ge(noma_rate_ul(s, ch, p, k), v.r_ul[u(k)]), rel_ge(noma_rate_dl(s, ch, q, k), v.r_dl[u(k)]),
                  rel_ge(s.power_ul, p[u(k)]), std::max(0.0, -v.p_sqrt[u(k)])});
  }
  for (int i = 0; i < s.num_ens; ++i) {
    double pw = 0.0;
    for (int k : s.served_sets[u(i)]) pw += q[u(k)].trace().real();
    r = std::max(r, rel_ge(s.power_dl, pw));
  }
  return r;
}

LatencyBreakdown latency(const ComputeVariables& v) { return total_latency_dran(v.tau); }

SolveReport<TdmaVariables> algorithm1(const Scenario& s, const ChannelSet& ch, const AlgoConfig& cfg) {
  detail::check_config(cfg);
  check_inputs(s, ch);
  const auto pin = cfg.pinned_split;
  TdmaVariables v0 = init_tdma(s, ch, pin);
  const double r0 = residual_tdma(s, ch, v0);
  auto step = [&](const TdmaVariables& v) {
    detail::StepOutcome<TdmaVariables> out;
    const Surrogate sur = surrogate_tdma(s, ch, v, update_aux_tdma(v), pin);
    const convex::ConvexSolution sol = convex::solve(sur.problem, cfg.solver, sur.start);
    out.newton = sol.newton_steps;
    if (sol.status == convex::Status::infeasible || sol.residual > cfg.solver.feas_tol) {
      out.message = std::string("convex step ") + convex::status_name(sol.status);
      return out;
    }
    TdmaVariables n;
    unpack_compute(sur.problem, sol.x, sur.ue, pin, n);
    n.u_ul.resize(u(s.num_ues));
    n.u_dl.resize(u(s.num_ues));
    double su = 0.0, sd = 0.0;
    for (int k = 0; k < s.num_ues; ++k) {
      n.u_ul[u(k)] = sol.x(sur.problem.coord(sur.ue[u(k)].u_ul));
      n.u_dl[u(k)] = sol.x(sur.problem.coord(sur.ue[u(k)].u_dl));
      su += n.u_ul[u(k)];
      sd += n.u_dl[u(k)];
    }
    // the surrogate keeps sum(u) <= 1; filling the frame only shortens airtime
    for (int k = 0; k < s.num_ues; ++k) {
      n.u_ul[u(k)] /= su;
      n.u_dl[u(k)] /= sd;
    }
    out.residual = residual_tdma(s, ch, n);
    tighten(s, ch, n);
    out.next = std::move(n);
    out.ok = true;
    return out;
  };
  return detail::run_alternating(std::move(v0), r0, cfg, step, [](const TdmaVariables& v) { return latency(v); });
}

SolveReport<NomaVariables> algorithm2(const Scenario& s, const ChannelSet& ch, const AlgoConfig& cfg) {
  detail::check_config(cfg);
  check_inputs(s, ch);
  const auto pin = cfg.pinned_split;
  model::Rng rng(cfg.seed);
  NomaVariables v0 = init_noma(s, ch, rng, pin);
  const double r0 = residual_noma(s, ch, v0);
  auto step = [&](const NomaVariables& v) {
    detail::StepOutcome<NomaVariables> out;
    const Surrogate sur = surrogate_noma(s, ch, v, update_aux_noma(s, ch, v), pin);
    const convex::ConvexSolution sol = convex::solve(sur.problem, cfg.solver, sur.start);
    out.newton = sol.newton_steps;
    if (sol.status == convex::Status::infeasible || sol.residual > cfg.solver.feas_tol) {
      out.message = std::string("convex step ") + convex::status_name(sol.status);
      return out;
    }
    NomaVariables n;
    unpack_compute(sur.problem, sol.x, sur.ue, pin, n);
    for (int k = 0; k < s.num_ues; ++k) {
      const UeIds& id = sur.ue[u(k)];
      n.p_sqrt.push_back(std::max(0.0, sol.x(sur.problem.coord(id.p_sqrt))));
      const cmat qt = convex::complex_value(sur.problem, sol.x, id.q_sqrt);
      n.q_sqrt.push_back(numerics::hermitian_sqrt(numerics::symmetrize(qt * qt.adjoint())));
      n.r_ul.push_back(std::max(0.0, sol.x(sur.problem.coord(id.r_ul))));
      n.r_dl.push_back(std::max(0.0, sol.x(sur.problem.coord(id.r_dl))));
    }
    out.residual = residual_noma(s, ch, n);
    tighten(s, ch, n);
    out.next = std::move(n);
    out.ok = true;
    return out;
  };
  return detail::run_alternating(std::move(v0), r0, cfg, step, [](const NomaVariables& v) { return latency(v); });
}

}  // namespace cecran::dran
