#include "cecran/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cecran::model {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("scenario: " + msg);
}

}  // namespace

int Scenario::total_antennas() const { return std::accumulate(antennas.begin(), antennas.end(), 0); }

int Scenario::antenna_offset(int en) const {
  return std::accumulate(antennas.begin(), antennas.begin() + en, 0);
}

void Scenario::validate() const {
  require(num_ues >= 1 && num_ens >= 1, "counts must be >= 1");
  require(static_cast<int>(antennas.size()) == num_ens, "antennas size");
  for (int a : antennas) require(a >= 1, "antenna counts must be >= 1");
  require(bw_ul > 0 && bw_dl > 0 && cf_ul > 0 && cf_dl > 0, "bandwidths and capacities must be > 0");
  require(snr_max_ul > 0 && snr_max_dl > 0 && noise_ul > 0 && noise_dl > 0, "snr and noise must be > 0");
  require(power_ul > 0 && power_dl > 0, "powers must be > 0");
  require(std::abs(power_ul - snr_max_ul * noise_ul) <= 1e-12 * power_ul &&
              std::abs(power_dl - snr_max_dl * noise_dl) <= 1e-12 * power_dl,
          "power must equal snr_max * noise");
  const auto nu = static_cast<std::size_t>(num_ues);
  require(input_bits.size() == nu && output_bits.size() == nu && cycles_per_bit.size() == nu,
          "per-UE task vectors");
  for (std::size_t k = 0; k < nu; ++k)
    require(input_bits[k] > 0 && output_bits[k] > 0 && cycles_per_bit[k] > 0, "task profile must be > 0");
  require(static_cast<int>(edge_cycles.size()) == num_ens, "edge_cycles size");
  for (double f : edge_cycles) require(f > 0, "edge cycles must be > 0");
  require(cloud_cycles > 0, "cloud cycles must be > 0");
  require(association.size() == nu, "association size");
  require(static_cast<int>(served_sets.size()) == num_ens, "served_sets size");
  std::vector<int> seen(nu, 0);
  for (int i = 0; i < num_ens; ++i) {
    for (int k : served_sets[static_cast<std::size_t>(i)]) {
      require(k >= 0 && k < num_ues, "served set index");
      require(association[static_cast<std::size_t>(k)] == i, "association disagrees with served set");
      ++seen[static_cast<std::size_t>(k)];
    }
  }
  for (int s : seen) require(s == 1, "served sets must partition the UEs");
}

Scenario make_scenario(const ScenarioSpec& spec) {
  Scenario s;
  s.num_ues = spec.num_ues;
  s.num_ens = spec.num_ens;
  s.antennas.assign(static_cast<std::size_t>(spec.num_ens), spec.antennas_per_en);
  s.bw_ul = s.bw_dl = spec.bandwidth;
  s.cf_ul = s.cf_dl = spec.fronthaul;
  s.snr_max_ul = s.snr_max_dl = std::pow(10.0, spec.snr_db / 10.0);
  s.noise_ul = s.noise_dl = 1.0;
  s.power_ul = s.snr_max_ul * s.noise_ul;
  s.power_dl = s.snr_max_dl * s.noise_dl;
  const auto nu = static_cast<std::size_t>(spec.num_ues);
  s.input_bits.assign(nu, spec.input_bits);
  s.output_bits.assign(nu, spec.output_bits);
  s.cycles_per_bit.assign(nu, spec.cycles_per_bit);
  s.edge_cycles.assign(static_cast<std::size_t>(spec.num_ens), spec.edge_cycles);
  s.cloud_cycles = spec.cloud_cycles;
  std::vector<int> assoc(nu);
  for (std::size_t k = 0; k < nu; ++k) assoc[k] = static_cast<int>(k) % spec.num_ens;
  set_association(s, assoc);
  return s;
}

void set_association(Scenario& scenario, const std::vector<int>& association) {
  scenario.association = association;
  scenario.served_sets.assign(static_cast<std::size_t>(scenario.num_ens), {});
  for (std::size_t k = 0; k < association.size(); ++k) {
    const int i = association[k];
    if (i < 0 || i >= scenario.num_ens) throw std::invalid_argument("association: EN index out of range");
    scenario.served_sets[static_cast<std::size_t>(i)].push_back(static_cast<int>(k));
  }
}

void TopologyParams::validate() const {
  if (!(side_m > min_sep_m && min_sep_m >= 0.0)) throw std::invalid_argument("topology: need side_m > min_sep_m >= 0");
  if (!(ref_dist_m > 0.0)) throw std::invalid_argument("topology: ref_dist_m must be > 0");
  if (!(pl_exp > 0.0)) throw std::invalid_argument("topology: pl_exp must be > 0");
  if (!(ref_gain > 0.0)) throw std::invalid_argument("topology: ref_gain must be > 0");
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

cplx Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

cmat Rng::complex_normal_matrix(int rows, int cols) {
  cmat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = complex_normal();
  return m;
}

Positions generate_topology(Rng& rng, const TopologyParams& params, int num_ues, int num_ens) {
  params.validate();
  if (num_ues < 1 || num_ens < 1) throw std::invalid_argument("generate_topology: counts must be >= 1");
  Positions pos;
  auto draw = [&] { return Point{rng.uniform() * params.side_m, rng.uniform() * params.side_m}; };
  for (int i = 0; i < num_ens; ++i) pos.ens.push_back(draw());
  for (int k = 0; k < num_ues; ++k) {
    int tries = 0;
    for (;;) {
      const Point p = draw();
      bool ok = true;
      for (const auto& e : pos.ens)
        if (distance(p, e) < params.min_sep_m) ok = false;
      if (ok) {
        pos.ues.push_back(p);
        break;
      }
      if (++tries >= max_redraws) throw std::runtime_error("generate_topology: resampling budget exhausted");
    }
  }
  return pos;
}

double path_loss(double d, const TopologyParams& params) {
  if (!(d > 0.0)) throw std::domain_error("path_loss: distance must be > 0");
  return params.ref_gain * std::pow(d / params.ref_dist_m, -params.pl_exp);
}

ChannelSet sample_channels(Rng& rng, const Positions& positions, const TopologyParams& params,
                           const Scenario& scenario) {
  const int nu = scenario.num_ues;
  const int ne = scenario.num_ens;
  if (static_cast<int>(positions.ues.size()) != nu || static_cast<int>(positions.ens.size()) != ne)
    throw std::invalid_argument("sample_channels: positions do not match scenario counts");
  ChannelSet ch;
  ch.h_ul.assign(static_cast<std::size_t>(ne), std::vector<cvec>(static_cast<std::size_t>(nu)));
  ch.h_dl.assign(static_cast<std::size_t>(nu), std::vector<cvec>(static_cast<std::size_t>(ne)));
  for (int i = 0; i < ne; ++i) {
    const int n = scenario.antennas[static_cast<std::size_t>(i)];
    for (int k = 0; k < nu; ++k) {
      const double g = std::sqrt(path_loss(
          distance(positions.ues[static_cast<std::size_t>(k)], positions.ens[static_cast<std::size_t>(i)]), params));
      cvec ul(n), dl(n);
      for (int a = 0; a < n; ++a) ul(a) = g * rng.complex_normal();
      for (int a = 0; a < n; ++a) dl(a) = g * rng.complex_normal();
      ch.h_ul[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = ul;
      ch.h_dl[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = dl;
    }
  }
  finalize_channels(ch, scenario);
  return ch;
}

void finalize_channels(ChannelSet& ch, const Scenario& scenario) {
  const int nu = scenario.num_ues;
  const int ne = scenario.num_ens;
  const int nt = scenario.total_antennas();
  ch.h_ul_stacked.assign(static_cast<std::size_t>(nu), cvec::Zero(nt));
  ch.h_ul_tilde.assign(static_cast<std::size_t>(nu), cvec::Zero(nt));
  ch.h_dl_stacked.assign(static_cast<std::size_t>(nu), cvec::Zero(nt));
  ch.selector.assign(static_cast<std::size_t>(ne), rmat());
  for (int i = 0; i < ne; ++i) {
    const int n = scenario.antennas[static_cast<std::size_t>(i)];
    const int off = scenario.antenna_offset(i);
    rmat E = rmat::Zero(nt, n);
    E.block(off, 0, n, n).setIdentity();
    ch.selector[static_cast<std::size_t>(i)] = E;
    for (int k = 0; k < nu; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const cvec& ul = ch.h_ul[static_cast<std::size_t>(i)][ku];
      ch.h_ul_stacked[ku].segment(off, n) = ul;
      if (scenario.association[ku] != i) ch.h_ul_tilde[ku].segment(off, n) = ul;
      ch.h_dl_stacked[ku].segment(off, n) = ch.h_dl[ku][static_cast<std::size_t>(i)];
    }
  }
}

std::vector<int> associate(const Positions& positions) {
  if (positions.ens.empty()) throw std::invalid_argument("associate: need at least one EN");
  std::vector<int> out;
  out.reserve(positions.ues.size());
  for (const auto& u : positions.ues) {
    int best = 0;
    double best_d = distance(u, positions.ens[0]);
    for (std::size_t i = 1; i < positions.ens.size(); ++i) {
      const double d = distance(u, positions.ens[i]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace cecran::model
