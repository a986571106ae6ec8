#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cecran/types.hpp"

namespace cecran::model {

/// Static system parameters. Noise powers are normalized so that
/// power = snr_max * noise.
struct Scenario {
  int num_ues = 1;
  int num_ens = 1;
  std::vector<int> antennas;  // per EN
  double bw_ul = 20e6, bw_dl = 20e6;    // Hz
  double cf_ul = 1e9, cf_dl = 1e9;      // fronthaul, bits/s
  double snr_max_ul = 100.0, snr_max_dl = 100.0;  // linear
  double noise_ul = 1.0, noise_dl = 1.0;
  double power_ul = 100.0, power_dl = 100.0;
  std::vector<double> input_bits;      // per UE
  std::vector<double> output_bits;     // per UE
  std::vector<double> cycles_per_bit;  // per UE
  std::vector<double> edge_cycles;     // cycles/s per EN
  double cloud_cycles = 1e11;          // cycles/s
  std::vector<int> association;        // serving EN per UE
  std::vector<std::vector<int>> served_sets;  // UEs per EN

  int total_antennas() const;
  /// First row of EN i inside the stacked antenna vector.
  int antenna_offset(int en) const;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// Uniform task profile and per-EN values; association defaults to UE k -> EN (k mod N_E).
struct ScenarioSpec {
  int num_ues = 4;
  int num_ens = 2;
  int antennas_per_en = 2;
  double bandwidth = 20e6;
  double fronthaul = 1e9;
  double snr_db = 20.0;
  double input_bits = 1e6;
  double output_bits = 1e6;
  double cycles_per_bit = 700.0;
  double edge_cycles = 1e10;
  double cloud_cycles = 1e11;
};
Scenario make_scenario(const ScenarioSpec& spec);

/// Replaces association and served sets.
void set_association(Scenario& scenario, const std::vector<int>& association);

struct TopologyParams {
  double side_m = 500.0;
  double min_sep_m = 10.0;
  double ref_dist_m = 30.0;
  double ref_gain = 10.0;  // linear (10 dB)
  double pl_exp = 3.0;

  void validate() const;
};

struct Point {
  double x = 0.0, y = 0.0;
};

struct Positions {
  std::vector<Point> ues;
  std::vector<Point> ens;
};

double distance(const Point& a, const Point& b);

/// Deterministic generator: mt19937_64 with explicit uniform/Box-Muller
/// transforms so draws do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1) with 53 bits.
  double uniform();
  double normal();
  /// Circularly symmetric complex Gaussian with unit variance.
  cplx complex_normal();
  cmat complex_normal_matrix(int rows, int cols);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline constexpr int max_redraws = 10000;

/// UE and EN positions uniform in the square; UEs are redrawn until every
/// UE-EN distance is at least min_sep_m. Throws std::runtime_error if a UE
/// needs more than max_redraws redraws.
Positions generate_topology(Rng& rng, const TopologyParams& params, int num_ues, int num_ens);

/// rho_0 (d/d_0)^{-eta}; throws std::domain_error for d <= 0.
double path_loss(double d, const TopologyParams& params);

struct ChannelSet {
  std::vector<std::vector<cvec>> h_ul;  // [en][ue], length n_{E,en}
  std::vector<std::vector<cvec>> h_dl;  // [ue][en], length n_{E,en}
  std::vector<cvec> h_ul_stacked;       // [ue], length n_E
  std::vector<cvec> h_ul_tilde;         // [ue], serving EN block zeroed
  std::vector<cvec> h_dl_stacked;       // [ue], length n_E
  std::vector<rmat> selector;           // [en], n_E x n_{E,en}
};

/// Independent Rayleigh draws scaled by sqrt(path_loss) for every antenna, link and direction.
ChannelSet sample_channels(Rng& rng, const Positions& positions, const TopologyParams& params,
                           const Scenario& scenario);

/// Fills stacked, tilde and selector forms from the per-link blocks.
void finalize_channels(ChannelSet& channels, const Scenario& scenario);

/// Closest EN per UE, ties to the lowest index.
std::vector<int> associate(const Positions& positions);

}  // namespace cecran::model
