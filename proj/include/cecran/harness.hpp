#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cecran/cran.hpp"
#include "cecran/dran.hpp"
#include "cecran/model.hpp"
#include "cecran/report.hpp"

namespace cecran::harness {

using model::ChannelSet;
using model::Scenario;

enum class Arch { dran_tdma, dran_noma, cran, edge_only, cloud_only, hybrid };

/// "dran-tdma", "dran-noma", "cran", "edge-only", "cloud-only", "hybrid".
const char* arch_name(Arch a);
/// Throws std::invalid_argument on an unknown name.
Arch parse_arch(const std::string& name);

/// Scenario keys of the config file. Every EN gets the same antennas and
/// edge_cycles, every UE the same task profile.
struct ScenarioTemplate {
  int num_ues = 4;
  int num_ens = 2;
  int antennas = 2;
  double bw_ul_hz = 20e6, bw_dl_hz = 20e6;
  double cf_ul_bps = 1e9, cf_dl_bps = 1e9;
  double snr_max_db_ul = 20.0, snr_max_db_dl = 20.0;
  double input_bits = 1e6, output_bits = 1e6;
  double cycles_per_bit = 700.0;
  double edge_cycles = 1e10;
  double cloud_cycles = 1e11;
};

/// Default association (UE k -> EN k mod N_E); draw_instance replaces it.
Scenario build_scenario(const ScenarioTemplate& t);

/// Sweepable parameters: none, cf (both directions), cf_ul, cf_dl, snr_db
/// (both), bandwidth (both), antennas, num_ens, num_ues, edge_cycles,
/// edge_ratio (F_E / F_C), cloud_cycles.
ScenarioTemplate apply_sweep(ScenarioTemplate t, const std::string& param, double value);
bool is_sweep_param(const std::string& param);

struct ExperimentConfig {
  ScenarioTemplate scenario;
  model::TopologyParams topology;
  AlgoConfig solver;
  std::vector<Arch> archs{Arch::dran_tdma, Arch::dran_noma, Arch::cran};
  std::string sweep_param = "none";
  std::vector<double> sweep_values{0.0};
  std::uint64_t seed_base = 1;
  int seed_count = 1;

  /// Throws std::invalid_argument: delta > 0, t_max >= 1, nonempty sweep.
  void validate() const;
};

/// INI text with sections scenario, topology, solver, sweep, seeds and
/// experiment (archs). Unknown keys are rejected.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Applies one "section.key=value" override.
void set_option(ExperimentConfig& cfg, const std::string& assignment);
/// Round-trips through parse_config.
std::string format_config(const ExperimentConfig& cfg);

struct Instance {
  Scenario scenario;
  ChannelSet channels;
};

/// Topology, closest-EN association and channels drawn from Rng(seed).
Instance draw_instance(const ScenarioTemplate& t, const model::TopologyParams& topo, std::uint64_t seed);

inline constexpr double dl_receive_power = 0.625;  // J/s

/// Uplink energy in normalized power * seconds, downlink in joules.
struct UeEnergy {
  std::vector<double> ul;
  std::vector<double> dl;

  double mean_total() const;
  double mean_ul() const;
  double mean_dl() const;
};

/// TDMA transmits at full power; NOMA uses p_k; C-RAN uses p_E + p_C over the
/// network-wide edge latencies.
UeEnergy ue_energy(const SolveReport<dran::TdmaVariables>& r, const Scenario& s);
UeEnergy ue_energy(const SolveReport<dran::NomaVariables>& r, const Scenario& s);
UeEnergy ue_energy(const SolveReport<cran::CranVariables>& r, const Scenario& s);

/// Algorithm 2 with every c pinned to 1.
SolveReport<dran::NomaVariables> run_edge_only(const Scenario& s, const ChannelSet& ch, AlgoConfig cfg);
/// Algorithm 3 with every c pinned to 0.
SolveReport<cran::CranVariables> run_cloud_only(const Scenario& s, const ChannelSet& ch, AlgoConfig cfg);

/// Architecture-independent view of one run.
struct RunResult {
  Arch arch = Arch::cran;
  LatencyBreakdown breakdown;
  std::vector<double> history;
  std::vector<double> residuals;
  RunStatus status = RunStatus::max_iter;
  int iterations = 0;
  int newton_steps = 0;
  double wall_seconds = 0.0;
  std::string message;
  std::vector<double> c;
  UeEnergy energy;
  // total recomputed from the returned variables
  double recomputed_total = 0.0;
  // hybrid only: the scheme that was selected
  std::optional<Arch> chosen;
};

RunResult run(Arch arch, const Scenario& s, const ChannelSet& ch, const AlgoConfig& cfg);
/// min of edge-only and cloud-only tau_T, ties to edge-only.
RunResult run_hybrid(const RunResult& edge_only, const RunResult& cloud_only);
RunResult run_hybrid(const Scenario& s, const ChannelSet& ch, const AlgoConfig& cfg);

struct RunRecord {
  std::uint64_t seed = 0;
  Arch arch = Arch::cran;
  std::string sweep_param;
  double sweep_value = 0.0;
  double tau_T = 0.0;  // seconds
  int iterations = 0;
  double energy_avg = 0.0;  // mean over UEs of E_ul + E_dl
  double c_mean = 0.0;
  RunStatus status = RunStatus::max_iter;
  double energy_ul = 0.0;  // normalized power * s
  double energy_dl = 0.0;  // J
};

RunRecord make_record(const RunResult& r, std::uint64_t seed, const std::string& param, double value);

/// One record per (sweep value, seed, arch) in that nesting order. Seeds are
/// seed_base + index. on_record, when set, sees every record as it lands.
std::vector<RunRecord> sweep(const ExperimentConfig& cfg,
                             const std::function<void(const RunRecord&, const RunResult&)>& on_record = {});

/// Header plus one row per record; 17 significant digits.
void write_csv(const std::vector<RunRecord>& records, std::ostream& out);
void emit_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_csv(std::istream& in);

/// Python/matplotlib script plotting the mean of `metric` (a CSV column)
/// against the swept value, one series per architecture. Throws on empty
/// records.
std::string plot_script(const std::vector<RunRecord>& records, const std::string& csv_path,
                        const std::string& metric = "tau_T_s");
void emit_plot_script(const std::vector<RunRecord>& records, const std::string& csv_path, const std::string& path,
                      const std::string& metric = "tau_T_s");

}  // namespace cecran::harness
