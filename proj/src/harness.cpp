#include "cecran/harness.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cecran::harness {

namespace {

namespace pt = boost::property_tree;

const std::vector<std::pair<Arch, const char*>> k_arch_names{
    {Arch::dran_tdma, "dran-tdma"}, {Arch::dran_noma, "dran-noma"},   {Arch::cran, "cran"},
    {Arch::edge_only, "edge-only"}, {Arch::cloud_only, "cloud-only"}, {Arch::hybrid, "hybrid"}};

const std::vector<std::string> k_sweep_params{"none",     "cf",      "cf_ul",       "cf_dl",
                                              "snr_db",   "bandwidth", "antennas",  "num_ens",
                                              "num_ues",  "edge_cycles", "edge_ratio", "cloud_cycles"};

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = boost::trim_copy(text);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw std::invalid_argument(what + ": not a number: '" + text + "'");
  return v;
}

int parse_int(const std::string& text, const std::string& what) {
  const double v = parse_double(text, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw std::invalid_argument(what + ": not an integer: '" + text + "'");
  return static_cast<int>(v);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

template <class Vars>
void fill_common(RunResult& r, const SolveReport<Vars>& rep) {
  r.breakdown = rep.breakdown;
  r.history = rep.history;
  r.residuals = rep.residuals;
  r.status = rep.status;
  r.iterations = rep.iterations;
  r.newton_steps = rep.newton_steps;
  r.wall_seconds = rep.wall_seconds;
  r.message = rep.message;
  r.c = rep.vars.c;
}

RunResult from_tdma(const SolveReport<dran::TdmaVariables>& rep, const Scenario& s) {
  RunResult r;
  r.arch = Arch::dran_tdma;
  fill_common(r, rep);
  r.energy = ue_energy(rep, s);
  r.recomputed_total = dran::latency(rep.vars).total;
  return r;
}

RunResult from_noma(const SolveReport<dran::NomaVariables>& rep, const Scenario& s, Arch arch) {
  RunResult r;
  r.arch = arch;
  fill_common(r, rep);
  r.energy = ue_energy(rep, s);
  r.recomputed_total = dran::latency(rep.vars).total;
  return r;
}

RunResult from_cran(const SolveReport<cran::CranVariables>& rep, const Scenario& s, Arch arch) {
  RunResult r;
  r.arch = arch;
  fill_common(r, rep);
  r.energy = ue_energy(rep, s);
  r.recomputed_total = cran::latency(rep.vars).total;
  return r;
}

// Assigns one "section.key" value; returns false for unknown keys.
bool assign(ExperimentConfig& c, const std::string& key, const std::string& value) {
  ScenarioTemplate& s = c.scenario;
  const std::map<std::string, int*> ints{{"scenario.num_ues", &s.num_ues},
                                         {"scenario.num_ens", &s.num_ens},
                                         {"scenario.antennas", &s.antennas},
                                         {"solver.t_max", &c.solver.t_max}};
  const std::map<std::string, double*> doubles{{"scenario.bw_ul_hz", &s.bw_ul_hz},
                                               {"scenario.bw_dl_hz", &s.bw_dl_hz},
                                               {"scenario.cf_ul_bps", &s.cf_ul_bps},
                                               {"scenario.cf_dl_bps", &s.cf_dl_bps},
                                               {"scenario.snr_max_db_ul", &s.snr_max_db_ul},
                                               {"scenario.snr_max_db_dl", &s.snr_max_db_dl},
                                               {"scenario.input_bits", &s.input_bits},
                                               {"scenario.output_bits", &s.output_bits},
                                               {"scenario.cycles_per_bit", &s.cycles_per_bit},
                                               {"scenario.edge_cycles", &s.edge_cycles},
                                               {"scenario.cloud_cycles", &s.cloud_cycles},
                                               {"topology.side_m", &c.topology.side_m},
                                               {"topology.min_sep_m", &c.topology.min_sep_m},
                                               {"topology.ref_dist_m", &c.topology.ref_dist_m},
                                               {"topology.pl_exp", &c.topology.pl_exp},
                                               {"solver.delta", &c.solver.delta},
                                               {"solver.feas_tol", &c.solver.solver.feas_tol},
                                               {"solver.opt_tol", &c.solver.solver.opt_tol}};
  if (auto it = ints.find(key); it != ints.end()) {
    *it->second = parse_int(value, key);
  } else if (auto jt = doubles.find(key); jt != doubles.end()) {
    *jt->second = parse_double(value, key);
  } else if (key == "topology.ref_gain_db") {
    c.topology.ref_gain = std::pow(10.0, parse_double(value, key) / 10.0);
  } else if (key == "solver.max_newton") {
    c.solver.solver.max_newton = parse_int(value, key);
  } else if (key == "sweep.param") {
    c.sweep_param = boost::trim_copy(value);
  } else if (key == "sweep.values") {
    c.sweep_values.clear();
    for (const auto& v : split_list(value)) c.sweep_values.push_back(parse_double(v, key));
  } else if (key == "seeds.base") {
    const double v = parse_double(value, key);
    if (v < 0.0 || v != std::floor(v)) throw std::invalid_argument("seeds.base: need a nonnegative integer");
    c.seed_base = static_cast<std::uint64_t>(v);
  } else if (key == "seeds.count") {
    c.seed_count = parse_int(value, key);
  } else if (key == "experiment.archs") {
    c.archs.clear();
    for (const auto& a : split_list(value)) c.archs.push_back(parse_arch(a));
  } else {
    return false;
  }
  return true;
}

}  // namespace

const char* arch_name(Arch a) {
  for (const auto& [arch, name] : k_arch_names)
    if (arch == a) return name;
  return "unknown";
}

Arch parse_arch(const std::string& name) {
  for (const auto& [arch, n] : k_arch_names)
    if (name == n) return arch;
  throw std::invalid_argument("unknown architecture '" + name + "'");
}

Scenario build_scenario(const ScenarioTemplate& t) {
  model::ScenarioSpec sp;
  sp.num_ues = t.num_ues;
  sp.num_ens = t.num_ens;
  sp.antennas_per_en = t.antennas;
  sp.bandwidth = t.bw_ul_hz;
  sp.fronthaul = t.cf_ul_bps;
  sp.snr_db = t.snr_max_db_ul;
  sp.input_bits = t.input_bits;
  sp.output_bits = t.output_bits;
  sp.cycles_per_bit = t.cycles_per_bit;
  sp.edge_cycles = t.edge_cycles;
  sp.cloud_cycles = t.cloud_cycles;
  Scenario s = model::make_scenario(sp);
  s.bw_dl = t.bw_dl_hz;
  s.cf_dl = t.cf_dl_bps;
  s.snr_max_dl = std::pow(10.0, t.snr_max_db_dl / 10.0);
  s.power_dl = s.snr_max_dl * s.noise_dl;
  s.validate();
  return s;
}

bool is_sweep_param(const std::string& param) {
  return std::find(k_sweep_params.begin(), k_sweep_params.end(), param) != k_sweep_params.end();
}

ScenarioTemplate apply_sweep(ScenarioTemplate t, const std::string& param, double value) {
  auto as_int = [&] {
    if (value != std::floor(value) || value < 1.0) throw std::invalid_argument(param + ": need a positive integer");
    return static_cast<int>(value);
  };
  if (param == "none") {
  } else if (param == "cf") {
    t.cf_ul_bps = t.cf_dl_bps = value;
  } else if (param == "cf_ul") {
    t.cf_ul_bps = value;
  } else if (param == "cf_dl") {
    t.cf_dl_bps = value;
  } else if (param == "snr_db") {
    t.snr_max_db_ul = t.snr_max_db_dl = value;
  } else if (param == "bandwidth") {
    t.bw_ul_hz = t.bw_dl_hz = value;
  } else if (param == "antennas") {
    t.antennas = as_int();
  } else if (param == "num_ens") {
    t.num_ens = as_int();
  } else if (param == "num_ues") {
    t.num_ues = as_int();
  } else if (param == "edge_cycles") {
    t.edge_cycles = value;
  } else if (param == "edge_ratio") {
    t.edge_cycles = value * t.cloud_cycles;
  } else if (param == "cloud_cycles") {
    t.cloud_cycles = value;
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + param + "'");
  }
  return t;
}

void ExperimentConfig::validate() const {
  if (!(solver.delta > 0.0)) throw std::invalid_argument("config: solver.delta must be > 0");
  if (solver.t_max < 1) throw std::invalid_argument("config: solver.t_max must be >= 1");
  if (!(solver.solver.feas_tol > 0.0) || !(solver.solver.opt_tol > 0.0))
    throw std::invalid_argument("config: solver tolerances must be > 0");
  if (sweep_values.empty()) throw std::invalid_argument("config: sweep.values is empty");
  if (!is_sweep_param(sweep_param)) throw std::invalid_argument("config: unknown sweep.param '" + sweep_param + "'");
  if (seed_count < 1) throw std::invalid_argument("config: seeds.count must be >= 1");
  if (archs.empty()) throw std::invalid_argument("config: experiment.archs is empty");
  topology.validate();
  for (double v : sweep_values) build_scenario(apply_sweep(scenario, sweep_param, v));
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw std::invalid_argument("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!assign(cfg, full, value.data())) throw std::invalid_argument("config: unknown key '" + full + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  return parse_config(in);
}

void set_option(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("override '" + assignment + "': expected key=value");
  const std::string key = boost::trim_copy(assignment.substr(0, eq));
  if (!assign(cfg, key, assignment.substr(eq + 1))) throw std::invalid_argument("override: unknown key '" + key + "'");
  cfg.validate();
}

std::string format_config(const ExperimentConfig& c) {
  const ScenarioTemplate& s = c.scenario;
  std::ostringstream o;
  o << "[scenario]\n"
    << "num_ues = " << s.num_ues << "\nnum_ens = " << s.num_ens << "\nantennas = " << s.antennas
    << "\nbw_ul_hz = " << fmt(s.bw_ul_hz) << "\nbw_dl_hz = " << fmt(s.bw_dl_hz) << "\ncf_ul_bps = " << fmt(s.cf_ul_bps)
    << "\ncf_dl_bps = " << fmt(s.cf_dl_bps) << "\nsnr_max_db_ul = " << fmt(s.snr_max_db_ul)
    << "\nsnr_max_db_dl = " << fmt(s.snr_max_db_dl) << "\ninput_bits = " << fmt(s.input_bits)
    << "\noutput_bits = " << fmt(s.output_bits) << "\ncycles_per_bit = " << fmt(s.cycles_per_bit)
    << "\nedge_cycles = " << fmt(s.edge_cycles) << "\ncloud_cycles = " << fmt(s.cloud_cycles) << "\n\n";
  o << "[topology]\n"
    << "side_m = " << fmt(c.topology.side_m) << "\nmin_sep_m = " << fmt(c.topology.min_sep_m)
    << "\nref_dist_m = " << fmt(c.topology.ref_dist_m) << "\nref_gain_db = " << fmt(10.0 * std::log10(c.topology.ref_gain))
    << "\npl_exp = " << fmt(c.topology.pl_exp) << "\n\n";
  o << "[solver]\n"
    << "delta = " << fmt(c.solver.delta) << "\nt_max = " << c.solver.t_max
    << "\nfeas_tol = " << fmt(c.solver.solver.feas_tol) << "\nopt_tol = " << fmt(c.solver.solver.opt_tol)
    << "\nmax_newton = " << c.solver.solver.max_newton << "\n\n";
  o << "[sweep]\nparam = " << c.sweep_param << "\nvalues = ";
  for (std::size_t j = 0; j < c.sweep_values.size(); ++j) o << (j ? ", " : "") << fmt(c.sweep_values[j]);
  o << "\n\n[seeds]\nbase = " << c.seed_base << "\ncount = " << c.seed_count << "\n\n[experiment]\narchs = ";
  for (std::size_t j = 0; j < c.archs.size(); ++j) o << (j ? ", " : "") << arch_name(c.archs[j]);
  o << "\n";
  return o.str();
}

Instance draw_instance(const ScenarioTemplate& t, const model::TopologyParams& topo, std::uint64_t seed) {
  Instance in{build_scenario(t), {}};
  model::Rng rng(seed);
  const auto pos = model::generate_topology(rng, topo, t.num_ues, t.num_ens);
  model::set_association(in.scenario, model::associate(pos));
  in.channels = model::sample_channels(rng, pos, topo, in.scenario);
  return in;
}

double UeEnergy::mean_ul() const { return mean(ul); }
double UeEnergy::mean_dl() const { return mean(dl); }
double UeEnergy::mean_total() const { return mean_ul() + mean_dl(); }

UeEnergy ue_energy(const SolveReport<dran::TdmaVariables>& r, const Scenario& s) {
  UeEnergy e;
  for (const auto& t : r.vars.tau) {
    e.ul.push_back(t.ul_edge * s.power_ul);
    e.dl.push_back(t.dl_edge * dl_receive_power);
  }
  return e;
}

UeEnergy ue_energy(const SolveReport<dran::NomaVariables>& r, const Scenario&) {
  UeEnergy e;
  const auto p = r.vars.powers();
  for (std::size_t k = 0; k < r.vars.tau.size(); ++k) {
    e.ul.push_back(r.vars.tau[k].ul_edge * p[k]);
    e.dl.push_back(r.vars.tau[k].dl_edge * dl_receive_power);
  }
  return e;
}

UeEnergy ue_energy(const SolveReport<cran::CranVariables>& r, const Scenario&) {
  UeEnergy e;
  const auto p = r.vars.powers();
  for (std::size_t k = 0; k < p.edge.size(); ++k) {
    e.ul.push_back(r.vars.tau.ul_edge * (p.edge[k] + p.cloud[k]));
    e.dl.push_back(r.vars.tau.dl_edge * dl_receive_power);
  }
  return e;
}

SolveReport<dran::NomaVariables> run_edge_only(const Scenario& s, const ChannelSet& ch, AlgoConfig cfg) {
  cfg.pinned_split = 1.0;
  return dran::algorithm2(s, ch, cfg);
}

SolveReport<cran::CranVariables> run_cloud_only(const Scenario& s, const ChannelSet& ch, AlgoConfig cfg) {
  cfg.pinned_split = 0.0;
  return cran::algorithm3(s, ch, cfg);
}

RunResult run(Arch arch, const Scenario& s, const ChannelSet& ch, const AlgoConfig& cfg) {
  switch (arch) {
    case Arch::dran_tdma:
      return from_tdma(dran::algorithm1(s, ch, cfg), s);
    case Arch::dran_noma:
      return from_noma(dran::algorithm2(s, ch, cfg), s, arch);
    case Arch::cran:
      return from_cran(cran::algorithm3(s, ch, cfg), s, arch);
    case Arch::edge_only:
      return from_noma(run_edge_only(s, ch, cfg), s, arch);
    case Arch::cloud_only:
      return from_cran(run_cloud_only(s, ch, cfg), s, arch);
    case Arch::hybrid:
      return run_hybrid(s, ch, cfg);
  }
  throw std::invalid_argument("unknown architecture");
}

RunResult run_hybrid(const RunResult& edge_only, const RunResult& cloud_only) {
  if (edge_only.arch != Arch::edge_only || cloud_only.arch != Arch::cloud_only)
    throw std::invalid_argument("run_hybrid: expects an edge-only and a cloud-only result");
  const bool edge = edge_only.breakdown.total <= cloud_only.breakdown.total;
  RunResult r = edge ? edge_only : cloud_only;
  r.chosen = r.arch;
  r.arch = Arch::hybrid;
  r.wall_seconds = edge_only.wall_seconds + cloud_only.wall_seconds;
  r.newton_steps = edge_only.newton_steps + cloud_only.newton_steps;
  // a failure on either side is surfaced even if the other side won
  if (edge_only.status == RunStatus::solver_failure || cloud_only.status == RunStatus::solver_failure)
    r.status = RunStatus::solver_failure;
  return r;
}

RunResult run_hybrid(const Scenario& s, const ChannelSet& ch, const AlgoConfig& cfg) {
  return run_hybrid(run(Arch::edge_only, s, ch, cfg), run(Arch::cloud_only, s, ch, cfg));
}

RunRecord make_record(const RunResult& r, std::uint64_t seed, const std::string& param, double value) {
  RunRecord rec;
  rec.seed = seed;
  rec.arch = r.arch;
  rec.sweep_param = param;
  rec.sweep_value = value;
  rec.tau_T = r.breakdown.total;
  rec.iterations = r.iterations;
  rec.energy_avg = r.energy.mean_total();
  rec.energy_ul = r.energy.mean_ul();
  rec.energy_dl = r.energy.mean_dl();
  rec.c_mean = mean(r.c);
  rec.status = r.status;
  return rec;
}

std::vector<RunRecord> sweep(const ExperimentConfig& cfg,
                             const std::function<void(const RunRecord&, const RunResult&)>& on_record) {
  cfg.validate();
  std::vector<RunRecord> out;
  for (double value : cfg.sweep_values) {
    const ScenarioTemplate t = apply_sweep(cfg.scenario, cfg.sweep_param, value);
    for (int j = 0; j < cfg.seed_count; ++j) {
      const std::uint64_t seed = cfg.seed_base + static_cast<std::uint64_t>(j);
      const Instance in = draw_instance(t, cfg.topology, seed);
      AlgoConfig algo = cfg.solver;
      algo.seed = seed;
      std::map<Arch, RunResult> done;
      // edge-only and cloud-only runs are shared with hybrid
      std::function<const RunResult&(Arch)> get = [&](Arch a) -> const RunResult& {
        if (auto it = done.find(a); it != done.end()) return it->second;
        RunResult r;
        if (a == Arch::hybrid) {
          r = run_hybrid(get(Arch::edge_only), get(Arch::cloud_only));
        } else {
          try {
            r = run(a, in.scenario, in.channels, algo);
          } catch (const std::exception& e) {
            r.arch = a;
            r.status = RunStatus::solver_failure;
            r.message = e.what();
          }
        }
        return done.emplace(a, std::move(r)).first->second;
      };
      for (Arch a : cfg.archs) {
        const RunResult& r = get(a);
        out.push_back(make_record(r, seed, cfg.sweep_param, value));
        if (on_record) on_record(out.back(), r);
      }
    }
  }
  return out;
}

void write_csv(const std::vector<RunRecord>& records, std::ostream& out) {
  if (records.empty()) throw std::invalid_argument("write_csv: no records");
  out << "seed,arch,sweep_param,sweep_value,tau_T_s,iters,energy_avg,c_mean,status,energy_ul_norm,energy_dl_J\n";
  for (const auto& r : records)
    out << r.seed << ',' << arch_name(r.arch) << ',' << r.sweep_param << ',' << fmt(r.sweep_value) << ','
        << fmt(r.tau_T) << ',' << r.iterations << ',' << fmt(r.energy_avg) << ',' << fmt(r.c_mean) << ','
        << run_status_name(r.status) << ',' << fmt(r.energy_ul) << ',' << fmt(r.energy_dl) << '\n';
}

void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(records, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("read_csv: missing header");
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    boost::split(f, line, boost::is_any_of(","));
    if (f.size() != 11) throw std::invalid_argument("read_csv: expected 11 fields: " + line);
    RunRecord r;
    r.seed = static_cast<std::uint64_t>(std::stoull(f[0]));
    r.arch = parse_arch(f[1]);
    r.sweep_param = f[2];
    r.sweep_value = parse_double(f[3], "sweep_value");
    r.tau_T = parse_double(f[4], "tau_T_s");
    r.iterations = parse_int(f[5], "iters");
    r.energy_avg = parse_double(f[6], "energy_avg");
    r.c_mean = parse_double(f[7], "c_mean");
    if (f[8] == "converged") r.status = RunStatus::converged;
    else if (f[8] == "max_iter") r.status = RunStatus::max_iter;
    else if (f[8] == "solver_failure") r.status = RunStatus::solver_failure;
    else throw std::invalid_argument("read_csv: unknown status '" + f[8] + "'");
    r.energy_ul = parse_double(f[9], "energy_ul_norm");
    r.energy_dl = parse_double(f[10], "energy_dl_J");
    out.push_back(r);
  }
  return out;
}

std::string plot_script(const std::vector<RunRecord>& records, const std::string& csv_path, const std::string& metric) {
  if (records.empty()) throw std::invalid_argument("plot_script: no records");
  static const std::set<std::string> metrics{"tau_T_s", "iters", "energy_avg", "c_mean", "energy_ul_norm",
                                             "energy_dl_J"};
  if (!metrics.count(metric)) throw std::invalid_argument("plot_script: unknown metric '" + metric + "'");
  std::vector<std::string> archs;
  for (const auto& r : records) {
    const std::string a = arch_name(r.arch);
    if (std::find(archs.begin(), archs.end(), a) == archs.end()) archs.push_back(a);
  }
  std::ostringstream o;
  o << "#!/usr/bin/env python3\n"
    << "import csv\nfrom collections import defaultdict\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\n"
    << "import matplotlib.pyplot as plt\n\n"
    << "CSV = " << '"' << csv_path << '"' << "\nMETRIC = \"" << metric << "\"\nSWEEP = \""
    << records.front().sweep_param << "\"\nSERIES = [";
  for (std::size_t j = 0; j < archs.size(); ++j) o << (j ? ", " : "") << '"' << archs[j] << '"';
  o << "]\n\n"
    << "acc = defaultdict(list)\n"
    << "with open(CSV, newline=\"\") as f:\n"
    << "    for row in csv.DictReader(f):\n"
    << "        acc[(row[\"arch\"], float(row[\"sweep_value\"]))].append(float(row[METRIC]))\n\n"
    << "fig, ax = plt.subplots()\n"
    << "for arch in SERIES:\n"
    << "    xs = sorted(x for (a, x) in acc if a == arch)\n"
    << "    ys = [sum(acc[(arch, x)]) / len(acc[(arch, x)]) for x in xs]\n"
    << "    ax.plot(xs, ys, marker=\"o\", label=arch)\n"
    << "ax.set_xlabel(SWEEP)\nax.set_ylabel(\"mean \" + METRIC)\nax.grid(True)\nax.legend()\n"
    << "fig.savefig(CSV.rsplit(\".\", 1)[0] + \"_\" + METRIC + \".png\", dpi=150)\n";
  return o.str();
}

void emit_plot_script(const std::vector<RunRecord>& records, const std::string& csv_path, const std::string& path,
                      const std::string& metric) {
  const std::string text = plot_script(records, csv_path, metric);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace cecran::harness
