// Command-line front end: single runs, sweeps, convergence traces and the
// shipped figure presets.

#include <CLI11.hpp>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "cecran/harness.hpp"

using namespace cecran;
using namespace cecran::harness;

namespace {

#ifndef CECRAN_PRESET_DIR
#define CECRAN_PRESET_DIR "presets"
#endif

ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : load_config(path);
  for (const auto& o : overrides) set_option(cfg, o);
  return cfg;
}

void print_breakdown(const RunResult& r) {
  const LatencyBreakdown& b = r.breakdown;
  std::printf("arch          %s\n", arch_name(r.arch));
  if (r.chosen) std::printf("chosen        %s\n", arch_name(*r.chosen));
  std::printf("status        %s\n", run_status_name(r.status));
  if (!r.message.empty()) std::printf("message       %s\n", r.message.c_str());
  std::printf("iterations    %d\n", r.iterations);
  std::printf("ul_edge_s     %.9g\n", b.ul_edge);
  std::printf("ul_fronthaul  %.9g\n", b.ul_fronthaul);
  std::printf("exe_edge_s    %.9g\n", b.exe_edge);
  std::printf("exe_cloud_s   %.9g\n", b.exe_cloud);
  std::printf("dl_fronthaul  %.9g\n", b.dl_fronthaul);
  std::printf("dl_edge_s     %.9g\n", b.dl_edge);
  std::printf("tau_T_s       %.9g\n", b.total);
  double c = 0.0;
  for (double v : r.c) c += v;
  std::printf("c_mean        %.6f\n", r.c.empty() ? 0.0 : c / static_cast<double>(r.c.size()));
  std::printf("energy_ul     %.9g\n", r.energy.mean_ul());
  std::printf("energy_dl_J   %.9g\n", r.energy.mean_dl());
}

// Mean tau_T and c per (value, arch), in sweep order.
void print_summary(const std::vector<RunRecord>& recs) {
  std::vector<std::pair<double, Arch>> keys;
  std::map<std::pair<double, Arch>, std::array<double, 3>> acc;
  for (const auto& r : recs) {
    const auto key = std::make_pair(r.sweep_value, r.arch);
    if (!acc.count(key)) keys.push_back(key);
    auto& a = acc[key];
    a[0] += r.tau_T;
    a[1] += r.c_mean;
    a[2] += 1.0;
  }
  std::printf("%-14s %-11s %14s %10s %5s\n", recs.front().sweep_param.c_str(), "arch", "mean_tau_T_s", "mean_c", "n");
  for (const auto& k : keys) {
    const auto& a = acc[k];
    std::printf("%-14.6g %-11s %14.9g %10.6f %5d\n", k.first, arch_name(k.second), a[0] / a[2], a[1] / a[2],
                static_cast<int>(a[2]));
  }
}

bool any_failed(const std::vector<RunRecord>& recs) {
  for (const auto& r : recs)
    if (r.status == RunStatus::solver_failure) return true;
  return false;
}

int run_sweep(const ExperimentConfig& cfg, const std::string& out, const std::string& plot, const std::string& metric,
              bool quiet) {
  const auto recs = sweep(cfg, [&](const RunRecord& r, const RunResult&) {
    if (!quiet)
      std::fprintf(stderr, "%s=%g seed %llu %-10s tau_T %.6g s  %s\n", r.sweep_param.c_str(), r.sweep_value,
                   static_cast<unsigned long long>(r.seed), arch_name(r.arch), r.tau_T, run_status_name(r.status));
  });
  if (!out.empty()) emit_csv(recs, out);
  if (!plot.empty()) emit_plot_script(recs, out.empty() ? "out.csv" : out, plot, metric);
  print_summary(recs);
  return any_failed(recs) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency-minimizing offloading over D-RAN and C-RAN"};
  app.require_subcommand(1);

  std::string config, out, plot, metric = "tau_T_s", arch_name_arg = "cran", preset, preset_dir = CECRAN_PRESET_DIR;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  double value = 0.0;
  bool have_value = false, quiet = false, print_only = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--set", overrides, "override, e.g. scenario.num_ues=2 (repeatable)");
  };

  auto* solve = app.add_subcommand("solve", "single run, prints the latency breakdown");
  solve->add_option("--arch", arch_name_arg, "dran-tdma | dran-noma | cran | edge-only | cloud-only | hybrid");
  solve->add_option("--config", config, "INI config");
  solve->add_option("--seed", seed, "realization seed");
  solve->add_option("--value", value, "sweep value (defaults to the first)")->each([&](const std::string&) {
    have_value = true;
  });
  add_common(solve);

  auto* sw = app.add_subcommand("sweep", "Monte Carlo sweep to CSV");
  sw->add_option("--config", config, "INI config")->required();
  sw->add_option("--out", out, "CSV path")->required();
  sw->add_option("--plot", plot, "also write a matplotlib script");
  sw->add_option("--metric", metric, "CSV column plotted by --plot");
  sw->add_flag("--quiet", quiet, "no per-run progress");
  add_common(sw);

  auto* conv = app.add_subcommand("convergence", "per-iteration tau_T history as CSV on stdout or --out");
  conv->add_option("--config", config, "INI config")->required();
  conv->add_option("--out", out, "CSV path");
  add_common(conv);

  auto* pre = app.add_subcommand("preset", "load a shipped preset (fig2, fig3, fig5 ... fig10) and sweep it");
  pre->add_option("--name", preset, "preset name")->required();
  pre->add_option("--dir", preset_dir, "preset directory");
  pre->add_option("--out", out, "CSV path");
  pre->add_option("--plot", plot, "also write a matplotlib script");
  pre->add_option("--metric", metric, "CSV column plotted by --plot");
  pre->add_flag("--print", print_only, "print the resolved config and exit");
  pre->add_flag("--quiet", quiet, "no per-run progress");
  add_common(pre);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      const ExperimentConfig cfg = load(config, overrides);
      const double v = have_value ? value : cfg.sweep_values.front();
      const Instance in = draw_instance(apply_sweep(cfg.scenario, cfg.sweep_param, v), cfg.topology, seed);
      AlgoConfig algo = cfg.solver;
      algo.seed = seed;
      const RunResult r = run(parse_arch(arch_name_arg), in.scenario, in.channels, algo);
      print_breakdown(r);
      return r.status == RunStatus::solver_failure ? 1 : 0;
    }
    if (sw->parsed()) return run_sweep(load(config, overrides), out, plot, metric, quiet);
    if (conv->parsed()) {
      const ExperimentConfig cfg = load(config, overrides);
      std::ofstream file;
      if (!out.empty()) {
        file.open(out);
        if (!file) throw std::runtime_error("cannot write '" + out + "'");
      }
      std::ostream& os = out.empty() ? std::cout : file;
      os << "seed,arch,sweep_param,sweep_value,iter,tau_T_s,residual\n";
      bool failed = false;
      sweep(cfg, [&](const RunRecord& rec, const RunResult& r) {
        failed = failed || r.status == RunStatus::solver_failure;
        for (std::size_t t = 0; t < r.history.size(); ++t) {
          char buf[160];
          std::snprintf(buf, sizeof buf, "%llu,%s,%s,%.17g,%zu,%.17g,%.17g\n",
                        static_cast<unsigned long long>(rec.seed), arch_name(rec.arch), rec.sweep_param.c_str(),
                        rec.sweep_value, t, r.history[t], t < r.residuals.size() ? r.residuals[t] : 0.0);
          os << buf;
        }
      });
      return failed ? 1 : 0;
    }
    if (pre->parsed()) {
      const auto path = std::filesystem::path(preset_dir) / (preset + ".ini");
      if (!std::filesystem::exists(path)) throw std::runtime_error("no preset '" + preset + "' in " + preset_dir);
      const ExperimentConfig cfg = load(path.string(), overrides);
      if (print_only) {
        std::cout << format_config(cfg);
        return 0;
      }
      return run_sweep(cfg, out, plot, metric, quiet);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
