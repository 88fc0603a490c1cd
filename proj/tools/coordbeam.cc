// Command-line driver: Monte-Carlo experiment runs, 2-user boundary dumps
// and distributed round traces over instance fixtures.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "coordbeam/distributed.h"
#include "coordbeam/fixtures.h"
#include "coordbeam/harness.h"

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int cmd_run(const std::string& spec_path, int drops, long long seed, const std::string& out) {
  coordbeam::ExperimentSpec spec = coordbeam::load_experiment_spec(spec_path);
  if (drops > 0) spec.drops = drops;
  if (seed >= 0) spec.seed = static_cast<std::uint64_t>(seed);
  if (!out.empty()) spec.out_dir = out;
  const coordbeam::MetricsTable table = coordbeam::run_experiment(spec);
  for (const auto& c : table.cells) {
    if (c.count == 0 && c.failures == 0) continue;
    std::cout << c.scheme << " @ " << c.snr_db << " dB: mean worst rate "
              << fmt(c.mean_worst_rate) << " bits/s/Hz over " << c.count << " drops";
    if (c.failures > 0) std::cout << " (" << c.failures << " failed)";
    std::cout << "\n";
  }
  if (table.total_failures > 0) {
    std::cerr << table.total_failures << " drop solves failed; see " << spec.out_dir
              << "/rows.csv\n";
    return 2;
  }
  return 0;
}

int cmd_boundary(const std::string& instance, int resolution, const std::string& out) {
  const coordbeam::ChannelSet ch = coordbeam::load_channel_set(instance);
  const auto boundary = coordbeam::pareto_boundary_2user(ch, resolution);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    os = &file;
  }
  *os << "r1,r2\n";
  for (const auto& pt : boundary) *os << fmt(pt.rates[0]) << "," << fmt(pt.rates[1]) << "\n";
  return 0;
}

int cmd_trace(const std::string& instance, int bits, int fixed_iters, int max_iters,
              const std::string& out) {
  const coordbeam::ChannelSet ch = coordbeam::load_channel_set(instance);
  coordbeam::DistributedConfig cfg;
  cfg.quant_bits = bits;
  cfg.fixed_iters = fixed_iters;
  if (max_iters > 0) cfg.max_iters = max_iters;
  coordbeam::DistributedRun run = coordbeam::run_to_convergence(ch, cfg);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    os = &file;
  }
  *os << "iteration,gamma";
  for (std::size_t k = 0; k < ch.num_users(); ++k) *os << ",q_" << (k + 1);
  *os << ",alpha,scalars_sent_cum\n";
  for (const auto& r : run.rounds) {
    *os << r.iteration << "," << fmt(r.gamma);
    for (double q : r.q) *os << "," << fmt(q);
    *os << "," << fmt(r.alpha) << "," << r.scalars_cum << "\n";
  }
  if (run.hit_max_iters) std::cerr << "warning: stopped at the iteration cap\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordinated multicell downlink beamforming simulator"};
  app.require_subcommand(1);

  std::string spec_path, instance, out;
  int drops = 0, resolution = 200, bits = 0, fixed_iters = 0, max_iters = 0;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "run a Monte-Carlo experiment spec");
  run->add_option("--spec", spec_path, "experiment spec file")->required();
  run->add_option("--drops", drops, "override the drop count");
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--out", out, "output directory");

  auto* boundary = app.add_subcommand("boundary", "2-user rate-region boundary of a fixture");
  boundary->add_option("--instance", instance, "ChannelSet fixture (JSON)")->required();
  boundary->add_option("--resolution", resolution, "grid resolution per parameter");
  boundary->add_option("--out", out, "output CSV (default stdout)");

  auto* trace = app.add_subcommand("trace", "distributed round trace of a fixture");
  trace->add_option("--instance", instance, "ChannelSet fixture (JSON)")->required();
  trace->add_option("--bits", bits, "quantizer bits for the exchange (0 = exact)");
  trace->add_option("--iters", fixed_iters, "fixed iteration count (0 = run to convergence)");
  trace->add_option("--max-iters", max_iters, "iteration cap");
  trace->add_option("--out", out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(spec_path, drops, seed, out);
    if (boundary->parsed()) return cmd_boundary(instance, resolution, out);
    if (trace->parsed()) return cmd_trace(instance, bits, fixed_iters, max_iters, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
