#include "coordbeam/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "coordbeam/duality.h"
#include "coordbeam/errors.h"
#include "coordbeam/rng.h"

namespace coordbeam {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

unsigned thread_count() {
  if (const char* env = std::getenv("COORDBEAM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::uint64_t drop_seed_for(std::uint64_t master, int drop) {
  return Rng::substream(master, 0x0d00 + static_cast<std::uint64_t>(drop)).raw();
}

struct SchemeTags {
  std::string base;
  int quant_bits = -1;   // -1: not specified
  int fixed_iters = -1;
  double csi_sigma = 0.0;
};

SchemeTags parse_scheme(const std::string& name) {
  SchemeTags t;
  std::stringstream ss(name);
  std::string tok;
  bool first = true;
  auto numeric_tail = [](const std::string& s, double& out) {
    if (s.size() < 2) return false;
    std::size_t used = 0;
    try {
      out = std::stod(s.substr(1), &used);
    } catch (...) {
      return false;
    }
    return used == s.size() - 1;
  };
  while (std::getline(ss, tok, '_')) {
    if (first) {
      t.base = tok;
      first = false;
      continue;
    }
    double v = 0.0;
    if (tok.size() > 1 && tok[0] == 'b' && numeric_tail(tok, v))
      t.quant_bits = static_cast<int>(v);
    else if (tok.size() > 1 && tok[0] == 'i' && numeric_tail(tok, v))
      t.fixed_iters = static_cast<int>(v);
    else if (tok.size() > 1 && tok[0] == 's' && numeric_tail(tok, v))
      t.csi_sigma = v;
    else if (!tok.empty())
      t.base += "_" + tok;  // e.g. centralized_step1
  }
  return t;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (drops < 1) throw ShapeMismatch("experiment: drops must be >= 1");
  if (schemes.empty()) throw ShapeMismatch("experiment: scheme list must be nonempty");
  if (snr_db.empty()) throw ShapeMismatch("experiment: SNR list must be nonempty");
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open experiment spec: " + path);
  ExperimentSpec spec;
  std::string line;
  auto parse_list = [](const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
  };
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) continue;
    if (key == "experiment") spec.id = val;
    else if (key == "antennas" || key == "m") spec.antennas = std::stoul(val);
    else if (key == "num_bs" || key == "b") spec.num_bs = std::stoul(val);
    else if (key == "users_per_bs") spec.users_per_bs = std::stoul(val);
    else if (key == "snr_db") spec.snr_db = parse_list(val);
    else if (key == "drops") spec.drops = std::stoi(val);
    else if (key == "seed") spec.seed = std::stoull(val);
    else if (key == "out") spec.out_dir = val;
    else if (key == "svg") spec.write_svg = (val == "1" || val == "true");
    else if (key == "schemes") {
      spec.schemes.clear();
      std::stringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ',')) spec.schemes.push_back(tok);
    } else if (key == "csi_sigmas") spec.csi_sigmas = parse_list(val);
    else if (key == "quant_bits_list") {
      spec.quant_bits_list.clear();
      for (double v : parse_list(val)) spec.quant_bits_list.push_back(static_cast<int>(v));
    } else if (key == "fixed_iters") spec.fixed_iters = std::stoi(val);
    else if (key == "boundary_resolution") spec.boundary_resolution = std::stoi(val);
    else if (key == "distributed.eps") spec.distributed.eps_rel = std::stod(val);
    else if (key == "distributed.max_iters") spec.distributed.max_iters = std::stoi(val);
    else if (key == "distributed.fixed_iters") spec.distributed.fixed_iters = std::stoi(val);
    else if (key == "distributed.quant_bits") spec.distributed.quant_bits = std::stoi(val);
    else if (key == "distributed.init")
      spec.distributed.init = val == "uniform" ? DistributedConfig::Init::kUniformRandom
                                               : DistributedConfig::Init::kZeros;
    else if (key == "topology.inter_bs_distance") spec.topology.inter_bs_distance = std::stod(val);
    else if (key == "topology.min_serving_distance")
      spec.topology.min_serving_distance = std::stod(val);
    else if (key == "topology.power_limit") spec.topology.power_limit = std::stod(val);
    else if (key == "topology.cluster_offset_fraction")
      spec.topology.cluster_offset_fraction = std::stod(val);
    else if (key == "topology.shadowing_stddev")
      spec.topology.shadowing_stddev_db = std::stod(val);
    else if (key == "topology.require_full_cluster")
      spec.topology.require_full_cluster = (val == "1" || val == "true");
    else throw Error("unknown experiment key: " + key);
  }
  spec.validate();
  return spec;
}

double worst_user_rate(const std::vector<double>& rates) {
  if (rates.empty()) throw EmptySamples("worst_user_rate: no rates");
  return *std::min_element(rates.begin(), rates.end());
}

double worst_user_rate(const RatePoint& rates) { return worst_user_rate(rates.rates); }

double sum_rate_ratio(const RatePoint& rates, const RatePoint& reference) {
  double num = 0.0, den = 0.0;
  for (double r : rates.rates) num += r;
  for (double r : reference.rates) den += r;
  if (den <= 0.0) throw ZeroReference();
  return num / den;
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples) {
  if (samples.empty()) throw EmptySamples("empirical_cdf: no samples");
  std::sort(samples.begin(), samples.end());
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    out.emplace_back(samples[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

DropResult run_scheme(const std::string& scheme, const ChannelSet& ch_true,
                      const ChannelSet& ch_nominal, const ExperimentSpec& spec) {
  DropResult res;
  res.scheme = scheme;
  const SchemeTags tags = parse_scheme(scheme);
  try {
    BeamformerSet beams;
    PowerVector powers;
    if (tags.base == "ne") {
      const Design d = ne_solution(ch_nominal);
      beams = d.beams;
      powers = d.powers;
    } else if (tags.base == "sginr") {
      const Design d = sginr_solution(ch_nominal);
      beams = d.beams;
      powers = d.powers;
    } else if (tags.base == "nbs") {
      const NbsResult nbs = nbs_solution(ch_nominal);
      beams = nbs.design.beams;
      powers = nbs.design.powers;
      if (nbs.degenerate) res.error = "nbs_degenerate";
    } else if (tags.base == "centralized" || tags.base == "centralized_step1") {
      const SolveOutcome step1 = solve_max_min(ch_nominal, spec.balancing);
      res.gamma = step1.gamma_star;
      res.iterations = step1.iterations;
      SolveOutcome final = step1;
      if (tags.base == "centralized") {
        final = pareto_improve(ch_nominal, step1);
        const double w1 = worst_user_rate(
            user_rates(all_downlink_sinr(ch_nominal, step1.beams, step1.powers)));
        const double w2 = worst_user_rate(
            user_rates(all_downlink_sinr(ch_nominal, final.beams, final.powers)));
        if (w2 < w1 - 1e-8) throw Error("improvement step decreased the worst rate");
      }
      beams = final.beams;
      powers = final.powers;
    } else if (tags.base == "distributed") {
      DistributedConfig cfg = spec.distributed;
      if (tags.quant_bits >= 0) cfg.quant_bits = tags.quant_bits;
      if (tags.fixed_iters >= 0) cfg.fixed_iters = tags.fixed_iters;
      DistributedRun run = run_to_convergence(ch_nominal, cfg);
      res.gamma = run.uplink.gamma_star;
      res.iterations = run.uplink.iterations;
      const std::vector<double> rho(ch_nominal.num_users(), 1.0);
      const PowerVector p_raw =
          downlink_power_from_uplink(ch_nominal, run.uplink.beams, run.uplink.gamma_star, rho);
      res.phi = excess_power(p_raw, ch_nominal);
      const auto eta = diag_dominance(ch_nominal, run.uplink.beams, run.uplink.gamma_star, rho);
      res.eta_min = *std::min_element(eta.begin(), eta.end());
      const SolveOutcome out = finalize_downlink(ch_nominal, run);
      res.scalars = out.backhaul_scalars;
      res.clipped = out.clipped;
      beams = out.beams;
      powers = out.powers;
    } else {
      throw Error("unknown scheme: " + scheme);
    }
    res.rates = user_rates(all_downlink_sinr(ch_true, beams, powers));
    res.worst_rate = worst_user_rate(res.rates);
    res.sum_rate = 0.0;
    for (double r : res.rates) res.sum_rate += r;
    if (tags.base != "distributed" && tags.base != "centralized" &&
        tags.base != "centralized_step1") {
      const auto sinrs = all_downlink_sinr(ch_true, beams, powers);
      res.gamma = *std::min_element(sinrs.begin(), sinrs.end());
    }
    res.ok = true;
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
  }
  return res;
}

namespace {

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<std::string>& labels,
                     const std::vector<std::vector<std::pair<double, double>>>& series) {
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                            "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (const auto& [x, y] : s) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double w = 640, h = 420, ml = 60, mr = 20, mt = 40, mb = 45;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
  std::ofstream out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
      << h - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    out << "<text x=\"" << px(fx) << "\" y=\"" << h - mb + 16
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << kColors[s % 8] << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[s]) out << px(x) << "," << py(y) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << w - mr - 150 << "\" y=\"" << mt + 16 * (s + 1) << "\" fill=\""
        << kColors[s % 8] << "\" font-size=\"12\">" << labels[s] << "</text>\n";
  }
  out << "</svg>\n";
}

void write_cdf_csv(const std::string& path, const std::vector<double>& samples) {
  std::ofstream out(path);
  out << "value,probability\n";
  for (const auto& [v, p] : empirical_cdf(samples)) out << fmt(v) << "," << fmt(p) << "\n";
}

}  // namespace

const MetricsCell* MetricsTable::find(const std::string& scheme, double snr) const {
  for (const auto& c : cells)
    if (c.scheme == scheme && c.snr_db == snr) return &c;
  return nullptr;
}

MetricsTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);

  TopologyConfig topo = spec.topology;
  topo.num_bs = spec.num_bs;
  topo.antennas_per_bs = spec.antennas;
  topo.users_per_bs = spec.users_per_bs;
  topo.bs_positions.clear();
  topo.validate();

  // Scheme list per experiment family.
  std::vector<std::string> schemes = spec.schemes;
  if (spec.id == "fig3_phi_cdf") {
    schemes = {"distributed"};
  } else if (spec.id == "fig7_quantization") {
    schemes.clear();
    for (int bits : spec.quant_bits_list)
      schemes.push_back("distributed_b" + std::to_string(bits) + "_i" +
                        std::to_string(spec.fixed_iters));
  } else if (spec.id == "fig8_csi_error") {
    schemes.clear();
    for (double s : spec.csi_sigmas) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "distributed_s%g_i%d", s, spec.fixed_iters);
      schemes.push_back(buf);
    }
    schemes.push_back("sginr");
  } else if (spec.id == "fig1_boundary") {
    schemes = {"centralized", "distributed", "sginr", "ne", "nbs"};
  }

  // fig1 is a per-realization boundary dump, run serially.
  if (spec.id == "fig1_boundary") {
    MetricsTable table;
    for (int d = 0; d < spec.drops; ++d) {
      const std::uint64_t ds = drop_seed_for(spec.seed, d);
      const DropScenario drop = generate_drop(topo, ds);
      const ChannelSet ch = to_channel_set_at_snr(drop, topo, spec.snr_db.front());
      const auto boundary = pareto_boundary_2user(ch, spec.boundary_resolution);
      std::ofstream bf(spec.out_dir + "/boundary_drop" + std::to_string(d) + ".csv");
      bf << "r1,r2\n";
      for (const auto& pt : boundary) bf << fmt(pt.rates[0]) << "," << fmt(pt.rates[1]) << "\n";
      std::ofstream pf(spec.out_dir + "/points_drop" + std::to_string(d) + ".csv");
      pf << "scheme,r1,r2\n";
      for (const auto& s : schemes) {
        const DropResult r = run_scheme(s, ch, ch, spec);
        if (r.ok) pf << s << "," << fmt(r.rates[0]) << "," << fmt(r.rates[1]) << "\n";
      }
    }
    return table;
  }

  // Parallel drop engine with an ordered reduce.
  const int drops = spec.drops;
  std::vector<std::vector<DropResult>> per_drop(static_cast<std::size_t>(drops));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int d = next.fetch_add(1);
      if (d >= drops) return;
      const std::uint64_t ds = drop_seed_for(spec.seed, d);
      std::vector<DropResult> rows;
      try {
        const DropScenario drop = generate_drop(topo, ds);
        for (double snr : spec.snr_db) {
          const ChannelSet ch_true = to_channel_set_at_snr(drop, topo, snr);
          double boundary_sum = std::numeric_limits<double>::quiet_NaN();
          if (spec.id == "fig6_sumrate_cdf" && ch_true.num_users() == 2 &&
              ch_true.num_bs() == 2) {
            boundary_sum = 0.0;
            for (const auto& pt : pareto_boundary_2user(ch_true, spec.boundary_resolution))
              boundary_sum = std::max(boundary_sum, pt.rates[0] + pt.rates[1]);
          }
          for (const auto& scheme : schemes) {
            const SchemeTags tags = parse_scheme(scheme);
            DropResult r;
            if (tags.base == "distributed" && tags.csi_sigma > 0.0) {
              const DropScenario noisy = perturb_csi(drop, {tags.csi_sigma}, ds);
              const ChannelSet ch_nom = to_channel_set_at_snr(noisy, topo, snr);
              r = run_scheme(scheme, ch_true, ch_nom, spec);
            } else {
              r = run_scheme(scheme, ch_true, ch_true, spec);
            }
            r.snr_db = snr;
            r.drop_seed = ds;
            r.ref_sum = boundary_sum;
            rows.push_back(std::move(r));
          }
        }
      } catch (const std::exception& e) {
        // Drop-level failure: record one failed row per scheme/SNR so the
        // aggregation sees it, then carry on.
        rows.clear();
        for (double snr : spec.snr_db)
          for (const auto& scheme : schemes) {
            DropResult r;
            r.ok = false;
            r.scheme = scheme;
            r.snr_db = snr;
            r.drop_seed = ds;
            r.error = e.what();
            rows.push_back(std::move(r));
          }
      }
      per_drop[static_cast<std::size_t>(d)] = std::move(rows);
    }
  };
  {
    const unsigned n = std::min<unsigned>(thread_count(), static_cast<unsigned>(drops));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i + 1 < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }

  // Rows CSV in drop order.
  std::ofstream rows_csv(spec.out_dir + "/rows.csv");
  rows_csv << "seed,scheme,snr_db,worst_rate,sum_rate,gamma,iterations,scalars,phi,eta_min,"
              "clipped_flag\n";
  for (const auto& rows : per_drop)
    for (const auto& r : rows) {
      rows_csv << r.drop_seed << "," << r.scheme << "," << fmt(r.snr_db) << ","
               << (r.ok ? fmt(r.worst_rate) : "nan") << "," << (r.ok ? fmt(r.sum_rate) : "nan")
               << "," << fmt(r.gamma) << "," << r.iterations << "," << r.scalars << ","
               << fmt(r.phi) << "," << fmt(r.eta_min) << "," << (r.clipped ? 1 : 0) << "\n";
    }
  rows_csv.close();

  // Aggregate.
  MetricsTable table;
  std::map<std::pair<std::string, double>, MetricsCell> cells;
  for (const auto& scheme : schemes)
    for (double snr : spec.snr_db) {
      MetricsCell c;
      c.scheme = scheme;
      c.snr_db = snr;
      cells[{scheme, snr}] = c;
    }
  for (std::size_t d = 0; d < per_drop.size(); ++d) {
    // Sum-rate reference per (drop, snr): the boundary maximum when the
    // worker computed one (K = 2), otherwise the best scheme sum as the
    // proxy for the unavailable optimum at K >= 3.
    std::map<double, double> ref_sum;
    for (const auto& r : per_drop[d]) {
      if (std::isfinite(r.ref_sum))
        ref_sum[r.snr_db] = std::max(ref_sum[r.snr_db], r.ref_sum);
      else if (r.ok)
        ref_sum[r.snr_db] = std::max(ref_sum[r.snr_db], r.sum_rate);
    }
    for (const auto& r : per_drop[d]) {
      MetricsCell& c = cells[{r.scheme, r.snr_db}];
      if (!r.ok) {
        ++c.failures;
        ++table.total_failures;
        continue;
      }
      ++c.count;
      c.mean_worst_rate += r.worst_rate;
      c.mean_sum_rate += r.sum_rate;
      c.mean_iterations += r.iterations;
      c.mean_scalars += static_cast<double>(r.scalars);
      c.worst_rate_samples.push_back(r.worst_rate);
      if (std::isfinite(r.phi)) c.phi_samples.push_back(r.phi);
      if (ref_sum[r.snr_db] > 0.0) c.sum_ratio_samples.push_back(r.sum_rate / ref_sum[r.snr_db]);
    }
  }
  for (auto& [key, c] : cells) {
    if (c.count > 0) {
      c.mean_worst_rate /= c.count;
      c.mean_sum_rate /= c.count;
      c.mean_iterations /= c.count;
      c.mean_scalars /= c.count;
    }
    std::sort(c.worst_rate_samples.begin(), c.worst_rate_samples.end());
    std::sort(c.phi_samples.begin(), c.phi_samples.end());
    std::sort(c.sum_ratio_samples.begin(), c.sum_ratio_samples.end());
    table.cells.push_back(c);
  }

  // Summary CSV.
  std::ofstream sum_csv(spec.out_dir + "/summary.csv");
  sum_csv << "scheme,snr_db,count,failures,mean_worst_rate,mean_sum_rate,mean_iterations,"
             "mean_scalars\n";
  for (const auto& c : table.cells)
    sum_csv << c.scheme << "," << fmt(c.snr_db) << "," << c.count << "," << c.failures << ","
            << fmt(c.mean_worst_rate) << "," << fmt(c.mean_sum_rate) << ","
            << fmt(c.mean_iterations) << "," << fmt(c.mean_scalars) << "\n";
  sum_csv.close();

  // Experiment-specific artifacts.
  if (spec.id == "fig3_phi_cdf") {
    for (const auto& c : table.cells) {
      if (c.phi_samples.empty()) continue;
      char buf[80];
      std::snprintf(buf, sizeof buf, "/cdf_phi_snr%g.csv", c.snr_db);
      write_cdf_csv(spec.out_dir + buf, c.phi_samples);
    }
  }
  if (spec.id == "fig5_worst_cdf" || spec.id == "fig6_sumrate_cdf") {
    for (const auto& c : table.cells) {
      const auto& samples =
          spec.id == "fig5_worst_cdf" ? c.worst_rate_samples : c.sum_ratio_samples;
      if (samples.empty()) continue;
      char buf[160];
      std::snprintf(buf, sizeof buf, "/cdf_%s_%s_snr%g.csv",
                    spec.id == "fig5_worst_cdf" ? "worst" : "sumratio", c.scheme.c_str(),
                    c.snr_db);
      write_cdf_csv(spec.out_dir + buf, samples);
    }
  }
  if (spec.write_svg) {
    std::vector<std::string> labels;
    std::vector<std::vector<std::pair<double, double>>> series;
    for (const auto& scheme : schemes) {
      std::vector<std::pair<double, double>> line;
      for (double snr : spec.snr_db) {
        const MetricsCell* c = table.find(scheme, snr);
        if (c && c->count > 0) line.emplace_back(snr, c->mean_worst_rate);
      }
      if (!line.empty()) {
        labels.push_back(scheme);
        series.push_back(std::move(line));
      }
    }
    if (!series.empty())
      write_svg_lines(spec.out_dir + "/worst_rate.svg", "mean worst-user rate vs SNR (dB)",
                      labels, series);
  }
  return table;
}

}  // namespace coordbeam
