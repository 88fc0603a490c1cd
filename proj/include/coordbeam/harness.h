#ifndef COORDBEAM_HARNESS_H_
#define COORDBEAM_HARNESS_H_

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coordbeam/baselines.h"
#include "coordbeam/centralized.h"
#include "coordbeam/distributed.h"
#include "coordbeam/scenario.h"

namespace coordbeam {

/// A Monte-Carlo experiment: which figure analogue to run, the cluster
/// shape, the SNR sweep and the scheme list.
struct ExperimentSpec {
  std::string id = "custom";  // fig1_boundary | fig3_phi_cdf | fig4_worst_rate |
                              // fig5_worst_cdf | fig6_sumrate_cdf |
                              // fig7_quantization | fig8_csi_error | custom
  std::size_t antennas = 4;
  std::size_t num_bs = 3;
  std::size_t users_per_bs = 1;
  std::vector<double> snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
  int drops = 500;
  std::vector<std::string> schemes = {"centralized", "distributed", "sginr", "ne", "nbs"};
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  bool write_svg = true;

  TopologyConfig topology;
  DistributedConfig distributed;
  BalancingConfig balancing;
  std::vector<double> csi_sigmas = {0.0, 0.05, 0.1, 0.2};  // fig8 sweep
  std::vector<int> quant_bits_list = {0, 2, 3, 4};         // fig7 sweep
  int fixed_iters = 2;                                     // fig7/fig8 budget
  int boundary_resolution = 120;                           // fig1 grid

  std::size_t num_users() const { return num_bs * users_per_bs; }
  void validate() const;
};

ExperimentSpec load_experiment_spec(const std::string& path);

/// One solved drop for one scheme.
struct DropResult {
  bool ok = false;
  std::string scheme;
  double snr_db = 0.0;
  std::uint64_t drop_seed = 0;
  std::vector<double> rates;
  double worst_rate = 0.0;
  double sum_rate = 0.0;
  double gamma = 0.0;
  int iterations = 0;
  long long scalars = 0;
  double phi = std::numeric_limits<double>::quiet_NaN();
  double eta_min = std::numeric_limits<double>::quiet_NaN();
  bool clipped = false;
  // Sum-rate reference for the ratio column: the 2-user boundary maximum
  // when available, otherwise the best scheme on this drop (proxy).
  double ref_sum = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

/// Aggregates for one (scheme, SNR) cell.
struct MetricsCell {
  std::string scheme;
  double snr_db = 0.0;
  int count = 0;
  int failures = 0;
  double mean_worst_rate = 0.0;
  double mean_sum_rate = 0.0;
  double mean_iterations = 0.0;
  double mean_scalars = 0.0;
  std::vector<double> worst_rate_samples;  // sorted
  std::vector<double> phi_samples;         // sorted
  std::vector<double> sum_ratio_samples;   // sorted
};

struct MetricsTable {
  std::vector<MetricsCell> cells;
  int total_failures = 0;

  const MetricsCell* find(const std::string& scheme, double snr_db) const;
};

double worst_user_rate(const RatePoint& rates);
double worst_user_rate(const std::vector<double>& rates);

/// Sum-rate of `rates` over sum-rate of `reference`. Throws ZeroReference.
double sum_rate_ratio(const RatePoint& rates, const RatePoint& reference);

/// Right-continuous empirical CDF at the distinct sample values.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> samples);

/// Runs one scheme on one instance. `ch_true` carries the real channels the
/// rates are evaluated on; `ch_nominal` is what the solver sees (identical
/// unless a CSI-error variant is requested). Understands the base scheme
/// names plus variants like distributed_b3_i2 (quantizer bits, fixed
/// iterations) and distributed_s0.10_i2 (CSI error tag, informational).
DropResult run_scheme(const std::string& scheme, const ChannelSet& ch_true,
                      const ChannelSet& ch_nominal, const ExperimentSpec& spec);

/// Full Monte-Carlo drive: generates drops, solves every scheme at every
/// SNR, writes rows/summary/CDF CSVs (and SVG plots) under spec.out_dir.
/// Deterministic for a fixed (spec, seed); drops run in parallel with
/// per-drop substreams, reduced in drop order.
MetricsTable run_experiment(const ExperimentSpec& spec);

}  // namespace coordbeam

#endif  // COORDBEAM_HARNESS_H_
