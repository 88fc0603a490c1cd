#ifndef COORDBEAM_SCENARIO_H_
#define COORDBEAM_SCENARIO_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "coordbeam/linalg.h"
#include "coordbeam/model.h"

namespace coordbeam {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

/// Static deployment parameters. Defaults follow the usual 1 km grid:
/// path loss -38 log10(d) - 34.5 dB with 8 dB lognormal shadowing, users at
/// least 350 m from their serving BS, cluster offset 0.4 * RSRP0.
struct TopologyConfig {
  std::vector<Point> bs_positions;       // filled from num_bs when empty
  std::size_t num_bs = 2;
  double inter_bs_distance = 1000.0;     // meters
  double min_serving_distance = 350.0;   // meters
  std::size_t antennas_per_bs = 4;
  double power_limit = 1.0;              // linear watts per BS
  double noise_power = 1.0;              // linear watts per user (uncalibrated default)
  double cluster_offset_fraction = 0.4;  // alpha_th = fraction * RSRP0
  double pathloss_exponent = 3.8;
  double pathloss_scale = 3.5481338923357547e-4;  // 10^-3.45
  double shadowing_stddev_db = 8.0;
  std::size_t users_per_bs = 1;          // scheduled users per BS per slot
  std::size_t pool_per_bs = 1;           // candidate pool for round-robin
  std::size_t schedule_slot = 0;         // rotation index into the pool
  bool require_full_cluster = true;      // resample until CoMP set = all BSs
  bool require_serving_strongest = true; // serving RSRP >= every neighbor RSRP

  /// BS positions: the configured list, or a regular polygon with side
  /// inter_bs_distance (a single point for B = 1, a segment for B = 2).
  std::vector<Point> resolved_bs_positions() const;

  void validate() const;
};

/// Loads flat `key = value` lines (# comments) into a TopologyConfig.
TopologyConfig load_topology_config(const std::string& path);

/// Bounded CSI uncertainty: a per-link radius for the uniform-in-ball
/// perturbation of the small-scale fading part.
struct CsiErrorConfig {
  double radius = 0.0;  // common sigma_kb for every link
};

/// One generated problem instance: scheduled user geometry, large-scale
/// gains (path loss * shadowing), small-scale fading and cluster reports.
struct DropScenario {
  std::vector<Point> user_positions;             // per scheduled user
  std::vector<int> serving;                      // user -> BS
  std::vector<std::set<int>> cluster;            // reported CoMP set per user
  std::vector<std::vector<double>> gains;        // [user][bs] linear power gain
  std::vector<std::vector<CVec>> small_scale;    // [user][bs] CN(0, I) part
  std::uint64_t rng_seed = 0;

  std::size_t num_users() const { return serving.size(); }
};

/// Linear large-scale gain beta * 10^(mu/10) / d^l. Throws NonPositiveDistance.
double large_scale_gain(double d_meters, double shadowing_db, const TopologyConfig& cfg);

/// Reported CoMP set for one user: serving BS plus every BS whose linear
/// RSRP is within the offset of the serving RSRP.
std::set<int> rsrp_cluster(std::size_t user, const DropScenario& drop,
                           const TopologyConfig& cfg);

/// Draws a full drop: positions uniform in the serving annulus (rejected
/// until the reported cluster covers all BSs when configured), N(0, sigma)
/// dB shadowing, CN(0, I) small-scale fading. Pure function of (cfg, seed).
DropScenario generate_drop(const TopologyConfig& cfg, std::uint64_t seed);

/// Copy of `drop` whose small-scale parts are displaced by a uniform draw
/// from the ball of radius err.radius. The draw direction and radius
/// fraction depend only on (seed, link), so sweeps over the radius with a
/// fixed seed are coupled. Large-scale gains are untouched.
DropScenario perturb_csi(const DropScenario& drop, const CsiErrorConfig& err,
                         std::uint64_t seed);

/// Instance assembly: h_kb = sqrt(gain_kb) * small_scale_kb with the
/// configured common noise power.
ChannelSet to_channel_set(const DropScenario& drop, const TopologyConfig& cfg);

/// Instance assembly with per-user noise calibrated so every scheduled user
/// sees exactly `snr_db` of average serving-BS power over noise.
ChannelSet to_channel_set_at_snr(const DropScenario& drop, const TopologyConfig& cfg,
                                 double snr_db);

}  // namespace coordbeam

#endif  // COORDBEAM_SCENARIO_H_
