#include "coordbeam/scenario.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "coordbeam/errors.h"
#include "coordbeam/rng.h"

namespace coordbeam {

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::vector<Point> TopologyConfig::resolved_bs_positions() const {
  if (!bs_positions.empty()) return bs_positions;
  std::vector<Point> pos;
  if (num_bs == 1) {
    pos.push_back({0.0, 0.0});
    return pos;
  }
  // Regular polygon with side length inter_bs_distance (a segment for B = 2).
  const double r = inter_bs_distance / (2.0 * std::sin(M_PI / static_cast<double>(num_bs)));
  for (std::size_t b = 0; b < num_bs; ++b) {
    const double ang = 2.0 * M_PI * static_cast<double>(b) / static_cast<double>(num_bs);
    pos.push_back({r * std::cos(ang), r * std::sin(ang)});
  }
  return pos;
}

void TopologyConfig::validate() const {
  if (num_bs < 1 || antennas_per_bs < 1 || users_per_bs < 1)
    throw ShapeMismatch("topology: counts must be >= 1");
  if (inter_bs_distance <= 0 || min_serving_distance <= 0 || power_limit <= 0 ||
      noise_power <= 0 || pathloss_exponent <= 0 || pathloss_scale <= 0 ||
      shadowing_stddev_db < 0)
    throw ShapeMismatch("topology: parameters must be positive");
  if (cluster_offset_fraction < 0.0 || cluster_offset_fraction >= 1.0)
    throw ShapeMismatch("topology: cluster_offset_fraction must be in [0, 1)");
  if (min_serving_distance >= inter_bs_distance / 2.0)
    throw ShapeMismatch("topology: min serving distance must be below the cell radius");
}

TopologyConfig load_topology_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  TopologyConfig cfg;
  std::string line;
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
    if (key == "num_bs") cfg.num_bs = std::stoul(val);
    else if (key == "inter_bs_distance") cfg.inter_bs_distance = std::stod(val);
    else if (key == "min_serving_distance") cfg.min_serving_distance = std::stod(val);
    else if (key == "antennas_per_bs") cfg.antennas_per_bs = std::stoul(val);
    else if (key == "power_limit") cfg.power_limit = std::stod(val);
    else if (key == "noise_power") cfg.noise_power = std::stod(val);
    else if (key == "cluster_offset_fraction") cfg.cluster_offset_fraction = std::stod(val);
    else if (key == "pathloss_exponent") cfg.pathloss_exponent = std::stod(val);
    else if (key == "pathloss_scale") cfg.pathloss_scale = std::stod(val);
    else if (key == "shadowing_stddev" || key == "shadowing_stddev_db")
      cfg.shadowing_stddev_db = std::stod(val);
    else if (key == "users_per_bs") cfg.users_per_bs = std::stoul(val);
    else if (key == "pool_per_bs") cfg.pool_per_bs = std::stoul(val);
    else if (key == "schedule_slot") cfg.schedule_slot = std::stoul(val);
    else if (key == "require_full_cluster") cfg.require_full_cluster = (val == "1" || val == "true");
    else if (key == "require_serving_strongest")
      cfg.require_serving_strongest = (val == "1" || val == "true");
    else if (key == "bs_positions") {
      cfg.bs_positions.clear();
      std::stringstream ss(val);
      std::string pair;
      while (std::getline(ss, pair, ';')) {
        const auto comma = pair.find(',');
        if (comma == std::string::npos) throw Error("bs_positions: expected x,y;x,y");
        cfg.bs_positions.push_back({std::stod(pair.substr(0, comma)),
                                    std::stod(pair.substr(comma + 1))});
      }
      cfg.num_bs = cfg.bs_positions.size();
    } else {
      throw Error("unknown topology key: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

double large_scale_gain(double d_meters, double shadowing_db, const TopologyConfig& cfg) {
  if (d_meters <= 0.0) throw NonPositiveDistance();
  return cfg.pathloss_scale * std::pow(10.0, shadowing_db / 10.0) /
         std::pow(d_meters, cfg.pathloss_exponent);
}

namespace {

std::set<int> cluster_from_gains(const std::vector<double>& gains, int serving,
                                 const TopologyConfig& cfg) {
  // Linear-scale rule: RSRP_i >= RSRP_0 - alpha_th with alpha_th a fraction
  // of the serving RSRP; the common P_BS factor cancels.
  const double threshold = (1.0 - cfg.cluster_offset_fraction) * gains[serving];
  std::set<int> out;
  out.insert(serving);
  for (std::size_t b = 0; b < gains.size(); ++b)
    if (gains[b] >= threshold) out.insert(static_cast<int>(b));
  return out;
}

}  // namespace

std::set<int> rsrp_cluster(std::size_t user, const DropScenario& drop,
                           const TopologyConfig& cfg) {
  if (user >= drop.num_users()) throw ShapeMismatch("rsrp_cluster: user out of range");
  return cluster_from_gains(drop.gains[user], drop.serving[user], cfg);
}

DropScenario generate_drop(const TopologyConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto bs_pos = cfg.resolved_bs_positions();
  const std::size_t num_bs = bs_pos.size();
  const std::size_t pool = std::max(cfg.pool_per_bs, cfg.users_per_bs);
  const double cell_radius = cfg.inter_bs_distance / 2.0;

  Rng rng = Rng::substream(seed, 0);

  struct Candidate {
    Point pos;
    std::vector<double> gains;
    std::set<int> cluster;
  };

  DropScenario drop;
  drop.rng_seed = seed;

  for (std::size_t b = 0; b < num_bs; ++b) {
    std::vector<Candidate> candidates;
    for (std::size_t u = 0; u < pool; ++u) {
      Candidate c;
      for (int tries = 0;; ++tries) {
        if (tries > 1000000)
          throw NonConvergence("generate_drop: cannot place a full-cluster user");
        // Uniform by area in the serving annulus.
        const double r0 = cfg.min_serving_distance;
        const double r = std::sqrt(rng.uniform(r0 * r0, cell_radius * cell_radius));
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        c.pos = {bs_pos[b].x + r * std::cos(ang), bs_pos[b].y + r * std::sin(ang)};
        c.gains.assign(num_bs, 0.0);
        for (std::size_t bb = 0; bb < num_bs; ++bb) {
          const double mu = cfg.shadowing_stddev_db * rng.gaussian();
          c.gains[bb] = large_scale_gain(distance(c.pos, bs_pos[bb]), mu, cfg);
        }
        c.cluster = cluster_from_gains(c.gains, static_cast<int>(b), cfg);
        bool ok = !cfg.require_full_cluster || c.cluster.size() == num_bs;
        if (ok && cfg.require_serving_strongest) {
          // Cell association: the serving BS is the strongest received one.
          for (double g : c.gains) ok &= g <= c.gains[b];
        }
        if (ok) break;
      }
      candidates.push_back(std::move(c));
    }
    // Round-robin: rotate the candidate pool by the slot index.
    for (std::size_t i = 0; i < cfg.users_per_bs; ++i) {
      const Candidate& c = candidates[(cfg.schedule_slot + i) % pool];
      drop.user_positions.push_back(c.pos);
      drop.serving.push_back(static_cast<int>(b));
      drop.cluster.push_back(c.cluster);
      drop.gains.push_back(c.gains);
    }
  }

  for (std::size_t k = 0; k < drop.num_users(); ++k) {
    std::vector<CVec> row;
    for (std::size_t b = 0; b < num_bs; ++b)
      row.push_back(rng.complex_gaussian_vector(cfg.antennas_per_bs));
    drop.small_scale.push_back(std::move(row));
  }
  return drop;
}

DropScenario perturb_csi(const DropScenario& drop, const CsiErrorConfig& err,
                         std::uint64_t seed) {
  if (err.radius < 0.0) throw ShapeMismatch("perturb_csi: radius must be >= 0");
  DropScenario out = drop;
  if (err.radius == 0.0) return out;
  const std::size_t num_bs = drop.gains.empty() ? 0 : drop.gains[0].size();
  for (std::size_t k = 0; k < drop.num_users(); ++k) {
    for (std::size_t b = 0; b < num_bs; ++b) {
      Rng rng = Rng::substream(seed, k * num_bs + b + 1);
      const std::size_t m = drop.small_scale[k][b].size();
      out.small_scale[k][b] += rng.uniform_in_ball(m, err.radius);
    }
  }
  return out;
}

namespace {

ChannelSet assemble(const DropScenario& drop, const TopologyConfig& cfg,
                    std::vector<double> noise) {
  const std::size_t num_bs = drop.gains.empty() ? 0 : drop.gains[0].size();
  std::vector<std::vector<CVec>> channels;
  for (std::size_t k = 0; k < drop.num_users(); ++k) {
    std::vector<CVec> row;
    for (std::size_t b = 0; b < num_bs; ++b) {
      CVec h = drop.small_scale[k][b];
      h *= cplx(std::sqrt(drop.gains[k][b]), 0.0);
      row.push_back(std::move(h));
    }
    channels.push_back(std::move(row));
  }
  return ChannelSet(num_bs, cfg.antennas_per_bs, drop.serving, std::move(channels),
                    std::move(noise), cfg.power_limit);
}

}  // namespace

ChannelSet to_channel_set(const DropScenario& drop, const TopologyConfig& cfg) {
  return assemble(drop, cfg, std::vector<double>(drop.num_users(), cfg.noise_power));
}

ChannelSet to_channel_set_at_snr(const DropScenario& drop, const TopologyConfig& cfg,
                                 double snr_db) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  std::vector<double> noise(drop.num_users());
  for (std::size_t k = 0; k < drop.num_users(); ++k) {
    const int b = drop.serving[k];
    noise[k] = cfg.power_limit * drop.gains[k][static_cast<std::size_t>(b)] / snr;
  }
  return assemble(drop, cfg, std::move(noise));
}

}  // namespace coordbeam
