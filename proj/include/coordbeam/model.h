#ifndef COORDBEAM_MODEL_H_
#define COORDBEAM_MODEL_H_

#include <cstddef>
#include <vector>

#include "coordbeam/linalg.h"

namespace coordbeam {

enum class PowerKind { kDownlink, kVirtualUplink };

/// Per-user transmit powers, tagged with the direction they live in so
/// downlink and virtual-uplink vectors cannot be mixed up silently.
struct PowerVector {
  std::vector<double> value;  // watts, one per user
  PowerKind kind = PowerKind::kDownlink;

  PowerVector() = default;
  PowerVector(std::vector<double> v, PowerKind k) : value(std::move(v)), kind(k) {}

  std::size_t size() const { return value.size(); }
  double operator[](std::size_t k) const { return value[k]; }
  double& operator[](std::size_t k) { return value[k]; }
  double sum() const;
};

/// Unit-norm transmit directions, one per user. Each f_k is applied only at
/// the user's serving BS (the block-diagonal precoder restriction), so a
/// single M-vector per user is the whole state.
struct BeamformerSet {
  std::vector<CVec> f;

  std::size_t size() const { return f.size(); }
  const CVec& operator[](std::size_t k) const { return f[k]; }
  CVec& operator[](std::size_t k) { return f[k]; }
};

/// One instantaneous problem instance: channel vectors h_kb for every
/// (user, BS) pair, per-user noise powers, the serving map and the per-BS
/// power budget. Validated on construction.
class ChannelSet {
 public:
  ChannelSet(std::size_t num_bs, std::size_t antennas, std::vector<int> serving,
             std::vector<std::vector<CVec>> channels, std::vector<double> noise_power,
             double power_limit);

  std::size_t num_users() const { return serving_.size(); }
  std::size_t num_bs() const { return num_bs_; }
  std::size_t antennas() const { return antennas_; }
  double power_limit() const { return power_limit_; }

  int serving(std::size_t user) const { return serving_[user]; }
  const std::vector<int>& served_by(std::size_t bs) const { return served_by_[bs]; }

  /// Channel vector from BS `bs` to user `user` (linear amplitude).
  const CVec& channel(std::size_t user, std::size_t bs) const { return channels_[user][bs]; }
  double noise(std::size_t user) const { return noise_[user]; }

  /// |h_ub† f|^2 / sigma_u^2, the quadratic form f†H_{u,b}f that both SINR
  /// expressions are made of.
  double coupling(std::size_t user, std::size_t bs, const CVec& f) const;

  /// Uplink covariance at BS `bs` for user `k`:
  /// sum_{i != k} q_i H_{i,bs} + noise_scale * I.
  CMat uplink_covariance(std::size_t k, std::size_t bs, const std::vector<double>& q,
                         double noise_scale = 1.0) const;

  /// Returns a copy with every channel amplitude multiplied by c and every
  /// noise power by |c|^2 (SINR-invariant rescaling).
  ChannelSet rescaled(double c) const;

 private:
  std::size_t num_bs_ = 0;
  std::size_t antennas_ = 0;
  std::vector<int> serving_;                   // user -> BS
  std::vector<std::vector<int>> served_by_;    // BS -> users
  std::vector<std::vector<CVec>> channels_;    // [user][bs]
  std::vector<double> noise_;                  // per user
  double power_limit_ = 0.0;                   // per BS
};

/// Downlink SINR of user k (the served-signal over cross-beam interference
/// plus normalized noise ratio).
double downlink_sinr(const ChannelSet& ch, const BeamformerSet& w, const PowerVector& p,
                     std::size_t k);

/// Virtual-uplink SINR of user k with receive beamformer f_k at its serving BS.
double uplink_sinr(const ChannelSet& ch, const BeamformerSet& w, const PowerVector& q,
                   std::size_t k);

std::vector<double> all_downlink_sinr(const ChannelSet& ch, const BeamformerSet& w,
                                      const PowerVector& p);

/// Shannon rate log2(1 + sinr). Throws NegativeSinr.
double user_rate(double sinr);

std::vector<double> user_rates(const std::vector<double>& sinrs);

/// Per-BS power sums (same per-cell grouping for either direction tag).
std::vector<double> per_bs_power(const ChannelSet& ch, const PowerVector& p);

}  // namespace coordbeam

#endif  // COORDBEAM_MODEL_H_
