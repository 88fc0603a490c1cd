#include "coordbeam/model.h"

#include <cmath>
#include <utility>

#include "coordbeam/errors.h"

namespace coordbeam {

double PowerVector::sum() const {
  double s = 0.0;
  for (double v : value) s += v;
  return s;
}

ChannelSet::ChannelSet(std::size_t num_bs, std::size_t antennas, std::vector<int> serving,
                       std::vector<std::vector<CVec>> channels, std::vector<double> noise_power,
                       double power_limit)
    : num_bs_(num_bs),
      antennas_(antennas),
      serving_(std::move(serving)),
      channels_(std::move(channels)),
      noise_(std::move(noise_power)),
      power_limit_(power_limit) {
  const std::size_t k = serving_.size();
  if (num_bs_ < 1 || antennas_ < 1) throw ShapeMismatch("ChannelSet: need B >= 1, M >= 1");
  if (k < num_bs_) throw ShapeMismatch("ChannelSet: need K >= B");
  if (channels_.size() != k || noise_.size() != k)
    throw ShapeMismatch("ChannelSet: per-user arrays must have K entries");
  if (power_limit_ <= 0.0) throw ShapeMismatch("ChannelSet: power limit must be positive");
  served_by_.assign(num_bs_, {});
  for (std::size_t u = 0; u < k; ++u) {
    if (serving_[u] < 0 || static_cast<std::size_t>(serving_[u]) >= num_bs_)
      throw ShapeMismatch("ChannelSet: serving index out of range");
    if (noise_[u] <= 0.0) throw ShapeMismatch("ChannelSet: noise power must be positive");
    if (channels_[u].size() != num_bs_)
      throw ShapeMismatch("ChannelSet: each user needs a channel per BS");
    for (const auto& h : channels_[u])
      if (h.size() != antennas_) throw ShapeMismatch("ChannelSet: channel length != M");
    served_by_[serving_[u]].push_back(static_cast<int>(u));
  }
  for (std::size_t b = 0; b < num_bs_; ++b)
    if (served_by_[b].empty()) throw ShapeMismatch("ChannelSet: every BS must serve a user");
}

double ChannelSet::coupling(std::size_t user, std::size_t bs, const CVec& f) const {
  const cplx inner = dot(channels_[user][bs], f);
  return std::norm(inner) / noise_[user];
}

CMat ChannelSet::uplink_covariance(std::size_t k, std::size_t bs, const std::vector<double>& q,
                                   double noise_scale) const {
  CMat b(antennas_, antennas_);
  for (std::size_t i = 0; i < antennas_; ++i) b(i, i) = cplx(noise_scale, 0.0);
  for (std::size_t i = 0; i < num_users(); ++i) {
    if (i == k || q[i] == 0.0) continue;
    b.add_outer(channels_[i][bs], q[i] / noise_[i]);
  }
  return b;
}

ChannelSet ChannelSet::rescaled(double c) const {
  ChannelSet out = *this;
  for (auto& per_user : out.channels_)
    for (auto& h : per_user) h *= cplx(c, 0.0);
  for (auto& n : out.noise_) n *= c * c;
  return out;
}

double downlink_sinr(const ChannelSet& ch, const BeamformerSet& w, const PowerVector& p,
                     std::size_t k) {
  if (w.size() != ch.num_users() || p.size() != ch.num_users())
    throw ShapeMismatch("downlink_sinr: K mismatch");
  if (p.kind != PowerKind::kDownlink) throw ShapeMismatch("downlink_sinr: not a downlink vector");
  const std::size_t bk = static_cast<std::size_t>(ch.serving(k));
  const double signal = p[k] * ch.coupling(k, bk, w[k]);
  double denom = 1.0;
  for (std::size_t j = 0; j < ch.num_users(); ++j) {
    if (j == k) continue;
    denom += p[j] * ch.coupling(k, static_cast<std::size_t>(ch.serving(j)), w[j]);
  }
  return signal / denom;
}

double uplink_sinr(const ChannelSet& ch, const BeamformerSet& w, const PowerVector& q,
                   std::size_t k) {
  if (w.size() != ch.num_users() || q.size() != ch.num_users())
    throw ShapeMismatch("uplink_sinr: K mismatch");
  if (q.kind != PowerKind::kVirtualUplink)
    throw ShapeMismatch("uplink_sinr: not an uplink vector");
  const std::size_t bk = static_cast<std::size_t>(ch.serving(k));
  const double signal = q[k] * ch.coupling(k, bk, w[k]);
  const CMat cov = ch.uplink_covariance(k, bk, q.value);
  const double denom = quad_form(cov, w[k]).real();
  return signal / denom;
}

std::vector<double> all_downlink_sinr(const ChannelSet& ch, const BeamformerSet& w,
                                      const PowerVector& p) {
  std::vector<double> out(ch.num_users());
  for (std::size_t k = 0; k < ch.num_users(); ++k) out[k] = downlink_sinr(ch, w, p, k);
  return out;
}

double user_rate(double sinr) {
  if (sinr < 0.0) throw NegativeSinr();
  return std::log2(1.0 + sinr);
}

std::vector<double> user_rates(const std::vector<double>& sinrs) {
  std::vector<double> r(sinrs.size());
  for (std::size_t i = 0; i < sinrs.size(); ++i) r[i] = user_rate(sinrs[i]);
  return r;
}

std::vector<double> per_bs_power(const ChannelSet& ch, const PowerVector& p) {
  if (p.size() != ch.num_users()) throw ShapeMismatch("per_bs_power: K mismatch");
  std::vector<double> sums(ch.num_bs(), 0.0);
  for (std::size_t k = 0; k < ch.num_users(); ++k)
    sums[static_cast<std::size_t>(ch.serving(k))] += p[k];
  return sums;
}

}  // namespace coordbeam
