#ifndef COORDBEAM_TESTS_SUPPORT_H_
#define COORDBEAM_TESTS_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <vector>

#include "coordbeam/linalg.h"
#include "coordbeam/model.h"
#include "coordbeam/rng.h"
#include "coordbeam/scenario.h"

namespace coordbeam::test {

/// The scalar two-cell instance used throughout: M = 1, B = K = 2,
/// |h_kk| = 1, cross gains 0.5, unit noise, P_BS = 4.
inline ChannelSet make_s2() {
  std::vector<std::vector<CVec>> channels = {
      {CVec{cplx(1.0, 0.0)}, CVec{cplx(0.5, 0.0)}},
      {CVec{cplx(0.5, 0.0)}, CVec{cplx(1.0, 0.0)}},
  };
  return ChannelSet(2, 1, {0, 1}, std::move(channels), {1.0, 1.0}, 4.0);
}

/// Two decoupled cells: orthogonal serving channels, zero cross gains.
inline ChannelSet make_decoupled(double p_bs = 4.0) {
  std::vector<std::vector<CVec>> channels = {
      {CVec{cplx(1.0, 0.0), cplx(0.0, 0.0)}, CVec{cplx(0.0, 0.0), cplx(0.0, 0.0)}},
      {CVec{cplx(0.0, 0.0), cplx(0.0, 0.0)}, CVec{cplx(0.0, 0.0), cplx(1.0, 0.0)}},
  };
  return ChannelSet(2, 2, {0, 1}, std::move(channels), {1.0, 1.0}, p_bs);
}

/// Deterministic synthetic instance: CN(0, I) serving channels, cross
/// channels scaled by `coupling`, noise set for the given per-user SNR at
/// unit power budget.
inline ChannelSet random_instance(std::size_t m, std::size_t k, std::size_t b, double snr_db,
                                  std::uint64_t seed, double coupling = 0.7,
                                  double p_bs = 1.0) {
  Rng rng = Rng::substream(seed, 0x5eed);
  std::vector<int> serving(k);
  for (std::size_t u = 0; u < k; ++u) serving[u] = static_cast<int>(u % b);
  std::vector<std::vector<CVec>> channels(k);
  for (std::size_t u = 0; u < k; ++u) {
    for (std::size_t bb = 0; bb < b; ++bb) {
      CVec h = rng.complex_gaussian_vector(m);
      if (static_cast<int>(bb) != serving[u]) h *= cplx(coupling, 0.0);
      channels[u].push_back(std::move(h));
    }
  }
  const double snr = std::pow(10.0, snr_db / 10.0);
  std::vector<double> noise(k, p_bs / snr);
  return ChannelSet(b, m, std::move(serving), std::move(channels), std::move(noise), p_bs);
}

/// Drop-based instance via the scenario generator (geometry + shadowing).
inline ChannelSet drop_instance(std::size_t m, std::size_t b, double snr_db,
                                std::uint64_t seed) {
  TopologyConfig topo;
  topo.num_bs = b;
  topo.antennas_per_bs = m;
  const DropScenario drop = generate_drop(topo, seed);
  return to_channel_set_at_snr(drop, topo, snr_db);
}

/// The two-real-parameter beam family used by the exhaustive oracles: for a
/// 2-user instance, any boundary beam mixes the own-channel direction with
/// its complement against the victim channel; phases are aligned so only
/// the mixing fraction t matters.
struct OracleFamily {
  double sig_a = 0.0, sig_c = 0.0, victim_gain = 0.0, own_noise = 1.0;
  double signal(double t) const {
    const double amp = std::sqrt(t) * sig_a + std::sqrt(1.0 - t) * sig_c;
    return amp * amp / own_noise;
  }
  double caused(double t) const { return victim_gain * t; }
};

inline OracleFamily oracle_family(const ChannelSet& ch, std::size_t k, std::size_t victim) {
  const auto bk = static_cast<std::size_t>(ch.serving(k));
  const CVec& own = ch.channel(k, bk);
  const CVec& hv = ch.channel(victim, bk);
  OracleFamily fam;
  fam.own_noise = ch.noise(k);
  const double nv = norm(hv);
  if (nv < 1e-15) {
    fam.sig_c = norm(own);
    return fam;
  }
  CVec u = hv;
  u *= cplx(1.0 / nv, 0.0);
  const cplx a = dot(u, own);
  CVec hz = own;
  for (std::size_t i = 0; i < hz.size(); ++i) hz[i] -= a * u[i];
  fam.sig_a = std::abs(a);
  fam.sig_c = norm(hz);
  fam.victim_gain = nv * nv / ch.noise(victim);
  return fam;
}

/// Mixing grid for the beam families: uniform in the rotation angle between
/// the complement direction and the victim direction (t = sin^2 theta), so
/// near-zero leakage fractions are resolved.
inline double angle_grid(int i, int res) {
  const double theta = 0.5 * M_PI * static_cast<double>(i) / static_cast<double>(res - 1);
  const double s = std::sin(theta);
  return s * s;
}

/// Exhaustive downlink max-min oracle for K = B = 2 (beam parameters times
/// the full-power edges of the power box).
inline double downlink_maxmin_oracle(const ChannelSet& ch, int res) {
  const OracleFamily f0 = oracle_family(ch, 0, 1);
  const OracleFamily f1 = oracle_family(ch, 1, 0);
  const double p = ch.power_limit();
  double best = 0.0;
  auto grid = [res](int i) { return static_cast<double>(i) / static_cast<double>(res - 1); };
  for (int i0 = 0; i0 < res; ++i0) {
    const double t0 = angle_grid(i0, res);
    const double s0 = f0.signal(t0), c0 = f0.caused(t0);
    for (int i1 = 0; i1 < res; ++i1) {
      const double t1 = angle_grid(i1, res);
      const double s1 = f1.signal(t1), c1 = f1.caused(t1);
      for (int e = 0; e < 2; ++e) {
        for (int ip = 0; ip < res; ++ip) {
          const double pv = p * grid(ip);
          const double p0 = e == 0 ? p : pv;
          const double p1 = e == 0 ? pv : p;
          const double sinr0 = p0 * s0 / (1.0 + p1 * c1);
          const double sinr1 = p1 * s1 / (1.0 + p0 * c0);
          best = std::max(best, std::min(sinr0, sinr1));
        }
      }
    }
  }
  return best;
}

/// Exhaustive virtual-uplink max-min oracle for K = B = 2: receive beams are
/// closed-form MMSE, so only the power box is gridded.
inline double uplink_maxmin_oracle(const ChannelSet& ch, int res) {
  const double p = ch.power_limit();
  double best = 0.0;
  auto grid = [res](int i) { return static_cast<double>(i) / static_cast<double>(res - 1); };
  auto eval = [&](double q0, double q1) {
    const std::vector<double> q = {q0, q1};
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < 2; ++k) {
      if (q[k] == 0.0) return 0.0;
      const auto bk = static_cast<std::size_t>(ch.serving(k));
      const CMat cov = ch.uplink_covariance(k, bk, q);
      const CVec f = mmse_direction(cov, ch.channel(k, bk));
      const double sinr =
          q[k] * ch.coupling(k, bk, f) / quad_form(cov, f).real();
      worst = std::min(worst, sinr);
    }
    return worst;
  };
  for (int e = 0; e < 2; ++e)
    for (int ip = 0; ip < res; ++ip) {
      const double pv = p * grid(ip);
      best = std::max(best, e == 0 ? eval(p, pv) : eval(pv, p));
    }
  return best;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace coordbeam::test

#endif  // COORDBEAM_TESTS_SUPPORT_H_
