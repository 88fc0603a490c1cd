#include "coordbeam/baselines.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coordbeam/errors.h"
#include "coordbeam/linalg.h"

namespace coordbeam {

RatePoint rate_point(const ChannelSet& ch, const Design& d, const std::string& scheme) {
  RatePoint rp;
  rp.scheme = scheme;
  rp.rates = user_rates(all_downlink_sinr(ch, d.beams, d.powers));
  return rp;
}

namespace {

PowerVector full_power_equal_split(const ChannelSet& ch) {
  PowerVector p(std::vector<double>(ch.num_users(), 0.0), PowerKind::kDownlink);
  for (std::size_t b = 0; b < ch.num_bs(); ++b) {
    const auto& users = ch.served_by(b);
    for (int k : users) p[static_cast<std::size_t>(k)] =
        ch.power_limit() / static_cast<double>(users.size());
  }
  return p;
}

/// I + sum over victims of the interference this user's BS would cause them.
CMat generated_interference_matrix(const ChannelSet& ch, std::size_t k, double weight) {
  const auto bk = static_cast<std::size_t>(ch.serving(k));
  CMat b = CMat::identity(ch.antennas());
  for (std::size_t i = 0; i < ch.num_users(); ++i) {
    if (i == k) continue;
    b.add_outer(ch.channel(i, bk), weight / ch.noise(i));
  }
  return b;
}

}  // namespace

Design ne_solution(const ChannelSet& ch) {
  Design d;
  d.powers = full_power_equal_split(ch);
  d.beams.f.resize(ch.num_users());
  const CMat eye = CMat::identity(ch.antennas());
  for (std::size_t k = 0; k < ch.num_users(); ++k)
    d.beams[k] = mmse_direction(eye, ch.channel(k, static_cast<std::size_t>(ch.serving(k))));
  return d;
}

Design sginr_solution(const ChannelSet& ch) {
  Design d;
  d.powers = full_power_equal_split(ch);
  d.beams.f.resize(ch.num_users());
  for (std::size_t k = 0; k < ch.num_users(); ++k) {
    const CMat b = generated_interference_matrix(ch, k, 1.0);
    d.beams[k] = mmse_direction(b, ch.channel(k, static_cast<std::size_t>(ch.serving(k))));
  }
  return d;
}

namespace {

double nbs_objective(const ChannelSet& ch, const Design& d, const std::vector<double>& floor) {
  const auto rates = user_rates(all_downlink_sinr(ch, d.beams, d.powers));
  double s = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const double gain = rates[k] - floor[k];
    if (gain <= 0.0) return -std::numeric_limits<double>::infinity();
    s += std::log(gain);
  }
  return s;
}

void project_powers(const ChannelSet& ch, PowerVector& p) {
  for (auto& v : p.value) v = std::max(v, 0.0);
  const auto sums = per_bs_power(ch, p);
  for (std::size_t b = 0; b < ch.num_bs(); ++b) {
    if (sums[b] <= ch.power_limit()) continue;
    const double scale = ch.power_limit() / sums[b];
    for (int k : ch.served_by(b)) p[static_cast<std::size_t>(k)] *= scale;
  }
}

}  // namespace

NbsResult nbs_solution(const ChannelSet& ch, const NbsConfig& cfg) {
  const Design ne = ne_solution(ch);
  const auto ne_rates = user_rates(all_downlink_sinr(ch, ne.beams, ne.powers));

  NbsResult out;
  out.design = ne;
  out.rates = rate_point(ch, ne, "nbs");
  out.degenerate = true;

  static constexpr double kTau[] = {0.0,  0.01, 0.03, 0.1, 0.3,  1.0,
                                    3.0,  10.0, 30.0, 100.0, 1000.0};

  // Seed search: beamformer families at full power, looking for a point with
  // every rate strictly above the NE floor.
  Design best = ne;
  double best_obj = -std::numeric_limits<double>::infinity();
  for (double tau : kTau) {
    Design cand;
    cand.powers = full_power_equal_split(ch);
    cand.beams.f.resize(ch.num_users());
    for (std::size_t k = 0; k < ch.num_users(); ++k) {
      const CMat b = generated_interference_matrix(ch, k, tau);
      cand.beams[k] = mmse_direction(b, ch.channel(k, static_cast<std::size_t>(ch.serving(k))));
    }
    const double obj = nbs_objective(ch, cand, ne_rates);
    if (obj > best_obj) {
      best_obj = obj;
      best = cand;
    }
  }
  if (!std::isfinite(best_obj)) return out;  // empty improvement region

  // Alternating refinement.
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    const double before = best_obj;

    // (i) projected gradient ascent on powers, numerical gradient.
    for (int step = 0; step < cfg.power_steps; ++step) {
      const std::size_t kk = ch.num_users();
      std::vector<double> grad(kk, 0.0);
      const double f0 = nbs_objective(ch, best, ne_rates);
      for (std::size_t k = 0; k < kk; ++k) {
        const double h = std::max(1e-6 * ch.power_limit(), 1e-9);
        Design d = best;
        d.powers[k] += h;
        project_powers(ch, d.powers);
        const double f1 = nbs_objective(ch, d, ne_rates);
        grad[k] = (f1 - f0) / h;
      }
      double gn = 0.0;
      for (double g : grad) gn += g * g;
      if (gn == 0.0) break;
      double alpha = 0.1 * ch.power_limit() / std::sqrt(gn);
      bool moved = false;
      for (int bt = 0; bt < 12; ++bt, alpha *= 0.5) {
        Design d = best;
        for (std::size_t k = 0; k < kk; ++k) d.powers[k] += alpha * grad[k];
        project_powers(ch, d.powers);
        const double f1 = nbs_objective(ch, d, ne_rates);
        if (f1 > f0) {
          best = d;
          best_obj = f1;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }

    // (ii) per-beam sweep along the MRT-to-MMSE family.
    for (std::size_t k = 0; k < ch.num_users(); ++k) {
      for (double tau : kTau) {
        Design d = best;
        const CMat b = generated_interference_matrix(ch, k, tau);
        d.beams[k] = mmse_direction(b, ch.channel(k, static_cast<std::size_t>(ch.serving(k))));
        const double obj = nbs_objective(ch, d, ne_rates);
        if (obj > best_obj) {
          best_obj = obj;
          best = d;
        }
      }
    }

    if (best_obj - before < cfg.tol) break;
  }

  out.design = best;
  out.rates = rate_point(ch, best, "nbs");
  out.degenerate = false;
  return out;
}

namespace {

/// One user's beam family for the 2-user boundary: signal and caused
/// interference as functions of the own-channel/ZF mixing parameter t.
struct BeamFamily {
  double sig_a = 0.0;     // |component of own channel along the victim direction|
  double sig_c = 0.0;     // norm of the ZF component
  double victim_gain = 0.0;  // ||h_victim||^2 / sigma_victim^2
  double own_noise = 1.0;

  double signal(double t) const {
    const double amp = std::sqrt(t) * sig_a + std::sqrt(1.0 - t) * sig_c;
    return amp * amp / own_noise;
  }
  double caused(double t) const { return victim_gain * t; }
};

BeamFamily beam_family(const ChannelSet& ch, std::size_t k, std::size_t victim) {
  const auto bk = static_cast<std::size_t>(ch.serving(k));
  const CVec& own = ch.channel(k, bk);
  const CVec& hv = ch.channel(victim, bk);
  BeamFamily fam;
  fam.own_noise = ch.noise(k);
  const double nv = norm(hv);
  if (nv < 1e-15) {
    fam.sig_a = 0.0;
    fam.sig_c = norm(own);
    fam.victim_gain = 0.0;
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

}  // namespace

std::vector<RatePoint> pareto_boundary_2user(const ChannelSet& ch, int resolution) {
  if (ch.num_users() != 2 || ch.num_bs() != 2) throw WrongDimensions();
  if (resolution < 2) throw ShapeMismatch("pareto_boundary_2user: resolution must be >= 2");

  const BeamFamily fam0 = beam_family(ch, 0, 1);
  const BeamFamily fam1 = beam_family(ch, 1, 0);
  const double pmax = ch.power_limit();
  const int res = resolution;

  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(res) * res * res * 2);

  auto grid = [res](int i) { return static_cast<double>(i) / static_cast<double>(res - 1); };
  // Mixing fractions sampled uniformly in rotation angle, so near-zero
  // leakage (the strong-coupling sweet spot) is resolved.
  auto tmix = [res](int i) {
    const double s = std::sin(0.5 * M_PI * static_cast<double>(i) / static_cast<double>(res - 1));
    return s * s;
  };

  for (int i0 = 0; i0 < res; ++i0) {
    const double t0 = tmix(i0);
    const double s0 = fam0.signal(t0);
    const double c0 = fam0.caused(t0);
    for (int i1 = 0; i1 < res; ++i1) {
      const double t1 = tmix(i1);
      const double s1 = fam1.signal(t1);
      const double c1 = fam1.caused(t1);
      // Pareto points use full power at one BS at least, so only the two
      // full-power edges of the power box need sampling.
      for (int e = 0; e < 2; ++e) {
        for (int ip = 0; ip < res; ++ip) {
          const double pv = pmax * grid(ip);
          const double p0 = e == 0 ? pmax : pv;
          const double p1 = e == 0 ? pv : pmax;
          const double sinr0 = p0 * s0 / (1.0 + p1 * c1);
          const double sinr1 = p1 * s1 / (1.0 + p0 * c0);
          pts.emplace_back(std::log2(1.0 + sinr0), std::log2(1.0 + sinr1));
        }
      }
    }
  }

  // Non-dominated staircase.
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second > b.second;
  });
  std::vector<RatePoint> boundary;
  double best_r2 = -1.0;
  for (const auto& [r1, r2] : pts) {
    if (r2 > best_r2) {
      best_r2 = r2;
      RatePoint rp;
      rp.scheme = "boundary";
      rp.rates = {r1, r2};
      boundary.push_back(std::move(rp));
    }
  }
  std::reverse(boundary.begin(), boundary.end());  // R1 ascending, R2 nonincreasing
  return boundary;
}

}  // namespace coordbeam
