#include "coordbeam/centralized.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "coordbeam/baselines.h"
#include "coordbeam/duality.h"
#include "coordbeam/errors.h"
#include "coordbeam/linalg.h"

namespace coordbeam {

namespace {

std::vector<double> resolve_weights(const ChannelSet& ch, const BalancingConfig& cfg) {
  if (cfg.weights.empty()) return std::vector<double>(ch.num_users(), 1.0);
  if (cfg.weights.size() != ch.num_users())
    throw ShapeMismatch("balancing: weight count != K");
  for (double r : cfg.weights)
    if (r <= 0.0) throw ShapeMismatch("balancing: weights must be positive");
  return cfg.weights;
}

/// Virtual-uplink fixed point at target `gamma` with per-BS noise scales
/// `lambda`: nu_k <- rho_k gamma * (f†(sum_i nu_i H_i + lambda I)f)/(f†H_k f)
/// with f the MMSE receiver. Standard interference mapping; diverging powers
/// certify that the target is beyond the interference limit.
bool uplink_fixed_point(const ChannelSet& ch, double gamma, const std::vector<double>& rho,
                        const std::vector<double>& lambda, std::vector<double>& nu,
                        BeamformerSet& beams, const BalancingConfig& cfg) {
  const std::size_t kk = ch.num_users();
  if (nu.size() != kk) nu.assign(kk, 0.0);
  beams.f.assign(kk, CVec());
  const double power_cap = 1e13 * ch.power_limit() * static_cast<double>(kk);

  try {
    for (int it = 0; it < cfg.inner_max_iters; ++it) {
      double max_rel = 0.0;
      for (std::size_t k = 0; k < kk; ++k) {
        const auto bk = static_cast<std::size_t>(ch.serving(k));
        const CMat cov = ch.uplink_covariance(k, bk, nu, lambda[bk]);
        const CVec f = mmse_direction(cov, ch.channel(k, bk));
        const double denom = quad_form(cov, f).real();
        const double signal = ch.coupling(k, bk, f);
        const double next = rho[k] * gamma * denom / signal;
        if (!std::isfinite(next) || next > power_cap) return false;
        max_rel = std::max(max_rel, std::abs(next - nu[k]) / std::max(next, 1e-300));
        nu[k] = next;
        beams[k] = f;
      }
      if (max_rel <= cfg.inner_tol) return true;
    }
  } catch (const Error&) {
    // Blown-up covariances surface as solver failures here; same meaning as
    // the explicit power-cap divergence check.
    return false;
  }
  // No divergence but no settle either: near the feasibility boundary the
  // contraction rate approaches one. Conservatively reported as infeasible.
  return false;
}

/// Equal-weighted-SINR downlink powers for fixed beams, or nullopt when the
/// target is infeasible for these beams.
std::optional<PowerVector> equal_sinr_powers(const ChannelSet& ch, const BeamformerSet& w,
                                             double gamma, const std::vector<double>& rho) {
  try {
    return downlink_power_from_uplink(ch, w, gamma, rho);
  } catch (const SingularA&) {
    return std::nullopt;
  } catch (const NegativePower&) {
    return std::nullopt;
  }
}

struct DualWarm {
  std::vector<double> mu;
  std::vector<double> nu;
  int t_accum = 0;  // iterations already spent in this dual stream
};

FeasibilityResult feasibility_impl(const ChannelSet& ch, double gamma,
                                   const BalancingConfig& cfg, const std::vector<double>& rho,
                                   DualWarm* warm, int outer_budget,
                                   bool allow_early_exit = true) {
  const std::size_t nb = ch.num_bs();
  std::vector<double> mu = warm && warm->mu.size() == nb ? warm->mu
                                                         : std::vector<double>(nb, 0.0);
  std::vector<double> nu = warm && warm->nu.size() == ch.num_users()
                               ? warm->nu
                               : std::vector<double>(ch.num_users(), 0.0);

  FeasibilityResult res;
  double best_violation = std::numeric_limits<double>::infinity();
  BeamformerSet best_beams;  // least-violating iterate, returned either way
  PowerVector best_powers;
  bool structural = false;
  int evals = 0;

  // One dual evaluation: MMSE uplink fixed point at noise (1 + mu_b) I, then
  // the equal-SINR downlink powers and their per-BS relative violations.
  auto probe = [&](const std::vector<double>& m,
                   std::vector<double>& viol) -> std::optional<BeamformerSet> {
    ++evals;
    std::vector<double> lambda(nb);
    for (std::size_t b = 0; b < nb; ++b) lambda[b] = 1.0 + m[b];
    BeamformerSet beams;
    if (!uplink_fixed_point(ch, gamma, rho, lambda, nu, beams, cfg)) {
      structural = true;
      return std::nullopt;
    }
    const auto p = equal_sinr_powers(ch, beams, gamma, rho);
    if (!p) {
      structural = true;
      return std::nullopt;
    }
    const auto sums = per_bs_power(ch, *p);
    viol.resize(nb);
    double max_viol = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < nb; ++b) {
      viol[b] = sums[b] / ch.power_limit() - 1.0;
      max_viol = std::max(max_viol, viol[b]);
    }
    if (max_viol < best_violation) {
      best_violation = max_viol;
      best_beams = beams;
      best_powers = *p;
    }
    return beams;
  };

  auto feasible_return = [&]() {
    res.status = FeasibilityStatus::kFeasible;
    res.beams = best_beams;
    res.powers = best_powers;
    res.outer_iters = evals;
    if (warm) {
      warm->mu = mu;
      warm->nu = nu;
      warm->t_accum += evals;
    }
    return res;
  };
  auto structural_return = [&](const char* what) {
    res.status = FeasibilityStatus::kInfeasibleStructural;
    res.certificate = what;
    res.outer_iters = evals;
    return res;
  };

  // Phase 1: projected subgradient on the multipliers, normalized direction,
  // diminishing step. Handles the easy mass of probes (caps already met, or
  // met after a few corrections).
  const int t0 = (warm && !warm->mu.empty()) ? 9 + warm->t_accum : 0;
  const int warmup = allow_early_exit ? std::min(outer_budget, 48) : outer_budget;
  std::vector<double> viol;
  for (int t = 1; t <= warmup; ++t) {
    if (probe(mu, viol) == std::nullopt)
      return structural_return("uplink fixed point diverged at target");
    if (best_violation <= cfg.feasibility_tol) return feasible_return();
    double viol_norm = 0.0;
    for (double v : viol) viol_norm += v * v;
    viol_norm = std::sqrt(std::max(viol_norm, 1e-24));
    const double step = cfg.dual_step / std::sqrt(static_cast<double>(t + t0));
    for (std::size_t b = 0; b < nb; ++b)
      mu[b] = std::max(0.0, mu[b] + step * viol[b] / viol_norm);
  }

  // Phase 2: cyclic per-BS root finding. Each violation is monotone
  // decreasing in its own multiplier, so zero it by bracketed bisection,
  // cycling while the worst violation keeps shrinking. This reaches the
  // complementary-slackness point directly instead of crawling at 1/sqrt(t).
  const int cycles = 1 + static_cast<int>(nb);
  for (int cycle = 0; cycle < cycles && evals < outer_budget; ++cycle) {
    const double before = best_violation;
    for (std::size_t b = 0; b < nb && evals < outer_budget; ++b) {
      if (probe(mu, viol) == std::nullopt)
        return structural_return("uplink fixed point diverged at target");
      if (best_violation <= cfg.feasibility_tol) return feasible_return();
      if (viol[b] <= 0.0) continue;  // this budget already holds
      // Bracket: grow mu_b until its violation goes nonpositive.
      double lo = mu[b];
      double hi = std::max(1.0, 2.0 * mu[b]);
      bool bracketed = false;
      for (int grow = 0; grow < 40 && evals < outer_budget; ++grow) {
        std::vector<double> m = mu;
        m[b] = hi;
        if (probe(m, viol) == std::nullopt)
          return structural_return("uplink fixed point diverged at target");
        if (viol[b] <= 0.0) {
          bracketed = true;
          break;
        }
        lo = hi;
        hi *= 4.0;
        if (hi > 1e12) break;
      }
      if (!bracketed) continue;  // even a huge price cannot offload this BS
      for (int it = 0; it < 40 && evals < outer_budget && (hi - lo) > 1e-9 * (1.0 + hi);
           ++it) {
        std::vector<double> m = mu;
        m[b] = 0.5 * (lo + hi);
        if (probe(m, viol) == std::nullopt)
          return structural_return("uplink fixed point diverged at target");
        (viol[b] > 0.0 ? lo : hi) = m[b];
      }
      mu[b] = hi;  // the nonpositive side keeps this BS under budget
      std::vector<double> m = mu;
      if (probe(m, viol) == std::nullopt)
        return structural_return("uplink fixed point diverged at target");
      if (best_violation <= cfg.feasibility_tol) return feasible_return();
    }
    if (best_violation > before - 1e-7 && best_violation > 0.2 * before) break;  // stalled
  }

  if (structural) return structural_return("uplink fixed point diverged at target");
  if (warm) {
    warm->mu = mu;
    warm->nu = nu;
    warm->t_accum += evals;
  }
  res.status = FeasibilityStatus::kInfeasibleDualCap;
  res.beams = std::move(best_beams);  // least-violating iterate for callers to rescale
  res.powers = std::move(best_powers);
  res.outer_iters = evals;
  res.certificate = "dual budget exhausted; best per-BS violation " +
                    std::to_string(best_violation);
  return res;
}

/// Max per-BS sum of the equal-SINR powers at level gamma, +inf when the
/// level is infeasible for the fixed beams.
double max_bs_power_at(const ChannelSet& ch, const BeamformerSet& w, double gamma,
                       const std::vector<double>& rho) {
  const auto p = equal_sinr_powers(ch, w, gamma, rho);
  if (!p) return std::numeric_limits<double>::infinity();
  const auto sums = per_bs_power(ch, *p);
  return *std::max_element(sums.begin(), sums.end());
}

/// Exact fixed-beamformer balancing: the unique gamma where the binding BS
/// sits on its budget. Monotone in gamma, so plain bisection.
std::pair<double, PowerVector> power_polish(const ChannelSet& ch, const BeamformerSet& w,
                                            double gamma_guess, const std::vector<double>& rho) {
  const double pbs = ch.power_limit();
  double lo = 0.0, hi = 0.0;
  double g = gamma_guess > 0.0 ? gamma_guess : 1.0;
  if (max_bs_power_at(ch, w, g, rho) >= pbs) {
    hi = g;
    for (int i = 0; i < 200 && max_bs_power_at(ch, w, g / 2.0, rho) >= pbs; ++i) g /= 2.0;
    lo = g / 2.0;
    if (max_bs_power_at(ch, w, lo, rho) >= pbs)
      throw NonConvergence("power polish: cannot bracket from below");
  } else {
    lo = g;
    int i = 0;
    for (; i < 200 && max_bs_power_at(ch, w, g * 2.0, rho) < pbs; ++i) {
      g *= 2.0;
      lo = g;
    }
    if (i >= 200) throw NonConvergence("power polish: cannot bracket from above");
    hi = g * 2.0;
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (max_bs_power_at(ch, w, mid, rho) < pbs)
      lo = mid;
    else
      hi = mid;
  }
  auto p = equal_sinr_powers(ch, w, lo, rho);
  if (!p) throw NonConvergence("power polish: infeasible at the bracketed level");
  return {lo, *p};
}

}  // namespace

FeasibilityResult solve_sum_power_feasibility(const ChannelSet& ch, double gamma,
                                              const BalancingConfig& cfg) {
  if (gamma <= 0.0) throw ShapeMismatch("feasibility: gamma must be positive");
  const auto rho = resolve_weights(ch, cfg);
  return feasibility_impl(ch, gamma, cfg, rho, nullptr, cfg.dual_max_outer);
}

SolveOutcome solve_max_min(const ChannelSet& ch, const BalancingConfig& cfg) {
  const auto rho = resolve_weights(ch, cfg);
  const double pbs = ch.power_limit();

  double hi = cfg.gamma_hi;
  if (hi <= 0.0) {
    hi = 0.0;
    for (std::size_t k = 0; k < ch.num_users(); ++k) {
      const auto bk = static_cast<std::size_t>(ch.serving(k));
      const double nh = norm(ch.channel(k, bk));
      hi = std::max(hi, pbs * nh * nh / (ch.noise(k) * rho[k]));
    }
    if (hi <= 0.0) throw ZeroChannel("solve_max_min: all serving channels are zero");
  }
  double lo = std::max(cfg.gamma_lo, 0.0);

  SolveOutcome out;
  DualWarm feasible_warm;  // snapshot from feasible probes only; infeasible
                           // probes inflate the multipliers without bound
  BeamformerSet best_beams;
  double best_gamma = 0.0;

  auto probe = [&](double g, int budget) {
    DualWarm warm = feasible_warm;
    const FeasibilityResult r = feasibility_impl(ch, g, cfg, rho, &warm, budget);
    double max_power = 0.0;
    if (r.feasible()) {
      const auto sums = per_bs_power(ch, r.powers);
      max_power = *std::max_element(sums.begin(), sums.end());
      best_beams = r.beams;
      best_gamma = g;
      feasible_warm = warm;
    }
    out.trace.push_back({g, max_power, r.feasible()});
    return r.feasible();
  };

  // The interference-free bound is infeasible except for decoupled
  // instances; expand until it really is an upper bracket.
  int expansions = 0;
  while (probe(hi, cfg.dual_max_outer)) {
    if (++expansions > cfg.max_bracket_expansions)
      throw BracketFailure("solve_max_min: upper bracket still feasible after expansions");
    lo = hi;
    hi *= 2.0;
  }

  if (best_gamma == 0.0 && lo > 0.0 && !probe(lo, cfg.dual_max_outer)) {
    hi = lo;
    lo = 0.0;
  }

  while (hi - lo > cfg.bisection_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    // Near-boundary probes get a reduced dual budget: the final polish
    // restores exact consistency, only the beam quality matters here.
    const int budget = (hi - lo <= 1e-2 * hi) ? cfg.reduced_outer : cfg.dual_max_outer;
    if (probe(mid, budget))
      lo = mid;
    else
      hi = mid;
  }
  out.iterations = static_cast<int>(out.trace.size());

  if (best_beams.size() == 0) {
    // Never saw a feasible level; retry once at a tiny target.
    const double tiny = hi * 1e-9;
    if (tiny <= 0.0 || !probe(tiny, cfg.dual_max_outer))
      throw NonConvergence("solve_max_min: no feasible balancing level found");
  }

  auto [gamma_star, powers] = power_polish(ch, best_beams, std::max(best_gamma, lo), rho);

  // Ratchet-and-polish refinement. The bisection predicate is fuzzy near the
  // boundary, so keep one continued dual stream running against a target
  // slightly above the best exactly-certified level: every time a chunk
  // certifies the target, the polish locks it in and the target moves up;
  // every failed chunk halves the bump. The dual stream state (multipliers,
  // uplink powers, step schedule) carries across chunks.
  DualWarm stream = feasible_warm;
  stream.t_accum = 0;
  double bump = 0.01;
  int spent = 0;
  const int chunk = 400;
  const int refine_budget = 2 * cfg.dual_max_outer;
  while (bump >= cfg.bisection_tol && spent < refine_budget) {
    const double target = gamma_star * (1.0 + bump);
    const FeasibilityResult r = feasibility_impl(ch, target, cfg, rho, &stream, chunk,
                                                 /*allow_early_exit=*/false);
    spent += r.outer_iters;
    out.trace.push_back({target, 0.0, r.feasible()});
    // Near-miss iterates still carry good beams: polish certifies whatever
    // level they actually reach.
    if (r.beams.size() == ch.num_users()) {
      auto [g2, p2] = power_polish(ch, r.beams, target, rho);
      if (g2 > gamma_star) {
        gamma_star = g2;
        powers = std::move(p2);
        best_beams = r.beams;
        if (r.status == FeasibilityStatus::kFeasible) {
          bump = std::min(bump * 2.0, 0.02);
          continue;
        }
      }
    }
    if (r.status != FeasibilityStatus::kFeasible) bump *= 0.5;
  }

  out.gamma_star = gamma_star;
  out.beams = best_beams;
  out.powers = std::move(powers);
  const auto sums = per_bs_power(ch, out.powers);
  out.active_bs.resize(ch.num_bs());
  for (std::size_t b = 0; b < ch.num_bs(); ++b)
    out.active_bs[b] = std::abs(sums[b] - pbs) <= 1e-6 * pbs;
  return out;
}

SolveOutcome pareto_improve(const ChannelSet& ch, const SolveOutcome& outcome) {
  SolveOutcome out = outcome;
  const double pbs = ch.power_limit();
  const auto sums = per_bs_power(ch, out.powers);

  for (std::size_t b = 0; b < ch.num_bs(); ++b) {
    const double slack = pbs - sums[b];
    if (slack <= 1e-9 * pbs) continue;

    const auto& users = ch.served_by(b);
    int k = users[0];
    for (int u : users)
      if (out.powers[static_cast<std::size_t>(u)] < out.powers[static_cast<std::size_t>(k)])
        k = u;  // ties keep the lowest index by scan order
    const auto ku = static_cast<std::size_t>(k);

    const CVec& h_own = ch.channel(ku, b);
    std::vector<CVec> others;
    for (std::size_t i = 0; i < ch.num_users(); ++i)
      if (i != ku) others.push_back(ch.channel(i, b));

    CVec hz;
    try {
      hz = project_complement(h_own, others);
    } catch (const RankDeficient&) {
      continue;  // degenerate direction, update skipped
    }
    const double nz = norm(hz);
    if (nz < 1e-12 * norm(h_own)) continue;  // zero-dimensional null space

    const double p_old = out.powers[ku];
    const double p_new = pbs - (sums[b] - p_old);
    const cplx inner = dot(h_own, out.beams[ku]);  // h†f, defines the phase
    const double theta = std::arg(inner);
    const cplx phase = std::polar(1.0, theta);

    const double beta = std::sqrt(p_old) * (phase * dot(out.beams[ku], hz)).real();
    const double alpha =
        (-beta + std::sqrt(beta * beta + (p_new - p_old) * nz * nz)) / (nz * nz);

    CVec f_new = out.beams[ku];
    f_new *= cplx(std::sqrt(p_old), 0.0);
    for (std::size_t i = 0; i < f_new.size(); ++i) f_new[i] += alpha * phase * hz[i];
    f_new *= cplx(1.0 / std::sqrt(p_new), 0.0);

    out.beams[ku] = f_new;
    out.powers[ku] = p_new;
  }
  return out;
}

double verify_pareto_2user(const ChannelSet& ch, const SolveOutcome& outcome,
                           int boundary_resolution) {
  if (ch.num_users() != 2 || ch.num_bs() != 2 || ch.antennas() < 2) throw WrongDimensions();
  const auto rates = user_rates(all_downlink_sinr(ch, outcome.beams, outcome.powers));
  const auto boundary = pareto_boundary_2user(ch, boundary_resolution);
  double gap = -std::numeric_limits<double>::infinity();
  for (const auto& pt : boundary)
    gap = std::max(gap, std::min(pt.rates[0] - rates[0], pt.rates[1] - rates[1]));
  return gap;
}

}  // namespace coordbeam
