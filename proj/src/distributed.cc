#include "coordbeam/distributed.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coordbeam/duality.h"
#include "coordbeam/errors.h"
#include "coordbeam/rng.h"

namespace coordbeam {

std::vector<BsAgent> make_agents(const ChannelSet& ch, const std::vector<double>& rho) {
  std::vector<double> weights = rho;
  if (weights.empty()) weights.assign(ch.num_users(), 1.0);
  if (weights.size() != ch.num_users()) throw ShapeMismatch("make_agents: weight count != K");

  std::vector<BsAgent> agents(ch.num_bs());
  for (std::size_t b = 0; b < ch.num_bs(); ++b) {
    BsAgent& a = agents[b];
    a.bs = static_cast<int>(b);
    a.power_limit = ch.power_limit();
    a.num_users = ch.num_users();
    a.served = ch.served_by(b);
    a.weight = weights;
    a.noise.resize(ch.num_users());
    a.channel_to_user.resize(ch.num_users());
    for (std::size_t k = 0; k < ch.num_users(); ++k) {
      a.noise[k] = ch.noise(k);
      a.channel_to_user[k] = ch.channel(k, b);  // the local CSI slice
    }
    a.beams.assign(a.served.size(), CVec());
    a.power_view.assign(ch.num_users(), 0.0);
  }
  return agents;
}

namespace {

/// Covariance sum_{i != k} q_i h_ib h_ib† / sigma_i^2 + I from the agent's
/// own channel slice.
CMat local_covariance(const BsAgent& agent, int user, const std::vector<double>& q) {
  const std::size_t m = agent.channel_to_user[0].size();
  CMat cov = CMat::identity(m);
  for (std::size_t i = 0; i < agent.num_users; ++i) {
    if (static_cast<int>(i) == user || q[i] == 0.0) continue;
    cov.add_outer(agent.channel_to_user[i], q[i] / agent.noise[i]);
  }
  return cov;
}

int served_slot(const BsAgent& agent, int user) {
  for (std::size_t s = 0; s < agent.served.size(); ++s)
    if (agent.served[s] == user) return static_cast<int>(s);
  throw ShapeMismatch("agent does not serve this user");
}

}  // namespace

void local_beamformer_update(BsAgent& agent, const std::vector<double>& q) {
  for (std::size_t s = 0; s < agent.served.size(); ++s) {
    const int k = agent.served[s];
    const CMat cov = local_covariance(agent, k, q);
    agent.beams[s] = mmse_direction(cov, agent.channel_to_user[static_cast<std::size_t>(k)]);
  }
}

double interference_value(const BsAgent& agent, int user, const std::vector<double>& q) {
  const int slot = served_slot(agent, user);
  const CVec& f = agent.beams[static_cast<std::size_t>(slot)];
  const CMat cov = local_covariance(agent, user, q);
  const double denom = quad_form(cov, f).real();
  const CVec& h = agent.channel_to_user[static_cast<std::size_t>(user)];
  const double signal = std::norm(dot(h, f)) / agent.noise[static_cast<std::size_t>(user)];
  return denom / signal;
}

double quantize_scalar(double x, int bits, double p_bs) {
  if (bits == 0) return x;
  if (x < 0.0) throw ShapeMismatch("quantize_scalar: negative input");
  if (x >= p_bs) return p_bs;
  const double levels = static_cast<double>((1 << bits) - 1);
  const double step = p_bs / levels;
  const double idx = std::floor(x / step + 0.5);  // ties round up
  return idx * step;
}

void run_iteration(std::vector<BsAgent>& agents, DistributedState& state, BackhaulLog& log,
                   const DistributedConfig& cfg) {
  const std::size_t nb = agents.size();
  const std::size_t kk = agents[0].num_users;
  const double pbs = agents[0].power_limit;

  // Local phase: Eq.-(23) beams and effective interference, per agent, from
  // that agent's own (possibly quantized) view of the powers.
  std::vector<double> eff(kk, 0.0);  // rho_k * I_k, computed by the owner BS
  for (BsAgent& a : agents) {
    local_beamformer_update(a, a.power_view);
    for (int k : a.served)
      eff[static_cast<std::size_t>(k)] =
          a.weight[static_cast<std::size_t>(k)] * interference_value(a, k, a.power_view);
  }

  // Common scale: every agent forms the same alpha from the per-BS sums.
  // Computing q as min_b(P / sum rho I) * rho I is the gamma-free form; the
  // gamma-scaled g and its alpha are reported in the trace.
  double alpha_tilde = std::numeric_limits<double>::infinity();
  for (const BsAgent& a : agents) {
    double s = 0.0;
    for (int k : a.served) s += eff[static_cast<std::size_t>(k)];
    alpha_tilde = std::min(alpha_tilde, pbs / s);
  }
  std::vector<double> q_new(kk);
  for (std::size_t k = 0; k < kk; ++k) q_new[k] = alpha_tilde * eff[k];

  // Exchange barrier: every agent keeps its own entries exact and receives
  // everyone else's through the quantizer.
  std::vector<BackhaulEntry> round_entries;
  std::vector<double> shared(kk);
  for (std::size_t k = 0; k < kk; ++k) shared[k] = quantize_scalar(q_new[k], cfg.quant_bits, pbs);
  for (const BsAgent& sender : agents) {
    BackhaulEntry e;
    e.sender = sender.bs;
    for (int k : sender.served) e.payload.push_back(shared[static_cast<std::size_t>(k)]);
    e.scalars = static_cast<long long>(sender.served.size()) * static_cast<long long>(nb - 1);
    log.total_scalars += e.scalars;
    round_entries.push_back(std::move(e));
  }
  log.rounds.push_back(std::move(round_entries));
  for (BsAgent& a : agents) {
    a.power_view = shared;
    for (int k : a.served) a.power_view[static_cast<std::size_t>(k)] = q_new[static_cast<std::size_t>(k)];
  }

  // Achieved minimum weighted uplink SINR with the exact powers. Each term
  // is local to the owning BS; the min is the simulator's view.
  double gamma = std::numeric_limits<double>::infinity();
  for (const BsAgent& a : agents) {
    for (std::size_t s = 0; s < a.served.size(); ++s) {
      const int k = a.served[s];
      const CVec& f = a.beams[s];
      const CMat cov = local_covariance(a, k, q_new);
      const CVec& h = a.channel_to_user[static_cast<std::size_t>(k)];
      const double signal = std::norm(dot(h, f)) / a.noise[static_cast<std::size_t>(k)];
      const double sinr = q_new[static_cast<std::size_t>(k)] * signal / quad_form(cov, f).real();
      gamma = std::min(gamma, sinr / a.weight[static_cast<std::size_t>(k)]);
    }
  }

  state.gamma_prev = state.gamma;
  state.gamma = gamma;
  state.q_exact = std::move(q_new);
  state.last_interference = std::move(eff);
  state.last_scale = alpha_tilde;
  ++state.iteration;
}

DistributedRun run_to_convergence(const ChannelSet& ch, const DistributedConfig& cfg) {
  std::vector<BsAgent> agents = make_agents(ch, cfg.weights);
  const double pbs = ch.power_limit();
  const std::size_t kk = ch.num_users();

  DistributedState state;
  state.q_exact.assign(kk, 0.0);
  state.gamma = cfg.gamma0;
  if (cfg.init == DistributedConfig::Init::kUniformRandom) {
    Rng rng = Rng::substream(cfg.init_seed, 0x71u);
    for (std::size_t k = 0; k < kk; ++k) {
      double u = rng.uniform();
      while (u == 0.0) u = rng.uniform();
      state.q_exact[k] = u * pbs;  // (0, P_BS]
    }
  }
  for (BsAgent& a : agents) a.power_view = state.q_exact;

  DistributedRun run;
  run.log.quantizer_bits = cfg.quant_bits;
  run.weights = agents[0].weight;

  const int limit = cfg.fixed_iters > 0 ? cfg.fixed_iters : cfg.max_iters;
  const double eps = cfg.eps_rel * pbs;
  bool converged = false;
  std::vector<double> q_prev = state.q_exact;

  while (state.iteration < limit) {
    run_iteration(agents, state, run.log, cfg);

    // Reported in the paper's gamma-scaled convention: g = gamma^{n-1} rho I
    // and alpha = min_b P / sum g, so q = alpha g holds in the trace.
    RoundRecord rec;
    rec.iteration = state.iteration;
    rec.gamma = state.gamma;
    rec.q = state.q_exact;
    rec.scalars_cum = run.log.total_scalars;
    rec.g.resize(kk);
    for (std::size_t k = 0; k < kk; ++k)
      rec.g[k] = state.gamma_prev * state.last_interference[k];
    rec.alpha = state.last_scale / state.gamma_prev;
    run.rounds.push_back(std::move(rec));

    if (cfg.fixed_iters == 0) {
      double dist = 0.0;
      for (std::size_t k = 0; k < kk; ++k) {
        const double d = state.q_exact[k] - q_prev[k];
        dist += d * d;
      }
      if (std::sqrt(dist) < eps) {
        converged = true;
        break;
      }
    }
    q_prev = state.q_exact;
  }
  if (cfg.fixed_iters > 0) converged = true;
  run.hit_max_iters = !converged;

  SolveOutcome& out = run.uplink;
  out.gamma_star = state.gamma;
  out.powers = PowerVector(state.q_exact, PowerKind::kVirtualUplink);
  out.beams.f.assign(kk, CVec());
  for (const BsAgent& a : agents)
    for (std::size_t s = 0; s < a.served.size(); ++s)
      out.beams[static_cast<std::size_t>(a.served[s])] = a.beams[s];
  out.iterations = state.iteration;
  out.converged = converged;
  out.backhaul_scalars = run.log.total_scalars;
  if (!converged) out.note = "max_iterations";
  const auto sums = per_bs_power(ch, out.powers);
  out.active_bs.resize(ch.num_bs());
  for (std::size_t b = 0; b < ch.num_bs(); ++b)
    out.active_bs[b] = std::abs(sums[b] - pbs) <= 1e-5 * pbs;
  for (const auto& r : run.rounds) out.trace.push_back({r.gamma, 0.0, true});
  return run;
}

SolveOutcome finalize_downlink(const ChannelSet& ch, DistributedRun& run) {
  const std::size_t kk = ch.num_users();
  const std::size_t nb = ch.num_bs();
  const double pbs = ch.power_limit();
  std::vector<double> rho = run.weights;
  if (rho.size() != kk) rho.assign(kk, 1.0);

  SolveOutcome out = run.uplink;
  out.powers = downlink_power_from_uplink(ch, out.beams, out.gamma_star, rho);

  // Coupling-matrix share: each BS broadcasts the D and Psi entries its
  // served users define, K scalars per user to B-1 peers.
  std::vector<BackhaulEntry> entries;
  for (std::size_t b = 0; b < nb; ++b) {
    BackhaulEntry e;
    e.sender = static_cast<int>(b);
    e.scalars = static_cast<long long>(ch.served_by(b).size()) * static_cast<long long>(kk) *
                static_cast<long long>(nb - 1);
    run.log.total_scalars += e.scalars;
    entries.push_back(std::move(e));
  }
  run.log.rounds.push_back(std::move(entries));
  out.backhaul_scalars = run.log.total_scalars;

  // Per-BS clipping of any duality overshoot.
  auto sums = per_bs_power(ch, out.powers);
  for (std::size_t b = 0; b < nb; ++b) {
    if (sums[b] <= pbs) continue;
    const double scale = pbs / sums[b];
    for (int k : ch.served_by(b)) out.powers[static_cast<std::size_t>(k)] *= scale;
    out.clipped = true;
  }

  SolveOutcome improved = pareto_improve(ch, out);
  improved.clipped = out.clipped;
  const auto sinrs = all_downlink_sinr(ch, improved.beams, improved.powers);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kk; ++k) worst = std::min(worst, sinrs[k] / rho[k]);
  improved.gamma_star = worst;
  const auto final_sums = per_bs_power(ch, improved.powers);
  improved.active_bs.resize(nb);
  for (std::size_t b = 0; b < nb; ++b)
    improved.active_bs[b] = std::abs(final_sums[b] - pbs) <= 1e-6 * pbs;
  return improved;
}

}  // namespace coordbeam
