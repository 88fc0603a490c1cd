#ifndef COORDBEAM_CENTRALIZED_H_
#define COORDBEAM_CENTRALIZED_H_

#include <string>
#include <vector>

#include "coordbeam/model.h"

namespace coordbeam {

/// Knobs for the balancing solver. Weighted targets are SINR_k / rho_k.
struct BalancingConfig {
  std::vector<double> weights;     // rho_k; empty = all ones
  double bisection_tol = 1e-5;     // relative width of the gamma bracket
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;           // <= 0: interference-free upper bound
  int max_bracket_expansions = 60;

  // Feasibility subsolver: outer projected subgradient on the per-BS
  // multipliers, inner fixed-point power iteration with MMSE receivers.
  int dual_max_outer = 2000;
  double dual_step = 1.0;          // c in the diminishing step c/sqrt(t)
  double feasibility_tol = 1e-4;   // accepted relative per-BS violation
  int reduced_outer = 200;         // outer cap once the bracket is tight
  int inner_max_iters = 600;
  double inner_tol = 1e-11;
};

struct IterationRecord {
  double gamma = 0.0;
  double max_bs_power = 0.0;
  bool feasible = false;
};

/// Result of a balancing (or balancing + improvement) solve.
struct SolveOutcome {
  double gamma_star = 0.0;          // balanced weighted SINR level
  BeamformerSet beams;
  PowerVector powers;
  std::vector<bool> active_bs;      // per-BS constraint active at the solution
  std::vector<IterationRecord> trace;
  long long backhaul_scalars = 0;   // 0 for the centralized path
  int iterations = 0;
  bool converged = true;
  bool clipped = false;             // set by the distributed finalization
  std::string note;
};

enum class FeasibilityStatus {
  kFeasible,
  kInfeasibleStructural,  // uplink fixed point diverged: target beyond the interference limit
  kInfeasibleDualCap,     // subgradient budget exhausted with persistent violation
};

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::kInfeasibleDualCap;
  BeamformerSet beams;
  PowerVector powers;  // downlink, equal weighted SINRs at the target
  std::string certificate;
  int outer_iters = 0;

  bool feasible() const { return status == FeasibilityStatus::kFeasible; }
};

/// Minimum sum-power design meeting SINR_k / rho_k >= gamma under the per-BS
/// budgets, or an infeasibility certificate. All weighted SINRs of a
/// feasible result equal gamma.
FeasibilityResult solve_sum_power_feasibility(const ChannelSet& ch, double gamma,
                                              const BalancingConfig& cfg = {});

/// Step 1: weighted max-min SINR balancing via bisection over the
/// feasibility solve, finished by an exact fixed-beamformer power polish so
/// the binding BS sits on its budget to solver precision.
SolveOutcome solve_max_min(const ChannelSet& ch, const BalancingConfig& cfg = {});

/// Step 2: for every BS with leftover budget, raises its minimum-power user
/// to exhaust the budget while moving the beam only inside the zero-forcing
/// complement of all other users' channels, which leaves every other user's
/// interference untouched. Degenerate directions skip the update.
SolveOutcome pareto_improve(const ChannelSet& ch, const SolveOutcome& outcome);

/// Dominance gap of `outcome` against the sampled 2-user boundary:
/// max over boundary points of min componentwise rate excess. Values at or
/// below the grid tolerance mean no sampled point dominates the outcome.
double verify_pareto_2user(const ChannelSet& ch, const SolveOutcome& outcome,
                           int boundary_resolution = 100);

}  // namespace coordbeam

#endif  // COORDBEAM_CENTRALIZED_H_
