#ifndef COORDBEAM_DISTRIBUTED_H_
#define COORDBEAM_DISTRIBUTED_H_

#include <cstdint>
#include <vector>

#include "coordbeam/centralized.h"
#include "coordbeam/model.h"

namespace coordbeam {

/// One base station's view of the world: its own channel slice (the local
/// CSI {h_kb for all k}), the users it serves, and its working beamformers.
/// Agents never hold other stations' channels; everything cross-cell flows
/// through the exchanged scalars.
struct BsAgent {
  int bs = 0;
  double power_limit = 0.0;
  std::size_t num_users = 0;
  std::vector<int> served;              // global user indices
  std::vector<CVec> channel_to_user;    // h_{k,bs} for every user k
  std::vector<double> noise;            // sigma_k^2 (public constants)
  std::vector<double> weight;           // rho_k
  std::vector<CVec> beams;              // f_k, aligned with `served`
  std::vector<double> power_view;       // this agent's copy of q (foreign entries quantized)
};

std::vector<BsAgent> make_agents(const ChannelSet& ch, const std::vector<double>& rho = {});

/// Eq.-(23)-style update: each served user's beam becomes the MMSE receiver
/// against the agent's current power view. Local CSI only.
void local_beamformer_update(BsAgent& agent, const std::vector<double>& q);

/// Effective interference function I_k(q): the power user k would need for
/// unit SINR given everyone else's powers, using the agent's current beam.
double interference_value(const BsAgent& agent, int user, const std::vector<double>& q);

struct BackhaulEntry {
  int sender = 0;
  long long scalars = 0;
  std::vector<double> payload;
};

struct BackhaulLog {
  std::vector<std::vector<BackhaulEntry>> rounds;
  long long total_scalars = 0;
  int quantizer_bits = 0;
};

struct DistributedConfig {
  std::vector<double> weights;   // rho_k; empty = ones
  double eps_rel = 1e-6;         // stop when ||q_n - q_{n-1}|| < eps_rel * P_BS
  int max_iters = 50;
  int fixed_iters = 0;           // > 0: run exactly this many rounds
  int quant_bits = 0;            // 0 = exact exchange
  enum class Init { kZeros, kUniformRandom } init = Init::kZeros;
  std::uint64_t init_seed = 0;
  double gamma0 = 1e-3;
};

/// Per-round record for traces: the exact power vector, the achieved
/// minimum weighted uplink SINR, and the gamma-scaled exchange values.
struct RoundRecord {
  int iteration = 0;
  double gamma = 0.0;
  std::vector<double> q;
  std::vector<double> g;      // gamma^{n-1} * rho * I
  double alpha = 0.0;         // min_b P_BS / sum g
  long long scalars_cum = 0;
};

struct DistributedState {
  std::vector<double> q_exact;
  double gamma = 0.0;
  double gamma_prev = 0.0;
  int iteration = 0;
  // Set by run_iteration for trace reporting.
  std::vector<double> last_interference;  // rho_k * I_k
  double last_scale = 0.0;                // min_b P_BS / sum rho I
};

struct DistributedRun {
  SolveOutcome uplink;    // converged virtual-uplink solution
  std::vector<RoundRecord> rounds;
  BackhaulLog log;
  std::vector<double> weights;  // rho used by the run, consumed by finalize
  bool hit_max_iters = false;
};

/// Advances one synchronous round: local beam/interference phase, common
/// scaling, exchange (quantized when configured) and the ledger append.
void run_iteration(std::vector<BsAgent>& agents, DistributedState& state, BackhaulLog& log,
                   const DistributedConfig& cfg);

/// Runs rounds until ||q_n - q_{n-1}|| < eps (or exactly fixed_iters rounds).
DistributedRun run_to_convergence(const ChannelSet& ch, const DistributedConfig& cfg = {});

/// Uplink-to-downlink conversion at the converged level, per-BS clipping of
/// any budget violation, then the local-CSI improvement step. Credits the
/// K^2(B-1) scalars of the coupling-matrix share to the ledger.
SolveOutcome finalize_downlink(const ChannelSet& ch, DistributedRun& run);

/// Round-to-nearest on the uniform grid {i * P_BS / (2^bits - 1)}, ties up,
/// values above P_BS clamped. bits = 0 is the identity.
double quantize_scalar(double x, int bits, double p_bs);

}  // namespace coordbeam

#endif  // COORDBEAM_DISTRIBUTED_H_
