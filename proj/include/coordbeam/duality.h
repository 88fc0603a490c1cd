#ifndef COORDBEAM_DUALITY_H_
#define COORDBEAM_DUALITY_H_

#include <vector>

#include "coordbeam/linalg.h"
#include "coordbeam/model.h"

namespace coordbeam {

/// The coupling system behind the approximate uplink-downlink duality.
/// D is the diagonal of per-user target-over-signal ratios, Psi the
/// zero-diagonal cross-interference matrix, A = D^-1 - Psi and
/// Lambda = A^-1. Row sums of Lambda give downlink powers, column sums the
/// virtual-uplink powers, both hitting the same per-user targets.
struct CouplingMatrices {
  std::vector<double> d_diag;  // [D]_kk
  CMat psi;                    // K x K, zero diagonal, entrywise >= 0
  CMat a;                      // D^-1 - Psi (real, stored complex)
  CMat lambda;                 // A^-1
};

/// Builds D, Psi, A and Lambda for target level `gamma` and weights `rho`.
/// Throws SingularA when A loses invertibility (target at or above the
/// feasibility boundary for these beamformers).
CouplingMatrices build_coupling(const ChannelSet& ch, const BeamformerSet& w, double gamma,
                                const std::vector<double>& rho);

/// Downlink/uplink power pair (Lambda 1, Lambda^T 1); their 1-norms agree by
/// construction. Throws NegativePower when an entry is below -1e-9.
std::pair<PowerVector, PowerVector> convert_powers(const CouplingMatrices& cm);

/// Downlink powers solving [D^-1 - Psi] p = 1 for a converged uplink level
/// gamma_bar: the resulting downlink SINRs equal rho_k * gamma_bar.
PowerVector downlink_power_from_uplink(const ChannelSet& ch, const BeamformerSet& w,
                                       double gamma_bar, const std::vector<double>& rho);

/// Column diagonal-dominance ratios of A; entries are +infinity for
/// interference-free users. Strict dominance (all > 1) is the regime where
/// the duality approximation is reliable.
std::vector<double> diag_dominance(const ChannelSet& ch, const BeamformerSet& w, double gamma,
                                   const std::vector<double>& rho);

/// Signed excessive-power fraction (max per-BS sum - P_BS) / P_BS.
double excess_power(const PowerVector& p, const ChannelSet& ch);

}  // namespace coordbeam

#endif  // COORDBEAM_DUALITY_H_
