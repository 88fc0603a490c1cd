#ifndef COORDBEAM_BASELINES_H_
#define COORDBEAM_BASELINES_H_

#include <string>
#include <vector>

#include "coordbeam/model.h"

namespace coordbeam {

/// A labeled per-user rate tuple.
struct RatePoint {
  std::vector<double> rates;  // bits/s/Hz
  std::string scheme;
};

/// Beamformers plus powers produced by one scheme.
struct Design {
  BeamformerSet beams;
  PowerVector powers;
};

RatePoint rate_point(const ChannelSet& ch, const Design& d, const std::string& scheme);

/// Nash equilibrium: selfish MRT at full per-BS power, split equally among
/// co-served users.
Design ne_solution(const ChannelSet& ch);

/// Signal-to-generated-interference precoding: each beam maximizes own
/// signal over the interference it causes plus noise, local CSI only.
/// Full-power equal-split allocation.
Design sginr_solution(const ChannelSet& ch);

struct NbsConfig {
  int max_sweeps = 40;
  int power_steps = 30;
  double tol = 1e-6;
};

struct NbsResult {
  Design design;
  RatePoint rates;
  bool degenerate = false;  // no point with all rates above NE was found
};

/// Nash bargaining solution over the NE disagreement point via alternating
/// optimization: projected gradient on powers against sum log(R_k - R_k^NE),
/// then a one-dimensional MRT-to-MMSE sweep per beamformer. Local method;
/// falls back to NE (degenerate flag) when no strict improvement exists.
NbsResult nbs_solution(const ChannelSet& ch, const NbsConfig& cfg = {});

/// Rate-region boundary for K = B = 2: each beam parameterized over the
/// two-direction family spanned by the own channel and its zero-forcing
/// complement, crossed with the full-power edges of the power box; returns
/// the non-dominated staircase sorted by R1 ascending (R2 nonincreasing).
/// Throws WrongDimensions unless K = B = 2.
std::vector<RatePoint> pareto_boundary_2user(const ChannelSet& ch, int resolution);

}  // namespace coordbeam

#endif  // COORDBEAM_BASELINES_H_
