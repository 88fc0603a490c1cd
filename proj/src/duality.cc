#include "coordbeam/duality.h"

#include <cmath>
#include <limits>

#include "coordbeam/errors.h"

namespace coordbeam {

CouplingMatrices build_coupling(const ChannelSet& ch, const BeamformerSet& w, double gamma,
                                const std::vector<double>& rho) {
  if (gamma <= 0.0) throw ShapeMismatch("build_coupling: gamma must be positive");
  const std::size_t k = ch.num_users();
  if (w.size() != k || rho.size() != k) throw ShapeMismatch("build_coupling: K mismatch");

  CouplingMatrices cm;
  cm.d_diag.resize(k);
  cm.psi = CMat(k, k);
  cm.a = CMat(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto bi = static_cast<std::size_t>(ch.serving(i));
    const double signal = ch.coupling(i, bi, w[i]);
    if (signal <= 0.0) throw ZeroChannel("build_coupling: zero effective signal");
    cm.d_diag[i] = rho[i] * gamma / signal;
    cm.a(i, i) = cplx(1.0 / cm.d_diag[i], 0.0);
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const auto bj = static_cast<std::size_t>(ch.serving(j));
      const double x = ch.coupling(i, bj, w[j]);
      cm.psi(i, j) = cplx(x, 0.0);
      cm.a(i, j) = cplx(-x, 0.0);
    }
  }

  // Lambda column-by-column; a singular A is the infeasibility signal.
  cm.lambda = CMat(k, k);
  try {
    for (std::size_t c = 0; c < k; ++c) {
      CVec e(k);
      e[c] = cplx(1.0, 0.0);
      const CVec col = hermitian_solve(cm.a, e);
      for (std::size_t r = 0; r < k; ++r) cm.lambda(r, c) = col[r];
    }
  } catch (const SingularMatrix&) {
    throw SingularA();
  }
  return cm;
}

std::pair<PowerVector, PowerVector> convert_powers(const CouplingMatrices& cm) {
  const std::size_t k = cm.lambda.rows();
  PowerVector dl(std::vector<double>(k, 0.0), PowerKind::kDownlink);
  PowerVector ul(std::vector<double>(k, 0.0), PowerKind::kVirtualUplink);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) {
      dl[r] += cm.lambda(r, c).real();
      ul[c] += cm.lambda(r, c).real();
    }
  for (std::size_t i = 0; i < k; ++i) {
    if (dl[i] < -1e-9 || ul[i] < -1e-9)
      throw NegativePower("convert_powers: infeasible target slipped through");
    dl[i] = std::max(dl[i], 0.0);
    ul[i] = std::max(ul[i], 0.0);
  }
  return {dl, ul};
}

PowerVector downlink_power_from_uplink(const ChannelSet& ch, const BeamformerSet& w,
                                       double gamma_bar, const std::vector<double>& rho) {
  const CouplingMatrices cm = build_coupling(ch, w, gamma_bar, rho);
  const std::size_t k = ch.num_users();
  CVec ones(k);
  for (std::size_t i = 0; i < k; ++i) ones[i] = cplx(1.0, 0.0);
  CVec p;
  try {
    p = hermitian_solve(cm.a, ones);
  } catch (const SingularMatrix&) {
    throw SingularA();
  }
  PowerVector out(std::vector<double>(k, 0.0), PowerKind::kDownlink);
  for (std::size_t i = 0; i < k; ++i) {
    if (p[i].real() < -1e-9) throw NegativePower("downlink conversion: negative power");
    out[i] = std::max(p[i].real(), 0.0);
  }
  return out;
}

std::vector<double> diag_dominance(const ChannelSet& ch, const BeamformerSet& w, double gamma,
                                   const std::vector<double>& rho) {
  const std::size_t k = ch.num_users();
  if (w.size() != k || rho.size() != k) throw ShapeMismatch("diag_dominance: K mismatch");
  std::vector<double> eta(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto bj = static_cast<std::size_t>(ch.serving(j));
    const double diag = ch.coupling(j, bj, w[j]);
    double off = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == j) continue;
      off += ch.coupling(i, bj, w[j]);
    }
    eta[j] = off == 0.0 ? std::numeric_limits<double>::infinity()
                        : diag / (rho[j] * gamma * off);
  }
  return eta;
}

double excess_power(const PowerVector& p, const ChannelSet& ch) {
  const std::vector<double> sums = per_bs_power(ch, p);
  double worst = -std::numeric_limits<double>::infinity();
  for (double s : sums) worst = std::max(worst, s);
  return (worst - ch.power_limit()) / ch.power_limit();
}

}  // namespace coordbeam
