#ifndef COORDBEAM_RNG_H_
#define COORDBEAM_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

#include "coordbeam/linalg.h"

namespace coordbeam {

/// Deterministic sampling helpers on top of mt19937_64. The distribution
/// transforms are hand-rolled (not std::*_distribution) so that a seed maps
/// to the same stream on every platform/libstdc++ version.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Derives an independent stream for (master seed, index) pairs.
  static Rng substream(std::uint64_t master, std::uint64_t index);

  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double gaussian();                      // standard normal, Box-Muller
  cplx complex_gaussian();                // CN(0, 1): Re, Im ~ N(0, 1/2)

  /// CN(0, I) vector of length m.
  CVec complex_gaussian_vector(std::size_t m);

  /// Uniform draw from the complex m-ball of the given radius
  /// (real dimension 2m: gaussian direction, radius = r * u^(1/2m)).
  CVec uniform_in_ball(std::size_t m, double radius);

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace coordbeam

#endif  // COORDBEAM_RNG_H_
