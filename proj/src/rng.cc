#include "coordbeam/rng.h"

#include <cmath>

namespace coordbeam {

namespace {
// splitmix64 finalizer; decorrelates (master, index) pairs.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

Rng Rng::substream(std::uint64_t master, std::uint64_t index) {
  return Rng(mix(master ^ mix(index + 1)));
}

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian() {
  // Box-Muller; guards against log(0).
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

cplx Rng::complex_gaussian() {
  const double s = std::sqrt(0.5);
  return {s * gaussian(), s * gaussian()};
}

CVec Rng::complex_gaussian_vector(std::size_t m) {
  CVec v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = complex_gaussian();
  return v;
}

CVec Rng::uniform_in_ball(std::size_t m, double radius) {
  CVec dir = complex_gaussian_vector(m);
  double n = norm(dir);
  while (n == 0.0) {
    dir = complex_gaussian_vector(m);
    n = norm(dir);
  }
  const double u = uniform();
  const double r = radius * std::pow(u, 1.0 / (2.0 * static_cast<double>(m)));
  dir *= cplx(r / n, 0.0);
  return dir;
}

}  // namespace coordbeam
