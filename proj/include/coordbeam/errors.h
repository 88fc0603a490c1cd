#ifndef COORDBEAM_ERRORS_H_
#define COORDBEAM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace coordbeam {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct SingularMatrix : Error {
  explicit SingularMatrix(const std::string& what = "singular matrix")
      : Error(what) {}
};

struct RankDeficient : Error {
  explicit RankDeficient(const std::string& what = "rank-deficient projector basis")
      : Error(what) {}
};

struct ZeroChannel : Error {
  explicit ZeroChannel(const std::string& what = "channel vector is numerically zero")
      : Error(what) {}
};

struct ShapeMismatch : Error {
  explicit ShapeMismatch(const std::string& what = "inconsistent dimensions")
      : Error(what) {}
};

struct NegativeSinr : Error {
  explicit NegativeSinr(const std::string& what = "negative SINR") : Error(what) {}
};

struct NonPositiveDistance : Error {
  explicit NonPositiveDistance(const std::string& what = "distance must be positive")
      : Error(what) {}
};

struct SingularA : Error {
  explicit SingularA(const std::string& what =
                         "coupling matrix is singular (target at or above feasibility boundary)")
      : Error(what) {}
};

struct NegativePower : Error {
  explicit NegativePower(const std::string& what = "negative power entry") : Error(what) {}
};

struct NonConvergence : Error {
  explicit NonConvergence(const std::string& what = "solver did not converge")
      : Error(what) {}
};

struct BracketFailure : Error {
  explicit BracketFailure(const std::string& what = "bisection bracket could not be established")
      : Error(what) {}
};

struct WrongDimensions : Error {
  explicit WrongDimensions(const std::string& what = "operation requires K = B = 2")
      : Error(what) {}
};

struct EmptySamples : Error {
  explicit EmptySamples(const std::string& what = "empty sample set") : Error(what) {}
};

struct ZeroReference : Error {
  explicit ZeroReference(const std::string& what = "reference sum is zero") : Error(what) {}
};

}  // namespace coordbeam

#endif  // COORDBEAM_ERRORS_H_
