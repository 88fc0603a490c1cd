#ifndef COORDBEAM_LINALG_H_
#define COORDBEAM_LINALG_H_

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace coordbeam {

using cplx = std::complex<double>;

/// Dense complex column vector. Everything in this project is at most
/// length 8, so storage is a plain std::vector.
class CVec {
 public:
  CVec() = default;
  explicit CVec(std::size_t n) : e_(n, cplx(0.0, 0.0)) {}
  CVec(std::initializer_list<cplx> xs) : e_(xs) {}

  std::size_t size() const { return e_.size(); }
  cplx& operator[](std::size_t i) { return e_[i]; }
  const cplx& operator[](std::size_t i) const { return e_[i]; }

  CVec& operator+=(const CVec& o);
  CVec& operator-=(const CVec& o);
  CVec& operator*=(cplx s);

  const std::vector<cplx>& entries() const { return e_; }

 private:
  std::vector<cplx> e_;
};

CVec operator+(CVec a, const CVec& b);
CVec operator-(CVec a, const CVec& b);
CVec operator*(cplx s, CVec a);

/// Hermitian inner product a†b (conjugate-linear in the first argument).
cplx dot(const CVec& a, const CVec& b);

double norm(const CVec& v);

/// Dense complex matrix, row-major. Used both for genuinely Hermitian
/// operators (uplink covariance B) and for the real nonsymmetric coupling
/// matrix A = D^-1 - Psi; the solver below does not assume symmetry.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), e_(rows * cols, cplx(0.0, 0.0)) {}

  static CMat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return e_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return e_[r * cols_ + c]; }

  CMat& operator+=(const CMat& o);

  /// Adds s * v v† (scaled Hermitian outer product); matrix must be square
  /// with dimension matching v.
  void add_outer(const CVec& v, double s);

  CVec multiply(const CVec& x) const;
  CMat transpose() const;

  /// Largest entry magnitude; scale reference for pivot thresholds.
  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> e_;
};

/// Quadratic form v†(M v) for square M.
cplx quad_form(const CMat& m, const CVec& v);

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Named for its dominant use on Hermitian systems (MMSE covariances,
/// Gram matrices); correct for any nonsingular square A.
/// Throws SingularMatrix when a pivot falls below 1e-14 * max|A_ij|.
CVec hermitian_solve(const CMat& a, const CVec& b);

/// Unit-norm maximizer of (f†hh†f)/(f†Bf) for positive definite B:
/// f proportional to B^-1 h, with the first nonzero entry rotated to be
/// real nonnegative so results are deterministic.
/// Throws ZeroChannel when ||h|| < 1e-14 and propagates SingularMatrix.
CVec mmse_direction(const CMat& b, const CVec& h);

/// Projection of h onto the orthogonal complement of span(others):
/// (I - Hb (Hb†Hb)^-1 Hb†) h. Empty `others` returns h unchanged.
/// Throws RankDeficient when the Gram matrix Hb†Hb is singular
/// (pivot below 1e-12 relative), i.e. `others` are linearly dependent.
CVec project_complement(const CVec& h, const std::vector<CVec>& others);

}  // namespace coordbeam

#endif  // COORDBEAM_LINALG_H_
