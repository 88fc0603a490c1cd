#include "coordbeam/linalg.h"

#include <algorithm>
#include <cmath>

#include "coordbeam/errors.h"

namespace coordbeam {

namespace {
constexpr double kSolvePivotTol = 1e-14;
constexpr double kGramPivotTol = 1e-12;
constexpr double kZeroChannelTol = 1e-14;
}  // namespace

CVec& CVec::operator+=(const CVec& o) {
  for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += o[i];
  return *this;
}

CVec& CVec::operator-=(const CVec& o) {
  for (std::size_t i = 0; i < e_.size(); ++i) e_[i] -= o[i];
  return *this;
}

CVec& CVec::operator*=(cplx s) {
  for (auto& x : e_) x *= s;
  return *this;
}

CVec operator+(CVec a, const CVec& b) { return a += b; }
CVec operator-(CVec a, const CVec& b) { return a -= b; }
CVec operator*(cplx s, CVec a) { return a *= s; }

cplx dot(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) throw ShapeMismatch("dot: length mismatch");
  cplx s(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm(const CVec& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += std::norm(v[i]);
  return std::sqrt(s);
}

CMat CMat::identity(std::size_t n) {
  CMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = cplx(1.0, 0.0);
  return m;
}

CMat& CMat::operator+=(const CMat& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeMismatch("matrix add: size mismatch");
  for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
  return *this;
}

void CMat::add_outer(const CVec& v, double s) {
  if (rows_ != cols_ || rows_ != v.size()) throw ShapeMismatch("add_outer: size mismatch");
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) (*this)(r, c) += s * v[r] * std::conj(v[c]);
}

CVec CMat::multiply(const CVec& x) const {
  if (cols_ != x.size()) throw ShapeMismatch("multiply: size mismatch");
  CVec y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    cplx s(0.0, 0.0);
    for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c) * x[c];
    y[r] = s;
  }
  return y;
}

CMat CMat::transpose() const {
  CMat t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double CMat::max_abs() const {
  double m = 0.0;
  for (const auto& x : e_) m = std::max(m, std::abs(x));
  return m;
}

cplx quad_form(const CMat& m, const CVec& v) { return dot(v, m.multiply(v)); }

namespace {

// In-place partial-pivot elimination on an augmented copy. `pivot_tol` is
// relative to the largest entry of the input matrix.
CVec solve_impl(const CMat& a, const CVec& b, double pivot_tol, bool gram) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw ShapeMismatch("solve: size mismatch");
  const double scale = a.max_abs();
  if (scale == 0.0) {
    if (gram) throw RankDeficient();
    throw SingularMatrix("solve: zero matrix");
  }

  CMat m = a;
  CVec rhs = b;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(m(perm[col], col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double mag = std::abs(m(perm[r], col));
      if (mag > best) {
        best = mag;
        piv = r;
      }
    }
    if (best < pivot_tol * scale) {
      if (gram) throw RankDeficient();
      throw SingularMatrix();
    }
    std::swap(perm[col], perm[piv]);
    const cplx d = m(perm[col], col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const cplx factor = m(perm[r], col) / d;
      if (factor == cplx(0.0, 0.0)) continue;
      for (std::size_t c = col; c < n; ++c) m(perm[r], c) -= factor * m(perm[col], c);
      rhs[perm[r]] -= factor * rhs[perm[col]];
    }
  }

  CVec x(n);
  for (std::size_t i = n; i-- > 0;) {
    cplx s = rhs[perm[i]];
    for (std::size_t c = i + 1; c < n; ++c) s -= m(perm[i], c) * x[c];
    x[i] = s / m(perm[i], i);
  }
  return x;
}

}  // namespace

CVec hermitian_solve(const CMat& a, const CVec& b) {
  return solve_impl(a, b, kSolvePivotTol, /*gram=*/false);
}

CVec mmse_direction(const CMat& b, const CVec& h) {
  if (norm(h) < kZeroChannelTol) throw ZeroChannel();
  CVec f = hermitian_solve(b, h);
  const double n = norm(f);
  // Any nonzero solve normalizes fine; exact underflow is the only failure.
  if (n == 0.0) throw ZeroChannel("mmse_direction: solved direction underflowed");
  f *= cplx(1.0 / n, 0.0);
  // Phase canonicalization: rotate so the first nonzero entry is real >= 0.
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double mag = std::abs(f[i]);
    if (mag > 1e-12) {
      f *= std::conj(f[i]) / mag;
      break;
    }
  }
  return f;
}

CVec project_complement(const CVec& h, const std::vector<CVec>& others) {
  if (others.empty()) return h;
  const std::size_t n = others.size();
  for (const auto& o : others)
    if (o.size() != h.size()) throw ShapeMismatch("project_complement: length mismatch");

  CMat gram(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) gram(i, j) = dot(others[i], others[j]);

  auto project_once = [&](const CVec& v) {
    CVec rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = dot(others[i], v);
    const CVec coeff = solve_impl(gram, rhs, kGramPivotTol, /*gram=*/true);
    CVec out = v;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < out.size(); ++r) out[r] -= others[i][r] * coeff[i];
    return out;
  };

  // One re-orthogonalization pass keeps residual components well below the
  // 1e-10 contract without changing the mathematical value.
  return project_once(project_once(h));
}

}  // namespace coordbeam
