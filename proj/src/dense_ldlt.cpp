#include "dense_ldlt.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace bbmesh {

static_assert(sizeof(lapack_int) == sizeof(int));

bool SymmetricFactorization::factor(Eigen::MatrixXd& matrix) {
  n_ = static_cast<int>(matrix.rows());
  a_ = std::move(matrix);
  ipiv_.assign(static_cast<std::size_t>(n_), 0);
  const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n_, a_.data(), n_, ipiv_.data());
  if (info < 0) return false;
  count_inertia();
  if (info > 0) ++zero_;
  return true;
}

void SymmetricFactorization::solve(Eigen::VectorXd& rhs) const {
  LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n_, 1, a_.data(), n_, ipiv_.data(), rhs.data(), n_);
}

void SymmetricFactorization::count_inertia() {
  positive_ = negative_ = zero_ = 0;
  std::vector<double> eig;
  eig.reserve(static_cast<std::size_t>(n_));
  for (int k = 0; k < n_;) {
    if (ipiv_[static_cast<std::size_t>(k)] > 0 || k + 1 == n_) {
      eig.push_back(a_(k, k));
      k += 1;
    } else {
      const double p = a_(k, k), q = a_(k + 1, k), r = a_(k + 1, k + 1);
      const double mean = 0.5 * (p + r);
      const double radius = std::sqrt(0.25 * (p - r) * (p - r) + q * q);
      eig.push_back(mean + radius);
      eig.push_back(mean - radius);
      k += 2;
    }
  }
  // Barrier terms spread the pivots over many decades, so any threshold relative
  // to the largest one misreads legitimate small pivots; only (sub)denormal
  // pivots count as zero. Rank deficiency shows up as a wrong sign count.
  for (double e : eig) {
    if (std::abs(e) < std::numeric_limits<double>::min())
      ++zero_;
    else if (e > 0.0)
      ++positive_;
    else
      ++negative_;
  }
}

}  // namespace bbmesh

#ifdef BBMESH_EIGEN_BLAS_KERNELS
// The reference BLAS is correct but slow. Its two routines that dominate
// dsytrf are replaced here by Eigen kernels; the static archive then never
// pulls in its own copies because these symbols are already defined.

namespace {

bool transposed(char c) { return c == 'T' || c == 't' || c == 'C' || c == 'c'; }

using ConstStrided = Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
using Strided = Eigen::Map<Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
using ConstStridedVec = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;
using StridedVec = Eigen::Map<Eigen::VectorXd, 0, Eigen::InnerStride<>>;

}  // namespace

extern "C" void dgemm_(const char* transa, const char* transb, const int* m, const int* n, const int* k,
                       const double* alpha, const double* a, const int* lda, const double* b, const int* ldb,
                       const double* beta, double* c, const int* ldc, std::size_t, std::size_t) {
  if (*m == 0 || *n == 0) return;
  const bool ta = transposed(*transa), tb = transposed(*transb);
  Strided C(c, *m, *n, Eigen::OuterStride<>(*ldc));
  if (*beta == 0.0)
    C.setZero();
  else if (*beta != 1.0)
    C *= *beta;
  if (*k == 0 || *alpha == 0.0) return;
  ConstStrided A(a, ta ? *k : *m, ta ? *m : *k, Eigen::OuterStride<>(*lda));
  ConstStrided B(b, tb ? *n : *k, tb ? *k : *n, Eigen::OuterStride<>(*ldb));
  if (!ta && !tb)
    C.noalias() += *alpha * A * B;
  else if (ta && !tb)
    C.noalias() += *alpha * A.transpose() * B;
  else if (!ta)
    C.noalias() += *alpha * A * B.transpose();
  else
    C.noalias() += *alpha * A.transpose() * B.transpose();
}

extern "C" void dgemv_(const char* trans, const int* m, const int* n, const double* alpha, const double* a,
                       const int* lda, const double* x, const int* incx, const double* beta, double* y,
                       const int* incy, std::size_t) {
  if (*m == 0 || *n == 0) return;
  const bool t = transposed(*trans);
  const int len_y = t ? *n : *m, len_x = t ? *m : *n;
  // Negative increments (never used by LAPACK's factorizations) go through
  // contiguous copies in BLAS element order.
  if (*incx < 0 || *incy < 0) {
    auto offset = [](int len, int inc, int i) {
      return inc < 0 ? static_cast<std::ptrdiff_t>(len - 1 - i) * -inc : static_cast<std::ptrdiff_t>(i) * inc;
    };
    Eigen::VectorXd xc(len_x), yc(len_y);
    for (int i = 0; i < len_x; ++i) xc[i] = x[offset(len_x, *incx, i)];
    for (int i = 0; i < len_y; ++i) yc[i] = y[offset(len_y, *incy, i)];
    const int one = 1;
    dgemv_(trans, m, n, alpha, a, lda, xc.data(), &one, beta, yc.data(), &one, 1);
    for (int i = 0; i < len_y; ++i) y[offset(len_y, *incy, i)] = yc[i];
    return;
  }
  ConstStridedVec X(x, len_x, Eigen::InnerStride<>(*incx));
  StridedVec Y(y, len_y, Eigen::InnerStride<>(*incy));
  if (*beta == 0.0)
    Y.setZero();
  else if (*beta != 1.0)
    Y *= *beta;
  if (*alpha == 0.0) return;
  ConstStrided A(a, *m, *n, Eigen::OuterStride<>(*lda));
  if (t)
    Y.noalias() += *alpha * A.transpose() * X;
  else
    Y.noalias() += *alpha * A * X;
}
#endif
