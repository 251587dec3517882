#pragma once

#include <Eigen/Dense>

#include <vector>

namespace bbmesh {

/// Bunch-Kaufman LDL^T (LAPACK dsytrf, lower triangle) with inertia read off
/// the block-diagonal factor.
class SymmetricFactorization {
 public:
  /// Takes ownership of the matrix. Returns false on an invalid argument.
  bool factor(Eigen::MatrixXd& matrix);
  void solve(Eigen::VectorXd& rhs) const;

  int positive() const { return positive_; }
  int negative() const { return negative_; }
  int zero() const { return zero_; }
  Eigen::MatrixXd release() { return std::move(a_); }

 private:
  void count_inertia();

  int n_ = 0;
  Eigen::MatrixXd a_;
  std::vector<int> ipiv_;
  int positive_ = 0, negative_ = 0, zero_ = 0;
};

}  // namespace bbmesh
