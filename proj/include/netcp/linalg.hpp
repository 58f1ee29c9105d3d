#pragma once

// Dense matrix primitives used by the completion solver: SVD, singular-value
// soft-thresholding, masked projection and the three matrix norms.

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace netcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values below this are treated as exact zeros.
inline constexpr double kNumericalZero = 1e-10;

/// Symmetric n×n observation mask. Every write goes to both (i, j) and (j, i).
class Mask {
 public:
  Mask() = default;
  explicit Mask(Eigen::Index n, bool value = false);

  static Mask all(Eigen::Index n) { return Mask(n, true); }
  static Mask none(Eigen::Index n) { return Mask(n, false); }

  Eigen::Index size() const { return bits_.rows(); }
  bool operator()(Eigen::Index i, Eigen::Index j) const { return bits_(i, j) != 0; }
  void set(Eigen::Index i, Eigen::Index j, bool value);

  Mask complement() const;
  Eigen::Index count() const;
  /// 0/1 weights as a dense matrix.
  Matrix weights() const;

  bool operator==(const Mask& other) const { return bits_ == other.bits_; }

 private:
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> bits_;
};

struct SvdFactors {
  Matrix u;
  Vector d;  // descending, nonnegative
  Matrix v;
};

/// Full dense SVD. Exactly symmetric input goes through a symmetric
/// eigendecomposition (singular values are |eigenvalues|); anything else
/// through a one-sided Jacobi SVD. Throws NumericalError on non-convergence.
SvdFactors svd(const Matrix& w);

/// S_lambda(W) = U diag((d_i - lambda)_+) V^T. Symmetric input gives an exactly
/// symmetric result.
Matrix svd_soft_threshold(const Matrix& w, double lambda);

/// Soft-thresholding that also reports the shrunken spectrum (descending).
struct Shrinkage {
  Matrix z;
  Vector shrunk;  // (d_i - lambda)_+, descending
};
Shrinkage svd_shrink(const Matrix& w, double lambda);

/// Entries of `a` where the mask is set, zero elsewhere.
Matrix masked_project(const Matrix& a, const Mask& mask);

double fro_norm(const Matrix& a);
double op_norm(const Matrix& a);
double sup_norm(const Matrix& a);

bool is_symmetric(const Matrix& a);
bool all_finite(const Matrix& a);

/// Number of entries strictly greater than kNumericalZero.
Eigen::Index numerical_rank(const Vector& singular_values);

/// Entrywise sign(x) * min(|x|, level).
Matrix clip_entries(const Matrix& a, double level);

}  // namespace netcp
