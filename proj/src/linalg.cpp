#include "netcp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "netcp/error.hpp"

namespace netcp {

namespace {

std::string condition_summary(const Matrix& w) {
  std::ostringstream os;
  os << "n=" << w.rows() << "x" << w.cols() << " fro=" << w.norm()
     << " sup=" << (w.size() ? w.cwiseAbs().maxCoeff() : 0.0)
     << " finite=" << (all_finite(w) ? "yes" : "no");
  return os.str();
}

void require_square(const Matrix& w, const char* what) {
  if (w.rows() != w.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << w.rows() << "x" << w.cols();
    throw DimensionError(os.str());
  }
}

void require_finite(const Matrix& w, const char* what) {
  if (!all_finite(w)) {
    throw NumericalError(std::string(what) + ": non-finite input (" + condition_summary(w) + ")");
  }
}

struct SymmetricEigen {
  Vector values;   // ascending, as returned by the solver
  Matrix vectors;  // empty when only values were requested
};

SymmetricEigen symmetric_eigen(const Matrix& w, bool with_vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(
      w, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition did not converge (" + condition_summary(w) +
                         ")");
  }
  SymmetricEigen out{solver.eigenvalues(), Matrix()};
  if (with_vectors) out.vectors = solver.eigenvectors();
  return out;
}

// Indices of eigenvalues ordered by decreasing magnitude; ties keep solver order.
std::vector<Eigen::Index> by_magnitude(const Vector& values) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(values(a)) > std::abs(values(b));
  });
  return order;
}

Matrix symmetrize(const Matrix& z) { return (0.5 * (z + z.transpose())).eval(); }

}  // namespace

Mask::Mask(Eigen::Index n, bool value)
    : bits_(decltype(bits_)::Constant(n, n, static_cast<std::uint8_t>(value ? 1 : 0))) {}

void Mask::set(Eigen::Index i, Eigen::Index j, bool value) {
  const auto bit = static_cast<std::uint8_t>(value ? 1 : 0);
  bits_(i, j) = bit;
  bits_(j, i) = bit;
}

Mask Mask::complement() const {
  Mask out;
  out.bits_ = bits_.unaryExpr([](std::uint8_t b) { return static_cast<std::uint8_t>(1 - b); });
  return out;
}

Eigen::Index Mask::count() const { return bits_.cast<Eigen::Index>().sum(); }

Matrix Mask::weights() const { return bits_.cast<double>(); }

SvdFactors svd(const Matrix& w) {
  require_square(w, "svd");
  require_finite(w, "svd");
  const Eigen::Index n = w.rows();
  if (n == 0) return {};

  if (is_symmetric(w)) {
    const SymmetricEigen eig = symmetric_eigen(w, true);
    const auto order = by_magnitude(eig.values);
    SvdFactors f{Matrix(n, n), Vector(n), Matrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index src = order[static_cast<std::size_t>(k)];
      const double mu = eig.values(src);
      f.d(k) = std::abs(mu);
      f.u.col(k) = eig.vectors.col(src);
      f.v.col(k) = mu < 0.0 ? (-eig.vectors.col(src)).eval() : eig.vectors.col(src);
    }
    return f;
  }

  Eigen::JacobiSVD<Matrix> solver(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Jacobi SVD did not converge (" + condition_summary(w) + ")");
  }
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

Shrinkage svd_shrink(const Matrix& w, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("svd_soft_threshold: lambda must be >= 0");
  require_square(w, "svd_soft_threshold");
  require_finite(w, "svd_soft_threshold");
  const Eigen::Index n = w.rows();

  if (is_symmetric(w)) {
    // S_lambda(W) = sum over |mu_i| > lambda of sign(mu_i)(|mu_i| - lambda) q_i q_i^T.
    const SymmetricEigen eig = symmetric_eigen(w, true);
    const auto order = by_magnitude(eig.values);
    Vector shrunk = Vector::Zero(n);
    Eigen::Index kept = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double excess = std::abs(eig.values(order[static_cast<std::size_t>(k)])) - lambda;
      if (excess <= 0.0) break;
      shrunk(k) = excess;
      ++kept;
    }
    Matrix basis(n, kept);
    Vector gains(kept);
    for (Eigen::Index k = 0; k < kept; ++k) {
      const Eigen::Index src = order[static_cast<std::size_t>(k)];
      basis.col(k) = eig.vectors.col(src);
      gains(k) = eig.values(src) < 0.0 ? -shrunk(k) : shrunk(k);
    }
    Matrix z = Matrix::Zero(n, n);
    if (kept > 0) z.noalias() = (basis * gains.asDiagonal()) * basis.transpose();
    return {symmetrize(z), std::move(shrunk)};
  }

  SvdFactors f = svd(w);
  Vector shrunk = (f.d.array() - lambda).cwiseMax(0.0).matrix();
  Matrix z = f.u * shrunk.asDiagonal() * f.v.transpose();
  return {std::move(z), std::move(shrunk)};
}

Matrix svd_soft_threshold(const Matrix& w, double lambda) { return svd_shrink(w, lambda).z; }

Matrix masked_project(const Matrix& a, const Mask& mask) {
  if (a.rows() != mask.size() || a.cols() != mask.size()) {
    std::ostringstream os;
    os << "masked_project: matrix " << a.rows() << "x" << a.cols() << " vs mask side "
       << mask.size();
    throw DimensionError(os.str());
  }
  return a.cwiseProduct(mask.weights());
}

double fro_norm(const Matrix& a) { return a.norm(); }

double op_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  require_finite(a, "op_norm");
  if (a.rows() == a.cols() && is_symmetric(a)) {
    const SymmetricEigen eig = symmetric_eigen(a, false);
    return std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
  }
  Eigen::JacobiSVD<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("op_norm: Jacobi SVD did not converge (" + condition_summary(a) + ")");
  }
  return solver.singularValues()(0);
}

double sup_norm(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

bool is_symmetric(const Matrix& a) { return a.rows() == a.cols() && a == a.transpose(); }

bool all_finite(const Matrix& a) { return a.allFinite(); }

Eigen::Index numerical_rank(const Vector& singular_values) {
  return (singular_values.array() > kNumericalZero).count();
}

Matrix clip_entries(const Matrix& a, double level) {
  return a.cwiseMax(-level).cwiseMin(level);
}

}  // namespace netcp
