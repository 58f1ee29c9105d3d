#include <doctest.h>

#include <cmath>
#include <random>

#include "netcp/error.hpp"
#include "netcp/linalg.hpp"
#include "oracles.hpp"

using namespace netcp;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

double nuclear_norm(const Matrix& a) { return svd(a).d.sum(); }

double prox_objective(const Matrix& w, const Matrix& z, double lambda) {
  return 0.5 * (w - z).squaredNorm() + lambda * nuclear_norm(z);
}

}  // namespace

TEST_CASE("svd of identity and diagonal matrices") {
  const SvdFactors id = svd(Matrix::Identity(3, 3));
  CHECK(id.d.isApprox(Vector::Ones(3)));

  const SvdFactors f = svd(diag2(3, 1));
  CHECK(f.d(0) == doctest::Approx(3.0));
  CHECK(f.d(1) == doctest::Approx(1.0));
  // u = v = I up to sign.
  CHECK(f.u.cwiseAbs().isApprox(Matrix::Identity(2, 2)));
  CHECK(f.v.cwiseAbs().isApprox(Matrix::Identity(2, 2)));
}

TEST_CASE("svd reconstructs seeded matrices") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const Matrix& w : {oracle::random_matrix(5, 5, seed), oracle::random_symmetric(5, seed)}) {
      const SvdFactors f = svd(w);
      const Matrix back = f.u * f.d.asDiagonal() * f.v.transpose();
      CHECK(sup_norm(back - w) < 1e-8 * (1.0 + f.d(0)));
      for (Eigen::Index k = 0; k + 1 < f.d.size(); ++k) CHECK(f.d(k) >= f.d(k + 1));
      CHECK(f.d.minCoeff() >= 0.0);
      CHECK((f.u.transpose() * f.u).isApprox(Matrix::Identity(5, 5), 1e-10));
      CHECK((f.v.transpose() * f.v).isApprox(Matrix::Identity(5, 5), 1e-10));
    }
  }
}

TEST_CASE("svd rejects non-square and non-finite input") {
  CHECK_THROWS_AS(svd(Matrix::Zero(2, 3)), DimensionError);
  Matrix bad = Matrix::Identity(3, 3);
  bad(1, 2) = std::nan("");
  CHECK_THROWS_AS(svd(bad), NumericalError);
}

TEST_CASE("soft threshold fixed cases") {
  const Matrix w = oracle::random_symmetric(6, 3);
  CHECK(sup_norm(svd_soft_threshold(w, 0.0) - w) < 1e-10);

  const Matrix shrunk = svd_soft_threshold(diag2(3, 1), 2.0);
  CHECK(sup_norm(shrunk - diag2(1, 0)) < 1e-12);

  CHECK_THROWS_AS(svd_soft_threshold(w, -1.0), ConfigError);
}

TEST_CASE("soft threshold matches Jacobi oracle on symmetric and general input") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix sym = oracle::random_symmetric(6, 100 + seed);
    CHECK(sup_norm(svd_soft_threshold(sym, 0.5) - oracle::shrink(sym, 0.5)) < 1e-8);
    const Matrix gen = oracle::random_matrix(6, 6, 200 + seed);
    CHECK(sup_norm(svd_soft_threshold(gen, 0.5) - oracle::shrink(gen, 0.5)) < 1e-8);
  }
}

TEST_CASE("soft threshold properties") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix w = oracle::random_symmetric(8, 300 + seed);
    const double lambda = 0.3 + 0.2 * static_cast<double>(seed);
    const Shrinkage s = svd_shrink(w, lambda);

    SUBCASE("symmetric output") { CHECK(is_symmetric(s.z)); }

    SUBCASE("operator norm drops by lambda") {
      CHECK(op_norm(s.z) == doctest::Approx(std::max(op_norm(w) - lambda, 0.0)).epsilon(1e-10));
    }

    SUBCASE("rank equals count of singular values above lambda") {
      const Vector d = svd(w).d;
      const auto expected = (d.array() - lambda > kNumericalZero).count();
      CHECK(numerical_rank(s.shrunk) == expected);
      CHECK(numerical_rank(svd(s.z).d.unaryExpr([](double x) { return x > 1e-9 ? x : 0.0; })) ==
            expected);
    }

    SUBCASE("proximal optimality against random perturbations") {
      const double best = prox_objective(w, s.z, lambda);
      for (int k = 0; k < 100; ++k) {
        Matrix dz(8, 8);
        for (Eigen::Index i = 0; i < dz.size(); ++i) dz.data()[i] = normal(gen);
        const double scale = std::pow(10.0, -static_cast<double>(k % 4));
        CHECK(best <= prox_objective(w, s.z + scale * dz, lambda) + 1e-9);
      }
    }

    SUBCASE("nonexpansive") {
      const Matrix other = oracle::random_symmetric(8, 900 + seed);
      const Matrix other_shrunk = svd_soft_threshold(other, lambda);
      CHECK(fro_norm(s.z - other_shrunk) <= fro_norm(w - other) + 1e-12);
    }
  }
}

TEST_CASE("masked projection") {
  const Matrix a = oracle::random_symmetric(4, 1);
  CHECK(masked_project(a, Mask::all(4)) == a);
  CHECK(masked_project(a, Mask::none(4)) == Matrix::Zero(4, 4));

  Mask off(2);
  off.set(0, 1, true);
  const Matrix p = masked_project(Matrix::Ones(2, 2), off);
  CHECK(p(0, 1) == 1.0);
  CHECK(p(1, 0) == 1.0);
  CHECK(p(0, 0) == 0.0);
  CHECK(p(1, 1) == 0.0);

  CHECK_THROWS_AS(masked_project(a, Mask::all(3)), DimensionError);
}

TEST_CASE("mask complement flips every bit and stays symmetric") {
  Mask m(5);
  m.set(0, 3, true);
  m.set(2, 2, true);
  const Mask c = m.complement();
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) {
      CHECK(c(i, j) != m(i, j));
      CHECK(c(i, j) == c(j, i));
    }
  }
  CHECK(m.count() + c.count() == 25);
}

TEST_CASE("norms") {
  CHECK(fro_norm(Matrix::Identity(3, 3)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(op_norm(diag2(3, 1)) == doctest::Approx(3.0));
  CHECK(op_norm(Matrix::Zero(0, 0)) == 0.0);
  CHECK(op_norm(masked_project(Matrix::Ones(3, 3), Mask::none(3))) == 0.0);

  const Matrix a = oracle::random_matrix(7, 7, 5);
  double scan = 0.0;
  for (Eigen::Index i = 0; i < 7; ++i) {
    for (Eigen::Index j = 0; j < 7; ++j) scan = std::max(scan, std::abs(a(i, j)));
  }
  CHECK(sup_norm(a) == scan);
  CHECK(op_norm(a) == doctest::Approx(oracle::op_norm(a)).epsilon(1e-10));
}

TEST_CASE("entry clipping") {
  Matrix a(1, 3);
  a << -2.0, 0.3, 1.5;
  const Matrix c = clip_entries(a, 1.0);
  CHECK(c(0, 0) == -1.0);
  CHECK(c(0, 1) == 0.3);
  CHECK(c(0, 2) == 1.0);
}
