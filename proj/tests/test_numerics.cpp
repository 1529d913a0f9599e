#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cisim/errors.hpp"
#include "cisim/numerics.hpp"
#include "cisim/rng.hpp"

using namespace cisim;

namespace {

Mat random_mat(Rng& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  }
  return m;
}

CMat random_cmat(Rng& rng, int rows, int cols) {
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.next_cgaussian();
  }
  return m;
}

double sigma_max(const CMat& a) {
  return Eigen::JacobiSVD<CMat>(a).singularValues().maxCoeff();
}

}

TEST_CASE("symmetric solves invert identity and diagonal systems") {
  Vec b(3);
  b << 1.0, 2.0, 3.0;
  Vec x = solve_symmetric(Mat::Identity(3, 3), b);
  CHECK((x - b).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0).epsilon(1e-14));

  Mat d = Vec::LinSpaced(3, 2.0, 4.0).asDiagonal();
  x = solve_symmetric(d, b);
  for (int i = 0; i < 3; ++i) CHECK(x(i) == doctest::Approx(b(i) / d(i, i)).epsilon(1e-14));
}

TEST_CASE("symmetric solves hit tight residuals on dense SPD systems") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    Mat m = random_mat(rng, 6, 6);
    Mat a = m * m.transpose() + Mat::Identity(6, 6);
    Vec b = random_mat(rng, 6, 1);
    Vec x = solve_symmetric(a, b);
    double resid = (a * x - b).lpNorm<Eigen::Infinity>();
    CHECK(resid <= 1e-10 * std::max(1.0, b.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("symmetric solves reject singular systems with a condition estimate") {
  Mat a = Mat::Ones(3, 3);
  Vec b = Vec::Ones(3);
  CHECK_THROWS_AS(solve_symmetric(a, b), SingularSystemError);
  try {
    solve_symmetric(a, b);
  } catch (const SingularSystemError& e) {
    CHECK(e.condition > 1e12);
  }
}

TEST_CASE("pseudo-inverses satisfy the Penrose identities") {
  Mat eye = Mat::Identity(4, 4);
  Mat zero = Mat::Zero(3, 2);
  CHECK((pseudo_inverse(eye) - eye).norm() <= 1e-12);
  CHECK(pseudo_inverse(zero).isZero(0.0));

  Rng rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    int k = 5, r = 2;
    CMat a = random_cmat(rng, k, r) * random_cmat(rng, r, k);
    CMat p = pseudo_inverse(a);
    double tol = 1e-9 * sigma_max(a);
    CHECK((a * p * a - a).cwiseAbs().maxCoeff() <= tol);
    CHECK((p * a * p - p).cwiseAbs().maxCoeff() <= tol);
    CHECK(((a * p) - (a * p).adjoint()).cwiseAbs().maxCoeff() <= tol);
    CHECK(((p * a) - (p * a).adjoint()).cwiseAbs().maxCoeff() <= tol);
  }
}

TEST_CASE("pseudo-inverse of a full-rank square matrix matches its inverse") {
  Rng rng(29);
  Mat m = random_mat(rng, 4, 4);
  Mat a = m * m.transpose() + Mat::Identity(4, 4);
  CHECK((pseudo_inverse(a) - a.inverse()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("null bases span the right spaces") {
  Mat row(1, 2);
  row << 1.0, 0.0;
  Mat basis = svd_null_basis(row);
  REQUIRE(basis.cols() == 1);
  CHECK(std::abs(basis(0, 0)) <= 1e-12);
  CHECK(std::abs(basis(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(svd_null_basis(Mat::Identity(2, 2)).cols() == 0);

  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    int n = 8, r = 3;
    Mat a = random_mat(rng, 6, r) * random_mat(rng, r, n);
    Mat d = svd_null_basis(a);
    REQUIRE(d.cols() == n - r);
    CHECK((d.transpose() * d - Mat::Identity(n - r, n - r)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((a * d).cwiseAbs().maxCoeff() <= 1e-9 * sigma_max(a));
  }
}

TEST_CASE("numeric rank counts the retained singular values") {
  CHECK(numeric_rank(Mat::Zero(3, 3)) == 0);
  CHECK(numeric_rank(Mat::Identity(3, 3)) == 3);

  Rng rng(37);
  for (int rep = 0; rep < 10; ++rep) {
    int m = 5, n = 7, r = 1 + rep % 4;
    Mat a = random_mat(rng, m, r) * random_mat(rng, r, n);
    CHECK(numeric_rank(a) == r);
    CHECK(numeric_rank(a) + svd_null_basis(a).cols() == n);
  }
}

TEST_CASE("condition estimates scale with the spectrum") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 1e-6;
  CHECK(condition_estimate(d) == doctest::Approx(1e6).epsilon(1e-9));
  CHECK(std::isinf(condition_estimate(Mat::Ones(2, 2))));
}
