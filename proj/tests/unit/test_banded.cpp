#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "packcool/banded.hpp"
#include "packcool/rng.hpp"

using namespace packcool;

namespace {

// Dense Gaussian elimination with partial pivoting, used as the oracle.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    REQUIRE(a[col][col] != 0.0);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace

TEST_CASE("matches a dense solver on random banded systems") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(12));
    const int kl = static_cast<int>(rng.below(3));
    const int ku = static_cast<int>(rng.below(3));

    BandedMatrix m(n, kl, ku);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) {
      b[i] = rng.uniform(-2.0, 2.0);
      for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
        const double v = rng.uniform(-1.0, 1.0) + (i == j ? 3.0 : 0.0);
        m.at(i, j) = v;
        dense[i][j] = v;
      }
    }
    const auto expect = dense_solve(dense, b);

    std::vector<double> x = b;
    m.factor();
    m.solve(x);
    for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(expect[i]).epsilon(1e-10));
  }
}

TEST_CASE("solves a tridiagonal system with known solution") {
  const int n = 6;
  BandedMatrix m(n, 1, 1);
  std::vector<double> want(n), b(n, 0.0);
  for (int i = 0; i < n; ++i) want[i] = 0.5 * i - 1.0;
  for (int i = 0; i < n; ++i) {
    m.at(i, i) = 2.0;
    if (i > 0) m.at(i, i - 1) = -1.0;
    if (i + 1 < n) m.at(i, i + 1) = -1.0;
    b[i] = 2.0 * want[i];
    if (i > 0) b[i] -= want[i - 1];
    if (i + 1 < n) b[i] -= want[i + 1];
  }
  m.factor();
  m.solve(b);
  for (int i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("pivots through a zero diagonal") {
  BandedMatrix m(2, 1, 1);
  m.at(0, 0) = 0.0;
  m.at(0, 1) = 1.0;
  m.at(1, 0) = 1.0;
  m.at(1, 1) = 0.0;
  std::vector<double> b = {3.0, 4.0};
  m.factor();
  m.solve(b);
  CHECK(b[0] == doctest::Approx(4.0));
  CHECK(b[1] == doctest::Approx(3.0));
}

TEST_CASE("singular matrix raises") {
  BandedMatrix m(2, 1, 1);
  m.at(0, 0) = 1.0;
  m.at(0, 1) = 2.0;
  m.at(1, 0) = 0.5;
  m.at(1, 1) = 1.0;
  CHECK_THROWS_AS(m.factor(), std::runtime_error);
}

TEST_CASE("solve before factor raises") {
  BandedMatrix m(3, 1, 1);
  m.at(0, 0) = m.at(1, 1) = m.at(2, 2) = 1.0;
  std::vector<double> b = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(m.solve(b), std::logic_error);
}

TEST_CASE("out-of-band access raises") {
  BandedMatrix m(5, 1, 1);
  CHECK_THROWS_AS(m.at(2, 0), std::out_of_range);
  CHECK_THROWS_AS(m.at(0, 3), std::out_of_range);
  CHECK_NOTHROW(m.at(0, 2));
  CHECK_THROWS_AS(BandedMatrix(0, 1, 1), std::invalid_argument);
}

TEST_CASE("zero resets the band for reuse") {
  BandedMatrix m(3, 1, 1);
  m.at(0, 0) = m.at(1, 1) = m.at(2, 2) = 2.0;
  m.factor();
  m.zero();
  m.at(0, 0) = m.at(1, 1) = m.at(2, 2) = 4.0;
  std::vector<double> b = {4.0, 8.0, 12.0};
  m.factor();
  m.solve(b);
  CHECK(b[0] == doctest::Approx(1.0));
  CHECK(b[1] == doctest::Approx(2.0));
  CHECK(b[2] == doctest::Approx(3.0));
}
