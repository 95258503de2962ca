#pragma once

#include <cmath>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <vector>

namespace packcool {

// Banded linear system solver: LU factorization with partial pivoting in
// LAPACK-style band storage. A matrix with kl subdiagonals and ku
// superdiagonals is stored column-wise; pivoting fills in up to kl extra
// superdiagonals, so storage is allocated for kl + ku upper bands. This is
// the direct factorization behind the implicit time stepper, where the
// interleaved (u1, w1, u2, w2, ...) ordering keeps kl = ku = 2.
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1),
        ab_(static_cast<std::size_t>(ld_) * n, 0.0), piv_(n, 0) {
    if (n < 1 || kl < 0 || ku < 0) throw std::invalid_argument("BandedMatrix: bad shape");
  }

  int size() const { return n_; }

  void zero() {
    std::fill(ab_.begin(), ab_.end(), 0.0);
    factored_ = false;
  }

  /// Entry (i, j), 0-based. Valid when -(ku_) <= i - j <= kl_ before
  /// factorization; the wider fill band is reserved internally.
  double& at(int i, int j) {
    const int d = i - j;
    if (d > kl_ || -d > kl_ + ku_) throw std::out_of_range("BandedMatrix::at outside band");
    return ab_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + d)];
  }
  double at(int i, int j) const { return const_cast<BandedMatrix*>(this)->at(i, j); }

  /// In-place banded LU with row pivoting. Throws on an exactly singular pivot.
  void factor() {
    for (int j = 0; j < n_; ++j) {
      const int last_row = std::min(n_ - 1, j + kl_);
      int p = j;
      double best = std::fabs(entry(j, j));
      for (int i = j + 1; i <= last_row; ++i) {
        const double v = std::fabs(entry(i, j));
        if (v > best) { best = v; p = i; }
      }
      piv_[j] = p;
      if (best == 0.0) throw std::runtime_error("BandedMatrix::factor: singular matrix");
      if (p != j) {
        const int last_col = std::min(n_ - 1, j + kl_ + ku_);
        for (int c = j; c <= last_col; ++c) std::swap(entry(j, c), entry(p, c));
      }
      const double pivot = entry(j, j);
      for (int i = j + 1; i <= last_row; ++i) {
        const double l = entry(i, j) / pivot;
        entry(i, j) = l;
        if (l != 0.0) {
          const int last_col = std::min(n_ - 1, j + kl_ + ku_);
          for (int c = j + 1; c <= last_col; ++c) entry(i, c) -= l * entry(j, c);
        }
      }
    }
    factored_ = true;
  }

  /// Solves A x = rhs in place using the stored factorization.
  void solve(std::span<double> rhs) const {
    if (!factored_) throw std::logic_error("BandedMatrix::solve before factor");
    if (static_cast<int>(rhs.size()) != n_) throw std::invalid_argument("BandedMatrix::solve: size");
    for (int j = 0; j < n_; ++j) {
      if (piv_[j] != j) std::swap(rhs[j], rhs[piv_[j]]);
      const int last_row = std::min(n_ - 1, j + kl_);
      for (int i = j + 1; i <= last_row; ++i) rhs[i] -= entry_c(i, j) * rhs[j];
    }
    for (int i = n_ - 1; i >= 0; --i) {
      const int last_col = std::min(n_ - 1, i + kl_ + ku_);
      double acc = rhs[i];
      for (int c = i + 1; c <= last_col; ++c) acc -= entry_c(i, c) * rhs[c];
      rhs[i] = acc / entry_c(i, i);
    }
  }

 private:
  // Unchecked band accessors for the factorization hot path.
  double& entry(int i, int j) {
    return ab_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)];
  }
  double entry_c(int i, int j) const {
    return ab_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)];
  }

  int n_, kl_, ku_, ld_;
  std::vector<double> ab_;
  std::vector<int> piv_;
  bool factored_ = false;
};

}  // namespace packcool
