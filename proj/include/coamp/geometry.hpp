// geometry.hpp - closed-form coherent-state geometry: overlaps, distance,
// Gram matrices, positivity tests and Wigner grids.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "coamp/fock.hpp"

namespace coamp {

/// <a|b> = exp(-(|a|^2 + |b|^2)/2 + conj(a) b). Never zero.
Complex overlap(const CoherentLabel& a, const CoherentLabel& b);

/// D(a, b) = |a - b|^2, so that |<a|b>|^2 = exp(-D).
double distance(const CoherentLabel& a, const CoherentLabel& b);

/// Matrix of pairwise overlaps, entries(i, j) = <label_i|label_j>.
///
/// Built from labels the matrix is Hermitian with unit diagonal by
/// construction. from_entries() wraps an arbitrary Hermitian matrix for
/// callers working with non-coherent state sets; labels() is then empty.
class GramMatrix {
 public:
  explicit GramMatrix(std::vector<CoherentLabel> labels);
  static GramMatrix from_entries(ComplexMatrix entries);

  const ComplexMatrix& entries() const noexcept { return entries_; }
  const std::vector<CoherentLabel>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(entries_.rows());
  }

 private:
  GramMatrix() = default;
  ComplexMatrix entries_;
  std::vector<CoherentLabel> labels_;
};

GramMatrix gram(std::span<const CoherentLabel> labels);

struct PsdVerdict {
  bool is_psd = false;
  double min_eigenvalue = 0.0;
  // Absolute threshold actually applied: tol * max(1, spectral norm).
  double tolerance_used = 0.0;
  double scale = 1.0;
};

/// Eigen-decomposes a Hermitian matrix and tests min eigenvalue against
/// -tol * max(1, ||m||_2). Matrices that are only Hermitian up to 1e-12
/// entrywise are symmetrized first; anything worse is rejected.
PsdVerdict psd_check(const ComplexMatrix& m, double tol = 1e-10);

/// Largest absolute entry of a - b.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

struct WignerWindow {
  double x_min = -1.0;
  double x_max = 1.0;
  double p_min = -1.0;
  double p_max = 1.0;
};

/// Wigner function of a coherent state sampled on a uniform grid, with
/// x = (a + a^dagger)/sqrt(2), hbar = 1. values(i, j) = W(x_i, p_j).
class WignerGrid {
 public:
  WignerGrid(WignerWindow window, std::size_t resolution, Eigen::MatrixXd values);

  const WignerWindow& window() const noexcept { return window_; }
  std::size_t resolution() const noexcept { return resolution_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  double x_at(std::size_t i) const;
  double p_at(std::size_t j) const;

  /// Trapezoid-rule integral over the window.
  double integral() const;

  std::string to_csv() const;
  std::string to_json() const;
  static WignerGrid from_json(const std::string& text);

 private:
  WignerWindow window_;
  std::size_t resolution_;
  Eigen::MatrixXd values_;
};

double wigner_value(const CoherentLabel& label, double x, double p);

WignerGrid wigner_grid(const CoherentLabel& label, const WignerWindow& window,
                       std::size_t resolution);

/// Window covering +-`sigmas` standard deviations around the state's peak.
WignerWindow wigner_window_around(const CoherentLabel& label, double sigmas = 6.0);

}  // namespace coamp
