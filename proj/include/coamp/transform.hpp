// transform.hpp - existence of (probabilistic or deterministic)
// transformations between two pure-state sets, decided through a witness
// matrix Pi:
//
//   Pi >= 0,   diag(Pi) = p,   G_A - Pi o G_B >= 0     (o = Hadamard product)
//
// Gram convention throughout: G(i, j) = <psi_i|psi_j>.
#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "coamp/geometry.hpp"

namespace coamp {

/// Per-state success probabilities, each in [0, 1].
struct ProbabilityVector {
  Eigen::VectorXd p;

  ProbabilityVector() = default;
  explicit ProbabilityVector(Eigen::VectorXd values);
  static ProbabilityVector uniform(std::size_t n, double value);

  std::size_t size() const noexcept { return static_cast<std::size_t>(p.size()); }
};

/// Hermitian witness matrix. probabilities() is its (real) diagonal; whether
/// it is positive semidefinite is carried in verdict(), never assumed.
class PiMatrix {
 public:
  explicit PiMatrix(ComplexMatrix entries, double psd_tol = 1e-10);

  const ComplexMatrix& entries() const noexcept { return entries_; }
  const Eigen::VectorXd& probabilities() const noexcept { return probabilities_; }
  bool valid() const noexcept { return verdict_.is_psd; }
  const PsdVerdict& verdict() const noexcept { return verdict_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }

 private:
  ComplexMatrix entries_;
  Eigen::VectorXd probabilities_;
  PsdVerdict verdict_;
};

/// M x N matrix C with C^dagger C = Pi; row k holds the amplitudes c_ki of
/// success operator k.
struct CoefficientMatrix {
  ComplexMatrix entries;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(entries.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(entries.cols()); }
};

/// K = G_A - Pi o G_B, the Gram matrix of the failure branch.
struct ResidualGram {
  ComplexMatrix entries;
  PsdVerdict verdict;
};

enum class Verdict { Feasible, Infeasible, Inconclusive };

enum class Binding {
  PiPositivity,
  ProbabilityDiagonal,
  ResidualPositivity,
  AnalyticBoundary,
};

std::string_view to_string(Verdict v);
std::string_view to_string(Binding b);

struct FeasibilityReport {
  Verdict verdict = Verdict::Inconclusive;
  // Signed slack of the binding condition; for eigenvalue conditions the
  // minimum eigenvalue divided by max(1, spectral norm).
  double margin = 0.0;
  Binding binding = Binding::PiPositivity;
  std::optional<PiMatrix> witness;
  int iterations = 0;

  bool feasible() const noexcept { return verdict == Verdict::Feasible; }
};

/// Deterministic case: Pi(i, j) = G_A(i, j) / G_B(i, j). The transformation
/// exists iff that Pi is positive semidefinite with unit diagonal.
std::pair<PiMatrix, FeasibilityReport> pi_deterministic(const GramMatrix& ga,
                                                        const GramMatrix& gb,
                                                        double tol = 1e-10);

/// Checks the three witness conditions for a given Pi.
FeasibilityReport lemma1_check(const GramMatrix& ga, const GramMatrix& gb,
                               const PiMatrix& pi, double tol = 1e-10);

ResidualGram residual_gram(const GramMatrix& ga, const GramMatrix& gb,
                           const PiMatrix& pi, double tol = 1e-10);

/// Searches for a witness Pi with diag(Pi) = p.
///
/// The unknowns are the pair (Pi, K). Alternating projections with Dykstra's
/// correction run between the cone {Pi >= 0, K >= 0} (eigenvalue clipping of
/// each block) and the affine set {diag(Pi) = p, K + Pi o G_B = G_A} (exact
/// entrywise projection). Both blocks are congruence-scaled to unit diagonal
/// and balanced against each other before iterating. Every affine iterate
/// satisfies the diagonal and Hadamard constraints exactly, so feasibility is
/// declared as soon as both blocks are PSD within `tol`. Infeasibility is declared once the
/// cone-to-affine gap stays above `tol` without moving for 50 consecutive
/// iterations; otherwise the verdict is Inconclusive.
FeasibilityReport dykstra_feasibility(const GramMatrix& ga, const GramMatrix& gb,
                                      const ProbabilityVector& p,
                                      int max_iters = 20000, double tol = 1e-9);

/// Largest uniform success probability (bisection to width `tol`). Throws
/// ErrorCode::Inconclusive naming the probe probability if the search cannot
/// decide a probe.
double max_uniform_success(const GramMatrix& ga, const GramMatrix& gb,
                           double tol = 1e-6);

/// Pi = V L V^dagger  ->  C = L^{1/2} V^dagger, keeping eigenvalues above
/// `clip` (default 1e-10 * max(1, ||Pi||)), largest first. Throws
/// ErrorCode::NotPsd for eigenvalues below -clip.
CoefficientMatrix factor_coefficients(const PiMatrix& pi,
                                      std::optional<double> clip = std::nullopt);

}  // namespace coamp
