// kraus.hpp - explicit Kraus operators for a feasible transformation
// |psi_i> -> |phi_i>, built in a truncated Fock basis:
//
//   A_k = sum_i (c_ki / gamma_i) |phi_i><dual_i|,   gamma_i = <dual_i|psi_i>
//
// where the duals are biorthogonal to the inputs.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coamp/transform.hpp"

namespace coamp {

enum class DualConvention {
  Reciprocal,    // two states: dual_1 = psi_1 / <psi_2|psi_1> - psi_2, and symmetric
  GramInverse,   // dual_i = sum_j (G^-1)_ji psi_j, so gamma_i = 1
};

struct DualBasis {
  std::vector<FockVector> duals;
  std::vector<Complex> normalizers;  // gamma_i
  DualConvention convention = DualConvention::GramInverse;
  double condition_number = 1.0;     // of the numerical input Gram matrix
};

inline constexpr double kMaxGramCondition = 1e12;

/// Duals of the truncated input vectors. Two states use the reciprocal
/// construction (unless their overlap underflows); any other count uses the
/// Gram inverse. Throws ErrorCode::IllConditioned, with the condition
/// number, when the inputs are numerically dependent.
DualBasis reciprocal_states(const std::vector<CoherentLabel>& set_a, std::size_t dim);

/// Always the Gram-inverse convention.
DualBasis gram_inverse_duals(const std::vector<CoherentLabel>& set_a, std::size_t dim);

class KrausSet {
 public:
  KrausSet(std::vector<ComplexMatrix> operators, std::vector<CoherentLabel> set_a,
           std::vector<CoherentLabel> set_b, CoefficientMatrix coefficients,
           std::size_t dim, bool completed);

  const std::vector<ComplexMatrix>& operators() const noexcept { return operators_; }
  /// The success operators A_k, excluding any completion operator.
  std::size_t success_count() const noexcept { return coefficients_.rows(); }
  const std::vector<CoherentLabel>& set_a() const noexcept { return set_a_; }
  const std::vector<CoherentLabel>& set_b() const noexcept { return set_b_; }
  const CoefficientMatrix& coefficients() const noexcept { return coefficients_; }
  std::size_t dim() const noexcept { return dim_; }
  bool completed() const noexcept { return completed_; }

 private:
  std::vector<ComplexMatrix> operators_;
  std::vector<CoherentLabel> set_a_;
  std::vector<CoherentLabel> set_b_;
  CoefficientMatrix coefficients_;
  std::size_t dim_;
  bool completed_;
};

/// `dim` is the Fock vector length. Pass `duals` to override the default
/// convention from reciprocal_states().
KrausSet build_kraus(const std::vector<CoherentLabel>& set_a,
                     const std::vector<CoherentLabel>& set_b,
                     const CoefficientMatrix& coeffs, std::size_t dim,
                     const std::optional<DualBasis>& duals = std::nullopt);

struct VerificationReport {
  Eigen::MatrixXd action_residuals;  // M x N, ||A_k psi_i - c_ki phi_i||
  // N x N; for reciprocal duals the deviation from the closed form
  // (1 - |<a1|a2>|^2) / <a_s|a_other> delta_st, otherwise from gamma_s delta_st.
  Eigen::MatrixXd eq14_residuals;
  double span_completeness = 0.0;    // ||P S P - P||_max, S = sum over success ops
  double full_completeness = 0.0;    // ||sum over all ops - I||_max
  double gram_transport = 0.0;       // max |<psi_i|S|psi_j> - G_A(i,j)|
  double span_eig_min = 0.0;         // spectrum of P S P
  double span_eig_max = 0.0;

  double max_action() const;
  double max_eq14() const;
};

VerificationReport verify_action(const KrausSet& ks);

/// Appends B = (I - sum A^dagger A)^{1/2}. Eigenvalues of I - sum A^dagger A
/// below 1e-10 are treated as zero so that B annihilates the input span.
/// Throws ErrorCode::NotPsd when an eigenvalue is below -1e-6.
KrausSet complete_to_identity(const KrausSet& ks);

/// End-to-end construction: feasibility (deterministic when `p` is empty,
/// otherwise a Dykstra witness with diag(Pi) = p), factorization, operator
/// assembly, optional completion and verification. The Fock dimension is
/// derived from all input and output amplitudes.
struct KrausBuild {
  FeasibilityReport feasibility;
  std::optional<KrausSet> kraus;
  std::optional<VerificationReport> verification;
};

KrausBuild build_transformation_kraus(const std::vector<CoherentLabel>& set_a,
                                      const std::vector<CoherentLabel>& set_b,
                                      const std::optional<ProbabilityVector>& p,
                                      const TruncationConfig& truncation, bool complete);

/// JSON bundle: schema_version, dim, M, completed, operators (each a
/// row-major list of [re, im]), set_a, set_b, gains, coefficients, residuals.
std::string to_json(const KrausSet& ks, const VerificationReport& report);

/// Parses and validates a bundle back into a KrausSet.
KrausSet kraus_from_json(const std::string& text);

}  // namespace coamp
