// fock.hpp - coherent-state labels and their truncated photon-number
// representation.
#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

namespace coamp {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// A pure coherent state |amplitude * e^{i phase}>.
///
/// The phase is normalized into [0, 2pi) on construction. Two vacuum labels
/// compare equal whatever their phase.
class CoherentLabel {
 public:
  CoherentLabel() = default;
  CoherentLabel(double amplitude, double phase);

  static CoherentLabel from_complex(Complex value);

  double amplitude() const noexcept { return amplitude_; }
  double phase() const noexcept { return phase_; }
  Complex value() const noexcept { return std::polar(amplitude_, phase_); }

  /// Same phase, amplitude multiplied by `gain` (gain >= 0).
  CoherentLabel scaled(double gain) const;

  friend bool operator==(const CoherentLabel& a, const CoherentLabel& b);

 private:
  double amplitude_ = 0.0;
  double phase_ = 0.0;
};

double normalize_phase(double phase);

struct TruncationConfig {
  double tail_epsilon = 1e-12;
  std::size_t max_dim = 4096;
  std::optional<std::size_t> explicit_dim;

  void validate() const;
};

/// Photon-number amplitudes c_0..c_{dim-1} of a (possibly truncated) state.
class FockVector {
 public:
  FockVector() = default;
  explicit FockVector(ComplexVector coefficients)
      : coefficients_(std::move(coefficients)) {}

  const ComplexVector& coefficients() const noexcept { return coefficients_; }
  std::size_t dim() const noexcept {
    return static_cast<std::size_t>(coefficients_.size());
  }
  double norm() const { return coefficients_.norm(); }

 private:
  ComplexVector coefficients_;
};

/// Smallest photon-number cutoff N such that every label's Poisson(|alpha|^2)
/// mass above N is below config.tail_epsilon. Vectors built for the labels
/// then need N + 1 coefficients.
///
/// An explicit_dim override bypasses the tail search. Throws
/// ErrorCode::DimensionOverflow when N + 1 would exceed config.max_dim.
std::size_t truncation_dim(std::span<const CoherentLabel> labels,
                           const TruncationConfig& config = {});

FockVector coherent_vector(const CoherentLabel& label, std::size_t dim);

Complex inner_product(const FockVector& u, const FockVector& v);

}  // namespace coamp
