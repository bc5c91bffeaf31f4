// fock.cpp
#include "coamp/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "coamp/error.hpp"

namespace coamp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exp(-|alpha|^2 / 2) underflows past this point.
constexpr double kMaxHalfMeanPhotons = 700.0;

std::string describe(const CoherentLabel& label) {
  std::ostringstream os;
  os.precision(17);
  os << "label(amplitude=" << label.amplitude() << ", phase=" << label.phase()
     << ")";
  return os.str();
}

// Smallest cutoff N with Poisson(mean) tail above N below epsilon, or
// nullopt if no N < dim_limit qualifies.
std::optional<std::size_t> poisson_cutoff(double mean, double epsilon,
                                          std::size_t dim_limit) {
  if (mean == 0.0) return 0;
  const double log_mean = std::log(mean);
  const double log_eps = std::log(epsilon);
  auto log_pmf = [&](std::size_t n) {
    const double dn = static_cast<double>(n);
    return -mean + dn * log_mean - std::lgamma(dn + 1.0);
  };

  // Terms past `last` are geometrically small relative to epsilon.
  std::vector<double> pmf;
  bool covered = false;
  for (std::size_t n = 0;; ++n) {
    const double lp = log_pmf(n);
    pmf.push_back(std::exp(lp));
    if (static_cast<double>(n) > mean && lp < log_eps - 60.0) {
      covered = true;
      break;
    }
    if (n > dim_limit + 1) break;
  }

  // Stopped at the dimension limit: the mass past the last term is unknown
  // term by term, so take it from the complement.
  double remainder = 0.0;
  if (!covered) {
    long double seen = 0.0L;
    for (double v : pmf) seen += v;
    remainder = static_cast<double>(std::max(0.0L, 1.0L - seen));
  }

  // tail[N] = sum_{n > N} pmf[n], accumulated small terms first.
  const std::size_t count = pmf.size();
  std::vector<double> tail(count, 0.0);
  tail[count - 1] = remainder;
  for (std::size_t n = count - 1; n-- > 0;) tail[n] = tail[n + 1] + pmf[n + 1];

  for (std::size_t cutoff = 0; cutoff < count && cutoff < dim_limit; ++cutoff) {
    if (tail[cutoff] < epsilon) return cutoff;
  }
  return std::nullopt;
}

}  // namespace

double normalize_phase(double phase) {
  double r = std::fmod(phase, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

CoherentLabel::CoherentLabel(double amplitude, double phase) {
  if (!std::isfinite(amplitude) || amplitude < 0.0) {
    fail(ErrorCode::InvalidArgument,
         "coherent label amplitude must be finite and >= 0");
  }
  if (!std::isfinite(phase)) {
    fail(ErrorCode::InvalidArgument, "coherent label phase must be finite");
  }
  amplitude_ = amplitude;
  phase_ = normalize_phase(phase);
}

CoherentLabel CoherentLabel::from_complex(Complex value) {
  return CoherentLabel(std::abs(value), std::arg(value));
}

CoherentLabel CoherentLabel::scaled(double gain) const {
  return CoherentLabel(amplitude_ * gain, phase_);
}

bool operator==(const CoherentLabel& a, const CoherentLabel& b) {
  if (a.amplitude_ == 0.0 && b.amplitude_ == 0.0) return true;
  return a.amplitude_ == b.amplitude_ && a.phase_ == b.phase_;
}

void TruncationConfig::validate() const {
  if (!(tail_epsilon > 0.0 && tail_epsilon < 1.0)) {
    fail(ErrorCode::InvalidArgument, "tail_epsilon must lie in (0, 1)");
  }
  if (max_dim == 0) fail(ErrorCode::InvalidArgument, "max_dim must be >= 1");
  if (explicit_dim && *explicit_dim == 0) {
    fail(ErrorCode::InvalidArgument, "explicit_dim must be >= 1");
  }
}

std::size_t truncation_dim(std::span<const CoherentLabel> labels,
                           const TruncationConfig& config) {
  config.validate();
  if (labels.empty()) {
    fail(ErrorCode::InvalidArgument, "truncation_dim needs at least one label");
  }
  if (config.explicit_dim) {
    if (*config.explicit_dim > config.max_dim) {
      fail(ErrorCode::DimensionOverflow,
           "explicit_dim exceeds max_dim (" + std::to_string(config.max_dim) +
               ")");
    }
    return *config.explicit_dim - 1;
  }

  std::size_t cutoff = 0;
  for (const auto& label : labels) {
    const double mean = label.amplitude() * label.amplitude();
    const auto n = poisson_cutoff(mean, config.tail_epsilon, config.max_dim);
    if (!n) {
      fail(ErrorCode::DimensionOverflow,
           "truncation for " + describe(label) + " exceeds max_dim " +
               std::to_string(config.max_dim));
    }
    cutoff = std::max(cutoff, *n);
  }
  return cutoff;
}

FockVector coherent_vector(const CoherentLabel& label, std::size_t dim) {
  if (dim == 0) fail(ErrorCode::InvalidArgument, "coherent_vector: dim must be >= 1");
  const double half_mean = 0.5 * label.amplitude() * label.amplitude();
  if (half_mean > kMaxHalfMeanPhotons) {
    fail(ErrorCode::NumericFailure,
         "coherent_vector: amplitude too large for double precision, " +
             describe(label));
  }
  const Complex z = label.value();
  ComplexVector c(static_cast<Eigen::Index>(dim));
  c[0] = std::exp(-half_mean);
  for (Eigen::Index n = 0; n + 1 < c.size(); ++n) {
    c[n + 1] = c[n] * z / std::sqrt(static_cast<double>(n + 1));
  }
  return FockVector(std::move(c));
}

Complex inner_product(const FockVector& u, const FockVector& v) {
  if (u.dim() != v.dim()) {
    fail(ErrorCode::DimensionMismatch,
         "inner_product: dimensions " + std::to_string(u.dim()) + " and " +
             std::to_string(v.dim()));
  }
  return u.coefficients().dot(v.coefficients());  // conjugates the left side
}

}  // namespace coamp
