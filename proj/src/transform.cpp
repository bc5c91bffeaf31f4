// transform.cpp
#include "coamp/transform.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "coamp/error.hpp"

namespace coamp {

namespace {

constexpr double kDiagonalTol = 1e-12;
// Dykstra search: iterates are pushed this many multiples of `tol` inside
// the cone so that they land strictly inside the feasible set.
constexpr double kInteriorShift = 10.0;
// Floors for the block scalings in balancing_scales().
constexpr double kProbabilityFloor = 1e-12;
constexpr double kWeightFloor = 1e-6;
// Required violation, relative to a trace-normalized Z, before an
// infeasibility certificate is trusted.
constexpr double kCertificateSlack = 1e-9;

void require_same_size(const GramMatrix& ga, const GramMatrix& gb, const char* where) {
  if (ga.size() != gb.size()) {
    fail(ErrorCode::DimensionMismatch,
         std::string(where) + ": Gram matrices have sizes " + std::to_string(ga.size()) +
             " and " + std::to_string(gb.size()));
  }
}

double scaled_margin(const PsdVerdict& v) { return v.min_eigenvalue / v.scale; }

struct Eig {
  Eigen::VectorXd values;
  ComplexMatrix vectors;
};

Eig hermitian_eig(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::NumericFailure, "Hermitian eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix clip_to_psd(const ComplexMatrix& m, double floor = 0.0) {
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  const Eig e = hermitian_eig(h);
  const Eigen::VectorXd kept = e.values.cwiseMax(floor);
  return e.vectors * kept.asDiagonal() * e.vectors.adjoint();
}

double scaled_min_eig(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (m + m.adjoint()),
                                                      Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return ev.minCoeff() / std::max(1.0, ev.cwiseAbs().maxCoeff());
}

// Unknowns of the lifted feasibility problem, stored congruence-scaled:
// Pi = E pi E and K = D k D with positive diagonal E, D. Congruence keeps
// both PSD cones intact while reshaping the metric the projections use.
struct PiResidual {
  ComplexMatrix pi;
  ComplexMatrix k;
};

struct LiftedProblem {
  const ComplexMatrix& a;
  const ComplexMatrix& b;
  const Eigen::VectorXd& p;
  Eigen::VectorXd e;  // Pi = E pi E
  Eigen::VectorXd d;  // K = D k D

  ComplexMatrix pi(const ComplexMatrix& pi_scaled) const {
    return e.asDiagonal() * pi_scaled * e.asDiagonal();
  }
  ComplexMatrix residual(const ComplexMatrix& k_scaled) const {
    return d.asDiagonal() * k_scaled * d.asDiagonal();
  }

  // Exact Frobenius projection onto {diag(Pi) = p, K + Pi o G_B = G_A} in
  // the scaled unknowns. The constraints decouple per entry: for i != j the
  // pair (pi_ij, k_ij) is projected onto the complex line u k + w pi = a.
  void project(PiResidual& x) const {
    const Eigen::Index n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      x.pi(i, i) = p[i] / (e[i] * e[i]);
      x.k(i, i) = (a(i, i).real() - p[i] * b(i, i).real()) / (d[i] * d[i]);
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double u = d[i] * d[j];
        const Complex w = b(i, j) * (e[i] * e[j]);
        const Complex pi0 = 0.5 * (x.pi(i, j) + std::conj(x.pi(j, i)));
        const Complex k0 = 0.5 * (x.k(i, j) + std::conj(x.k(j, i)));
        const Complex r = (a(i, j) - u * k0 - w * pi0) / (u * u + std::norm(w));
        x.pi(i, j) = pi0 + std::conj(w) * r;
        x.k(i, j) = k0 + u * r;
        x.pi(j, i) = std::conj(x.pi(i, j));
        x.k(j, i) = std::conj(x.k(i, j));
      }
    }
  }
};

// Congruence scalings for the unknowns. e_i = sqrt(p_i) and
// f_i = sqrt(1 - p_i) give both blocks a unit diagonal; d_i = f_i c_i with
// c_i c_j ~ |b_ij| e_i e_j / (f_i f_j) (least squares on logs, exact for two
// states) weighs both blocks equally in every off-diagonal constraint.
// Without this, near-singular diagonals or tiny overlaps stall the search.
std::pair<Eigen::VectorXd, Eigen::VectorXd> balancing_scales(const ComplexMatrix& b,
                                                             const Eigen::VectorXd& p) {
  const Eigen::Index n = b.rows();
  Eigen::VectorXd e = p.cwiseMax(kProbabilityFloor).cwiseSqrt();
  Eigen::VectorXd f = (1.0 - p.array()).matrix().cwiseMax(kProbabilityFloor).cwiseSqrt();
  auto log_weight = [&](Eigen::Index i, Eigen::Index j) {
    return std::log(std::max(std::abs(b(i, j)) * e[i] * e[j], kWeightFloor)) -
           std::log(f[i] * f[j]);
  };
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  if (n == 2) {
    y.setConstant(0.5 * log_weight(0, 1));
  } else if (n > 2) {
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i != j) row_sums[i] += log_weight(i, j);
      }
    }
    const double total = row_sums.sum() / (2.0 * static_cast<double>(n) - 2.0);
    y = (row_sums.array() - total) / static_cast<double>(n - 2);
  }
  return {e, f.cwiseProduct(y.array().exp().matrix())};
}

// Farkas-type certificate read off the Dykstra residual direction. If
// Z >= 0, M = Z o conj(G_B) and M - diag(s) >= 0, then every feasible Pi has
//   <Z, G_A> >= <Z, Pi o G_B> = <M, Pi> >= sum_i p_i s_i,
// so <Z, G_A> < sum_i p_i s_i proves that no witness exists. The direction
// only proposes Z and s; the inequalities are checked on the unscaled data.
bool certifies_infeasible(const LiftedProblem& problem, const PiResidual& cone,
                          const PiResidual& affine) {
  const Eigen::Index n = problem.a.rows();
  const Eigen::VectorXd d_inv = problem.d.cwiseInverse();
  const Eigen::VectorXd e_inv = problem.e.cwiseInverse();
  ComplexMatrix z = clip_to_psd(d_inv.asDiagonal() * (cone.k - affine.k) * d_inv.asDiagonal());
  const double z_scale = z.diagonal().real().sum();
  if (!(z_scale > 0.0) || !std::isfinite(z_scale)) return false;
  z /= z_scale;

  const ComplexMatrix m = z.cwiseProduct(problem.b.conjugate());
  const ComplexMatrix v_pi =
      clip_to_psd(e_inv.asDiagonal() * (cone.pi - affine.pi) * e_inv.asDiagonal()) / z_scale;
  Eigen::VectorXd s = m.diagonal().real() - v_pi.diagonal().real();
  ComplexMatrix slack = m;
  slack.diagonal() -= s.cast<Complex>();
  const Eig e = hermitian_eig(0.5 * (slack + slack.adjoint()));
  const double norm_m = std::max(1.0, m.cwiseAbs().maxCoeff());
  s.array() += std::min(e.values.minCoeff(), 0.0) - 1e-12 * norm_m * static_cast<double>(n);

  const double bound = problem.p.dot(s);
  const double value = (z.conjugate().cwiseProduct(problem.a)).sum().real();
  return value < bound - kCertificateSlack;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Feasible: return "feasible";
    case Verdict::Infeasible: return "infeasible";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string_view to_string(Binding b) {
  switch (b) {
    case Binding::PiPositivity: return "pi-positivity";
    case Binding::ProbabilityDiagonal: return "probability-diagonal";
    case Binding::ResidualPositivity: return "residual-positivity";
    case Binding::AnalyticBoundary: return "analytic-boundary";
  }
  return "?";
}

ProbabilityVector::ProbabilityVector(Eigen::VectorXd values) : p(std::move(values)) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
      fail(ErrorCode::InvalidArgument, "probability " + std::to_string(i) +
                                           " outside [0, 1]");
    }
  }
}

ProbabilityVector ProbabilityVector::uniform(std::size_t n, double value) {
  return ProbabilityVector(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), value));
}

PiMatrix::PiMatrix(ComplexMatrix entries, double psd_tol) {
  verdict_ = psd_check(entries, psd_tol);  // rejects non-square / non-Hermitian
  entries_ = 0.5 * (entries + entries.adjoint());
  probabilities_ = entries_.diagonal().real();
  for (Eigen::Index i = 0; i < probabilities_.size(); ++i) {
    const double pi = probabilities_[i];
    if (!(pi >= -kDiagonalTol && pi <= 1.0 + kDiagonalTol)) {
      fail(ErrorCode::InvalidArgument,
           "Pi diagonal entry " + std::to_string(i) + " is not a probability");
    }
    probabilities_[i] = std::clamp(pi, 0.0, 1.0);
  }
}

std::pair<PiMatrix, FeasibilityReport> pi_deterministic(const GramMatrix& ga,
                                                        const GramMatrix& gb,
                                                        double tol) {
  require_same_size(ga, gb, "pi_deterministic");
  const ComplexMatrix& a = ga.entries();
  const ComplexMatrix& b = gb.entries();
  if ((b.cwiseAbs().array() == 0.0).any()) {
    fail(ErrorCode::InvalidArgument, "pi_deterministic: G_B has a zero entry");
  }
  PiMatrix pi(a.cwiseQuotient(b), tol);

  FeasibilityReport report;
  report.binding = Binding::PiPositivity;
  report.margin = scaled_margin(pi.verdict());
  const double diag_err = (pi.probabilities().array() - 1.0).abs().maxCoeff();
  if (diag_err > kDiagonalTol) {
    report.binding = Binding::ProbabilityDiagonal;
    report.margin = -diag_err;
  }
  report.verdict = (pi.valid() && diag_err <= kDiagonalTol) ? Verdict::Feasible
                                                            : Verdict::Infeasible;
  if (report.feasible()) report.witness = pi;
  return {std::move(pi), std::move(report)};
}

ResidualGram residual_gram(const GramMatrix& ga, const GramMatrix& gb,
                           const PiMatrix& pi, double tol) {
  require_same_size(ga, gb, "residual_gram");
  if (pi.size() != ga.size()) {
    fail(ErrorCode::DimensionMismatch, "residual_gram: Pi size differs from Gram size");
  }
  ResidualGram r;
  r.entries = ga.entries() - pi.entries().cwiseProduct(gb.entries());
  r.entries = 0.5 * (r.entries + r.entries.adjoint());
  r.verdict = psd_check(r.entries, tol);
  return r;
}

FeasibilityReport lemma1_check(const GramMatrix& ga, const GramMatrix& gb,
                               const PiMatrix& pi, double tol) {
  const ResidualGram k = residual_gram(ga, gb, pi, tol);
  const PsdVerdict pv = psd_check(pi.entries(), tol);

  const Eigen::VectorXd diag = pi.entries().diagonal().real();
  const double diag_err = (diag - pi.probabilities()).cwiseAbs().maxCoeff() +
                          pi.entries().diagonal().imag().cwiseAbs().maxCoeff();

  FeasibilityReport report;
  const double pi_margin = scaled_margin(pv);
  const double k_margin = scaled_margin(k.verdict);
  if (pi_margin <= k_margin) {
    report.binding = Binding::PiPositivity;
    report.margin = pi_margin;
  } else {
    report.binding = Binding::ResidualPositivity;
    report.margin = k_margin;
  }
  if (diag_err > kDiagonalTol) {
    report.binding = Binding::ProbabilityDiagonal;
    report.margin = -diag_err;
  }
  const bool ok = pv.is_psd && k.verdict.is_psd && diag_err <= kDiagonalTol;
  report.verdict = ok ? Verdict::Feasible : Verdict::Infeasible;
  if (ok) report.witness = pi;
  return report;
}

FeasibilityReport dykstra_feasibility(const GramMatrix& ga, const GramMatrix& gb,
                                      const ProbabilityVector& p, int max_iters,
                                      double tol) {
  require_same_size(ga, gb, "dykstra_feasibility");
  if (p.size() != ga.size()) {
    fail(ErrorCode::DimensionMismatch, "dykstra_feasibility: probability vector size");
  }
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "dykstra_feasibility: tol must be > 0");
  if (max_iters < 0) fail(ErrorCode::InvalidArgument, "dykstra_feasibility: max_iters < 0");

  // With every p_i = 1 the residual block must vanish and Pi is pinned to
  // G_A / G_B; there is nothing to search.
  if ((p.p.array() == 1.0).all()) {
    auto [pi, report] = pi_deterministic(ga, gb, tol);
    return report;
  }

  const auto [e_scale, d_scale] = balancing_scales(gb.entries(), p.p);
  const LiftedProblem problem{ga.entries(), gb.entries(), p.p, e_scale, d_scale};
  const Eigen::Index n = ga.entries().rows();

  PiResidual x{ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n)};
  problem.project(x);

  FeasibilityReport report;
  auto evaluate = [&](int iteration) {
    const double pi_margin = scaled_min_eig(problem.pi(x.pi));
    const double k_margin = scaled_min_eig(problem.residual(x.k));
    report.iterations = iteration;
    report.binding = pi_margin <= k_margin ? Binding::PiPositivity
                                           : Binding::ResidualPositivity;
    report.margin = std::min(pi_margin, k_margin);
    return report.margin >= -tol;
  };
  auto accept = [&] {
    report.verdict = Verdict::Feasible;
    report.witness = PiMatrix(problem.pi(x.pi), tol);
    return report;
  };

  if (evaluate(0)) return accept();

  constexpr int kStallWindow = 50;
  constexpr double kStallRelTol = 1e-9;
  const double floor = kInteriorShift * tol;
  PiResidual correction{ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n)};
  double previous_gap = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (int it = 1; it <= max_iters; ++it) {
    PiResidual y{clip_to_psd(x.pi + correction.pi, floor),
                 clip_to_psd(x.k + correction.k, floor)};
    correction.pi += x.pi - y.pi;
    correction.k += x.k - y.k;
    x = y;
    problem.project(x);

    if (evaluate(it)) return accept();

    const double gap =
        std::sqrt((y.pi - x.pi).squaredNorm() + (y.k - x.k).squaredNorm());
    if (gap > tol && certifies_infeasible(problem, y, x)) {
      report.verdict = Verdict::Infeasible;
      report.margin = -gap;
      return report;
    }
    const bool stable = std::abs(gap - previous_gap) <= kStallRelTol * gap;
    if (gap > tol && stable) {
      if (++stalled >= kStallWindow) {
        report.verdict = Verdict::Infeasible;
        report.margin = -gap;
        return report;
      }
    } else {
      stalled = 0;
    }
    previous_gap = gap;
  }
  report.verdict = Verdict::Inconclusive;
  return report;
}

double max_uniform_success(const GramMatrix& ga, const GramMatrix& gb, double tol) {
  require_same_size(ga, gb, "max_uniform_success");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "max_uniform_success: tol must be > 0");
  if (pi_deterministic(ga, gb).second.feasible()) return 1.0;

  constexpr int kInnerIters = 200000;
  constexpr double kInnerTol = 1e-10;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const auto report = dykstra_feasibility(
        ga, gb, ProbabilityVector::uniform(ga.size(), mid), kInnerIters, kInnerTol);
    switch (report.verdict) {
      case Verdict::Feasible: lo = mid; break;
      case Verdict::Infeasible: hi = mid; break;
      case Verdict::Inconclusive: {
        std::ostringstream os;
        os.precision(17);
        os << "max_uniform_success: feasibility at p = " << mid << " is inconclusive";
        fail(ErrorCode::Inconclusive, os.str());
      }
    }
  }
  return lo;
}

CoefficientMatrix factor_coefficients(const PiMatrix& pi, std::optional<double> clip) {
  const Eig e = hermitian_eig(pi.entries());
  const double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
  const double threshold = clip.value_or(1e-10 * scale);
  if (e.values.minCoeff() < -threshold) {
    std::ostringstream os;
    os.precision(17);
    os << "factor_coefficients: Pi has eigenvalue " << e.values.minCoeff()
       << " below -" << threshold;
    fail(ErrorCode::NotPsd, os.str());
  }
  const Eigen::Index n = e.values.size();
  Eigen::Index m = 0;
  for (Eigen::Index i = 0; i < n; ++i) m += e.values[i] > threshold ? 1 : 0;

  CoefficientMatrix c{ComplexMatrix(m, n)};
  Eigen::Index row = 0;
  for (Eigen::Index i = n; i-- > 0;) {  // descending eigenvalues
    if (e.values[i] <= threshold) continue;
    c.entries.row(row++) = std::sqrt(e.values[i]) * e.vectors.col(i).adjoint();
  }
  return c;
}

}  // namespace coamp
