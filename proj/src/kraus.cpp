// kraus.cpp
#include "coamp/kraus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <rapidjson/document.h>

#include "coamp/error.hpp"
#include "coamp/serialize.hpp"

namespace coamp {

namespace {

using Eigen::Index;

// Below this the reciprocal construction would divide by an underflowed
// overlap; such states are orthogonal for all practical purposes and the
// Gram-inverse duals serve equally well.
constexpr double kMinReciprocalOverlap = 1e-100;

constexpr double kCompletionFloor = 1e-10;
constexpr double kCompletionOvershoot = 1e-6;
constexpr double kWitnessClip = 1e-8;

ComplexMatrix basis_matrix(const std::vector<CoherentLabel>& labels, std::size_t dim) {
  ComplexMatrix m(static_cast<Index>(dim), static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    m.col(static_cast<Index>(i)) = coherent_vector(labels[i], dim).coefficients();
  }
  return m;
}

struct InputBasis {
  ComplexMatrix psi;       // dim x N, columns are the truncated inputs
  ComplexMatrix gram;      // psi^dagger psi
  ComplexMatrix gram_inv;
  double condition = 1.0;
};

InputBasis input_basis(const std::vector<CoherentLabel>& set_a, std::size_t dim) {
  if (set_a.empty()) fail(ErrorCode::InvalidArgument, "input set is empty");
  InputBasis b;
  b.psi = basis_matrix(set_a, dim);
  b.gram = b.psi.adjoint() * b.psi;
  b.gram = 0.5 * (b.gram + b.gram.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(b.gram);
  if (eig.info() != Eigen::Success) {
    fail(ErrorCode::NumericFailure, "eigendecomposition of the input Gram matrix failed");
  }
  const auto& lambda = eig.eigenvalues();
  const double lo = lambda.minCoeff();
  const double hi = lambda.maxCoeff();
  b.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(b.condition < kMaxGramCondition)) {
    fail(ErrorCode::IllConditioned,
         "input states are nearly linearly dependent: Gram condition number " +
             format_double(b.condition) + " exceeds 1e12");
  }
  b.gram_inv = eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() *
               eig.eigenvectors().adjoint();
  return b;
}

DualBasis from_matrix(const ComplexMatrix& duals, const ComplexMatrix& psi,
                      DualConvention convention, double condition) {
  DualBasis out;
  out.convention = convention;
  out.condition_number = condition;
  for (Index i = 0; i < duals.cols(); ++i) {
    out.duals.emplace_back(duals.col(i));
    out.normalizers.push_back(duals.col(i).dot(psi.col(i)));
  }
  return out;
}

ComplexMatrix dual_matrix(const DualBasis& d) {
  const auto n = static_cast<Index>(d.duals.size());
  ComplexMatrix m(static_cast<Index>(d.duals.front().dim()), n);
  for (Index i = 0; i < n; ++i) m.col(i) = d.duals[static_cast<std::size_t>(i)].coefficients();
  return m;
}

}  // namespace

DualBasis gram_inverse_duals(const std::vector<CoherentLabel>& set_a, std::size_t dim) {
  const InputBasis b = input_basis(set_a, dim);
  return from_matrix(b.psi * b.gram_inv, b.psi, DualConvention::GramInverse, b.condition);
}

DualBasis reciprocal_states(const std::vector<CoherentLabel>& set_a, std::size_t dim) {
  const InputBasis b = input_basis(set_a, dim);
  if (set_a.size() == 2) {
    const Complex g21 = b.gram(1, 0);  // <psi_2|psi_1>
    if (std::abs(g21) > kMinReciprocalOverlap) {
      ComplexMatrix duals(b.psi.rows(), 2);
      duals.col(0) = b.psi.col(0) / g21 - b.psi.col(1);
      duals.col(1) = b.psi.col(1) / std::conj(g21) - b.psi.col(0);
      return from_matrix(duals, b.psi, DualConvention::Reciprocal, b.condition);
    }
  }
  return from_matrix(b.psi * b.gram_inv, b.psi, DualConvention::GramInverse, b.condition);
}

KrausSet::KrausSet(std::vector<ComplexMatrix> operators, std::vector<CoherentLabel> set_a,
                   std::vector<CoherentLabel> set_b, CoefficientMatrix coefficients,
                   std::size_t dim, bool completed)
    : operators_(std::move(operators)),
      set_a_(std::move(set_a)),
      set_b_(std::move(set_b)),
      coefficients_(std::move(coefficients)),
      dim_(dim),
      completed_(completed) {
  if (set_a_.empty() || set_a_.size() != set_b_.size()) {
    fail(ErrorCode::DimensionMismatch, "Kraus source sets must be nonempty and equal in size");
  }
  if (coefficients_.cols() != set_a_.size()) {
    fail(ErrorCode::DimensionMismatch, "coefficient matrix needs one column per input state");
  }
  if (operators_.size() != coefficients_.rows() + (completed_ ? 1 : 0)) {
    fail(ErrorCode::DimensionMismatch, "operator count does not match the coefficient rows");
  }
  const auto d = static_cast<Index>(dim_);
  for (const auto& op : operators_) {
    if (op.rows() != d || op.cols() != d) {
      fail(ErrorCode::DimensionMismatch, "Kraus operator has the wrong dimension");
    }
    if (!op.allFinite()) fail(ErrorCode::NumericFailure, "Kraus operator has non-finite entries");
  }
}

KrausSet build_kraus(const std::vector<CoherentLabel>& set_a,
                     const std::vector<CoherentLabel>& set_b,
                     const CoefficientMatrix& coeffs, std::size_t dim,
                     const std::optional<DualBasis>& duals) {
  if (set_a.size() != set_b.size()) {
    fail(ErrorCode::DimensionMismatch, "input and output sets differ in size");
  }
  if (coeffs.cols() != set_a.size()) {
    fail(ErrorCode::DimensionMismatch, "coefficient matrix needs one column per input state");
  }
  const DualBasis basis = duals ? *duals : reciprocal_states(set_a, dim);
  if (basis.duals.size() != set_a.size() || basis.duals.front().dim() != dim) {
    fail(ErrorCode::DimensionMismatch, "dual basis does not match the input set");
  }
  const ComplexMatrix w = dual_matrix(basis);
  const ComplexMatrix phi = basis_matrix(set_b, dim);
  Eigen::VectorXcd inv_gamma(static_cast<Index>(set_a.size()));
  for (std::size_t i = 0; i < set_a.size(); ++i) {
    if (std::abs(basis.normalizers[i]) <= 1e-12) {
      fail(ErrorCode::IllConditioned, "dual normalizer vanishes for input " + std::to_string(i));
    }
    inv_gamma(static_cast<Index>(i)) = 1.0 / basis.normalizers[i];
  }
  std::vector<ComplexMatrix> ops;
  for (Index k = 0; k < coeffs.entries.rows(); ++k) {
    const Eigen::VectorXcd weights = coeffs.entries.row(k).transpose().cwiseProduct(inv_gamma);
    ops.push_back(phi * weights.asDiagonal() * w.adjoint());
  }
  return KrausSet(std::move(ops), set_a, set_b, coeffs, dim, false);
}

double VerificationReport::max_action() const {
  return action_residuals.size() ? action_residuals.maxCoeff() : 0.0;
}

double VerificationReport::max_eq14() const {
  return eq14_residuals.size() ? eq14_residuals.maxCoeff() : 0.0;
}

VerificationReport verify_action(const KrausSet& ks) {
  const auto n = static_cast<Index>(ks.set_a().size());
  const auto m = static_cast<Index>(ks.success_count());
  const auto d = static_cast<Index>(ks.dim());
  const InputBasis in = input_basis(ks.set_a(), ks.dim());
  const ComplexMatrix phi = basis_matrix(ks.set_b(), ks.dim());
  const DualBasis duals = reciprocal_states(ks.set_a(), ks.dim());
  const auto& c = ks.coefficients().entries;

  VerificationReport r;
  r.action_residuals.resize(m, n);
  for (Index k = 0; k < m; ++k) {
    const auto& a = ks.operators()[static_cast<std::size_t>(k)];
    for (Index i = 0; i < n; ++i) {
      r.action_residuals(k, i) = (a * in.psi.col(i) - c(k, i) * phi.col(i)).norm();
    }
  }

  const ComplexMatrix cross = dual_matrix(duals).adjoint() * in.psi;
  r.eq14_residuals.resize(n, n);
  for (Index s = 0; s < n; ++s) {
    for (Index t = 0; t < n; ++t) {
      Complex expected = 0.0;
      if (s == t) {
        if (duals.convention == DualConvention::Reciprocal) {
          const auto& labels = ks.set_a();
          const Complex o = overlap(labels[static_cast<std::size_t>(s)],
                                    labels[static_cast<std::size_t>(1 - s)]);
          expected = (1.0 - std::norm(o)) / o;
        } else {
          expected = duals.normalizers[static_cast<std::size_t>(s)];
        }
      }
      r.eq14_residuals(s, t) = std::abs(cross(s, t) - expected);
    }
  }

  ComplexMatrix success = ComplexMatrix::Zero(d, d);
  for (Index k = 0; k < m; ++k) {
    const auto& a = ks.operators()[static_cast<std::size_t>(k)];
    success.noalias() += a.adjoint() * a;
  }
  ComplexMatrix total = success;
  if (ks.completed()) {
    const auto& b = ks.operators().back();
    total.noalias() += b.adjoint() * b;
  }

  const ComplexMatrix proj = in.psi * in.gram_inv * in.psi.adjoint();
  ComplexMatrix on_span = proj * success * proj;
  on_span = 0.5 * (on_span + on_span.adjoint()).eval();
  r.span_completeness = (on_span - proj).cwiseAbs().maxCoeff();
  r.full_completeness = (total - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  r.gram_transport =
      (in.psi.adjoint() * success * in.psi - gram(ks.set_a()).entries()).cwiseAbs().maxCoeff();

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(on_span, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    fail(ErrorCode::NumericFailure, "eigendecomposition of the span-restricted sum failed");
  }
  r.span_eig_min = eig.eigenvalues().minCoeff();
  r.span_eig_max = eig.eigenvalues().maxCoeff();
  return r;
}

KrausSet complete_to_identity(const KrausSet& ks) {
  const auto d = static_cast<Index>(ks.dim());
  ComplexMatrix rest = ComplexMatrix::Identity(d, d);
  for (std::size_t k = 0; k < ks.success_count(); ++k) {
    const auto& a = ks.operators()[k];
    rest.noalias() -= a.adjoint() * a;
  }
  rest = 0.5 * (rest + rest.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(rest);
  if (eig.info() != Eigen::Success) {
    fail(ErrorCode::NumericFailure, "eigendecomposition for the completion operator failed");
  }
  Eigen::VectorXd lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -kCompletionOvershoot) {
    fail(ErrorCode::NotPsd, "Kraus operators overshoot the identity: I - sum A^dagger A has "
                            "eigenvalue " + format_double(lambda.minCoeff()));
  }
  for (auto& l : lambda) l = l < kCompletionFloor ? 0.0 : std::sqrt(l);

  std::vector<ComplexMatrix> ops(ks.operators().begin(),
                                 ks.operators().begin() + static_cast<std::ptrdiff_t>(ks.success_count()));
  ops.push_back(eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().adjoint());
  return KrausSet(std::move(ops), ks.set_a(), ks.set_b(), ks.coefficients(), ks.dim(), true);
}

KrausBuild build_transformation_kraus(const std::vector<CoherentLabel>& set_a,
                                      const std::vector<CoherentLabel>& set_b,
                                      const std::optional<ProbabilityVector>& p,
                                      const TruncationConfig& truncation, bool complete) {
  if (set_a.empty() || set_a.size() != set_b.size()) {
    fail(ErrorCode::DimensionMismatch, "input and output sets must be nonempty and equal in size");
  }
  std::vector<CoherentLabel> all = set_a;
  all.insert(all.end(), set_b.begin(), set_b.end());
  const std::size_t dim = truncation_dim(all, truncation) + 1;

  const GramMatrix ga(set_a);
  const GramMatrix gb(set_b);
  KrausBuild out;
  std::optional<PiMatrix> pi;
  if (p) {
    out.feasibility = dykstra_feasibility(ga, gb, *p);
    if (out.feasibility.feasible()) pi = out.feasibility.witness;
  } else {
    auto [candidate, report] = pi_deterministic(ga, gb);
    out.feasibility = report;
    if (report.feasible()) pi = std::move(candidate);
  }
  if (!pi) return out;

  // A Dykstra witness is only PSD to within the search tolerance, so its
  // factorization drops eigenvalues down to that level rather than 1e-10.
  std::optional<double> clip;
  if (p) clip = kWitnessClip * std::max(1.0, pi->entries().cwiseAbs().maxCoeff());
  KrausSet ks = build_kraus(set_a, set_b, factor_coefficients(*pi, clip), dim);
  if (complete) ks = complete_to_identity(ks);
  out.verification = verify_action(ks);
  out.kraus = std::move(ks);
  return out;
}

// ---------------------------------------------------------------------------
// JSON bundle

namespace {

void write_label(JsonWriter& w, const CoherentLabel& l) {
  w.begin_object().field("amplitude", l.amplitude()).field("phase", l.phase()).end_object();
}

[[noreturn]] void bad_bundle(const std::string& why) {
  fail(ErrorCode::InvalidArgument, "kraus json: " + why);
}

const rapidjson::Value& member(const rapidjson::Value& obj, const char* name) {
  if (!obj.IsObject() || !obj.HasMember(name)) bad_bundle(std::string("missing ") + name);
  return obj[name];
}

Complex read_complex(const rapidjson::Value& v) {
  if (!v.IsArray() || v.Size() != 2 || !v[0].IsNumber() || !v[1].IsNumber()) {
    bad_bundle("complex entries must be [re, im]");
  }
  const Complex z(v[0].GetDouble(), v[1].GetDouble());
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) bad_bundle("non-finite entry");
  return z;
}

std::vector<CoherentLabel> read_labels(const rapidjson::Value& v, const char* name) {
  if (!v.IsArray() || v.Empty()) bad_bundle(std::string(name) + " must be a nonempty array");
  std::vector<CoherentLabel> out;
  for (const auto& item : v.GetArray()) {
    const auto& amp = member(item, "amplitude");
    const auto& phase = member(item, "phase");
    if (!amp.IsNumber() || !phase.IsNumber()) bad_bundle("label fields must be numbers");
    out.emplace_back(amp.GetDouble(), phase.GetDouble());
  }
  return out;
}

}  // namespace

std::string to_json(const KrausSet& ks, const VerificationReport& report) {
  JsonWriter w;
  w.begin_object();
  w.field("schema_version", 1);
  w.field("dim", ks.dim());
  w.field("M", ks.success_count());
  w.field("completed", ks.completed());
  w.key("operators").begin_array();
  for (const auto& op : ks.operators()) {
    w.begin_array();
    for (Index i = 0; i < op.rows(); ++i) {
      for (Index j = 0; j < op.cols(); ++j) w.value(op(i, j));
    }
    w.end_array();
  }
  w.end_array();
  w.key("set_a").begin_array();
  for (const auto& l : ks.set_a()) write_label(w, l);
  w.end_array();
  w.key("set_b").begin_array();
  for (const auto& l : ks.set_b()) write_label(w, l);
  w.end_array();
  w.key("gains").begin_array();
  for (std::size_t i = 0; i < ks.set_a().size(); ++i) {
    const double a = ks.set_a()[i].amplitude();
    if (a > 0.0) {
      w.value(ks.set_b()[i].amplitude() / a);
    } else {
      w.null();
    }
  }
  w.end_array();
  const auto& c = ks.coefficients().entries;
  w.key("coefficients").begin_array();
  for (Index k = 0; k < c.rows(); ++k) {
    w.begin_array();
    for (Index i = 0; i < c.cols(); ++i) w.value(c(k, i));
    w.end_array();
  }
  w.end_array();
  w.key("residuals").begin_object();
  w.field("max_action", report.max_action());
  w.field("max_eq14", report.max_eq14());
  w.field("span_completeness", report.span_completeness);
  w.field("full_completeness", report.full_completeness);
  w.field("gram_transport", report.gram_transport);
  w.field("span_eig_min", report.span_eig_min);
  w.field("span_eig_max", report.span_eig_max);
  w.end_object();
  w.end_object();
  return w.str();
}

KrausSet kraus_from_json(const std::string& text) {
  rapidjson::Document doc;
  doc.Parse<rapidjson::kParseFullPrecisionFlag>(text.c_str(), text.size());
  if (doc.HasParseError() || !doc.IsObject()) bad_bundle("not a JSON object");
  const auto& version = member(doc, "schema_version");
  if (!version.IsInt() || version.GetInt() != 1) bad_bundle("unsupported schema_version");
  const auto& dim_v = member(doc, "dim");
  const auto& m_v = member(doc, "M");
  const auto& completed_v = member(doc, "completed");
  if (!dim_v.IsUint64() || dim_v.GetUint64() == 0) bad_bundle("dim must be a positive integer");
  if (!m_v.IsUint64()) bad_bundle("M must be a nonnegative integer");
  if (!completed_v.IsBool()) bad_bundle("completed must be a boolean");
  const auto dim = static_cast<std::size_t>(dim_v.GetUint64());
  const auto m = static_cast<std::size_t>(m_v.GetUint64());
  const bool completed = completed_v.GetBool();

  auto set_a = read_labels(member(doc, "set_a"), "set_a");
  auto set_b = read_labels(member(doc, "set_b"), "set_b");
  if (set_a.size() != set_b.size()) bad_bundle("set_a and set_b differ in size");
  const auto n = set_a.size();

  const auto& coeffs_v = member(doc, "coefficients");
  if (!coeffs_v.IsArray() || coeffs_v.Size() != m) bad_bundle("coefficients must have M rows");
  CoefficientMatrix coeffs{ComplexMatrix(static_cast<Index>(m), static_cast<Index>(n))};
  for (rapidjson::SizeType k = 0; k < coeffs_v.Size(); ++k) {
    const auto& row = coeffs_v[k];
    if (!row.IsArray() || row.Size() != n) bad_bundle("coefficient row length must equal N");
    for (rapidjson::SizeType i = 0; i < row.Size(); ++i) {
      coeffs.entries(static_cast<Index>(k), static_cast<Index>(i)) = read_complex(row[i]);
    }
  }

  const auto& ops_v = member(doc, "operators");
  if (!ops_v.IsArray() || ops_v.Size() != m + (completed ? 1 : 0)) {
    bad_bundle("operator count must be M (+1 when completed)");
  }
  std::vector<ComplexMatrix> ops;
  for (const auto& op_v : ops_v.GetArray()) {
    if (!op_v.IsArray() || op_v.Size() != dim * dim) bad_bundle("operator must hold dim^2 entries");
    ComplexMatrix op(static_cast<Index>(dim), static_cast<Index>(dim));
    rapidjson::SizeType idx = 0;
    for (Index i = 0; i < op.rows(); ++i) {
      for (Index j = 0; j < op.cols(); ++j) op(i, j) = read_complex(op_v[idx++]);
    }
    ops.push_back(std::move(op));
  }
  return KrausSet(std::move(ops), std::move(set_a), std::move(set_b), std::move(coeffs), dim,
                  completed);
}

}  // namespace coamp
