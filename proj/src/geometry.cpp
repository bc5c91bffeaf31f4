// geometry.cpp
#include "coamp/geometry.hpp"

#include <cmath>
#include <numbers>

#include <rapidjson/document.h>

#include "coamp/error.hpp"
#include "coamp/serialize.hpp"

namespace coamp {

Complex overlap(const CoherentLabel& a, const CoherentLabel& b) {
  const Complex za = a.value();
  const Complex zb = b.value();
  return std::exp(-0.5 * (std::norm(za) + std::norm(zb)) + std::conj(za) * zb);
}

double distance(const CoherentLabel& a, const CoherentLabel& b) {
  return std::norm(a.value() - b.value());
}

GramMatrix::GramMatrix(std::vector<CoherentLabel> labels)
    : labels_(std::move(labels)) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (n == 0) fail(ErrorCode::InvalidArgument, "gram: need at least one label");
  entries_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    entries_(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      entries_(i, j) = overlap(labels_[i], labels_[j]);
      entries_(j, i) = std::conj(entries_(i, j));
    }
  }
}

GramMatrix GramMatrix::from_entries(ComplexMatrix entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    fail(ErrorCode::DimensionMismatch, "gram matrix must be square and non-empty");
  }
  GramMatrix g;
  g.entries_ = std::move(entries);
  return g;
}

GramMatrix gram(std::span<const CoherentLabel> labels) {
  return GramMatrix(std::vector<CoherentLabel>(labels.begin(), labels.end()));
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::DimensionMismatch, "max_abs_diff: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

PsdVerdict psd_check(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) {
    fail(ErrorCode::DimensionMismatch, "psd_check: matrix is not square");
  }
  if (m.size() == 0) return {true, 0.0, tol, 1.0};
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  const double magnitude = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (asym > 1e-12 * magnitude) {
    fail(ErrorCode::InvalidArgument, "psd_check: matrix is not Hermitian");
  }
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::NumericFailure, "psd_check: eigendecomposition failed");
  }
  const auto& ev = solver.eigenvalues();
  PsdVerdict v;
  v.min_eigenvalue = ev.minCoeff();
  v.scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  v.tolerance_used = tol * v.scale;
  v.is_psd = v.min_eigenvalue >= -v.tolerance_used;
  return v;
}

// ---------------------------------------------------------------------------
// Wigner grids

namespace {

void validate_window(const WignerWindow& w) {
  const bool finite = std::isfinite(w.x_min) && std::isfinite(w.x_max) &&
                      std::isfinite(w.p_min) && std::isfinite(w.p_max);
  if (!finite || !(w.x_max > w.x_min) || !(w.p_max > w.p_min)) {
    fail(ErrorCode::InvalidArgument, "wigner window is degenerate");
  }
}

double axis_at(double lo, double hi, std::size_t resolution, std::size_t i) {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);
}

}  // namespace

WignerGrid::WignerGrid(WignerWindow window, std::size_t resolution,
                       Eigen::MatrixXd values)
    : window_(window), resolution_(resolution), values_(std::move(values)) {
  validate_window(window_);
  if (resolution_ < 2) fail(ErrorCode::InvalidArgument, "wigner resolution must be >= 2");
  const auto r = static_cast<Eigen::Index>(resolution_);
  if (values_.rows() != r || values_.cols() != r) {
    fail(ErrorCode::DimensionMismatch, "wigner values do not match resolution");
  }
}

double WignerGrid::x_at(std::size_t i) const {
  return axis_at(window_.x_min, window_.x_max, resolution_, i);
}

double WignerGrid::p_at(std::size_t j) const {
  return axis_at(window_.p_min, window_.p_max, resolution_, j);
}

double WignerGrid::integral() const {
  const double hx = (window_.x_max - window_.x_min) / static_cast<double>(resolution_ - 1);
  const double hp = (window_.p_max - window_.p_min) / static_cast<double>(resolution_ - 1);
  const auto last = static_cast<Eigen::Index>(resolution_ - 1);
  double sum = 0.0;
  for (Eigen::Index i = 0; i <= last; ++i) {
    const double wi = (i == 0 || i == last) ? 0.5 : 1.0;
    for (Eigen::Index j = 0; j <= last; ++j) {
      const double wj = (j == 0 || j == last) ? 0.5 : 1.0;
      sum += wi * wj * values_(i, j);
    }
  }
  return sum * hx * hp;
}

std::string WignerGrid::to_csv() const {
  std::string out = "x,p,w\n";
  for (std::size_t i = 0; i < resolution_; ++i) {
    const std::string x = format_double(x_at(i));
    for (std::size_t j = 0; j < resolution_; ++j) {
      out += x;
      out += ',';
      out += format_double(p_at(j));
      out += ',';
      out += format_double(values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out += '\n';
    }
  }
  return out;
}

std::string WignerGrid::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.field("schema_version", 1);
  w.key("window").begin_object();
  w.field("x_min", window_.x_min).field("x_max", window_.x_max);
  w.field("p_min", window_.p_min).field("p_max", window_.p_max);
  w.end_object();
  w.field("resolution", resolution_);
  w.key("values").begin_array();
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) w.value(values_(i, j));
  }
  w.end_array();
  w.end_object();
  return w.str();
}

WignerGrid WignerGrid::from_json(const std::string& text) {
  rapidjson::Document doc;
  doc.Parse<rapidjson::kParseFullPrecisionFlag>(text.c_str(), text.size());
  auto bad = [](const char* why) {
    fail(ErrorCode::InvalidArgument, std::string("wigner json: ") + why);
  };
  if (doc.HasParseError() || !doc.IsObject()) bad("not a JSON object");
  if (!doc.HasMember("schema_version") || !doc["schema_version"].IsInt() ||
      doc["schema_version"].GetInt() != 1) {
    bad("unsupported schema_version");
  }
  if (!doc.HasMember("window") || !doc["window"].IsObject()) bad("missing window");
  const auto& win = doc["window"];
  WignerWindow window;
  for (auto [name, slot] : {std::pair{"x_min", &window.x_min}, std::pair{"x_max", &window.x_max},
                            std::pair{"p_min", &window.p_min}, std::pair{"p_max", &window.p_max}}) {
    if (!win.HasMember(name) || !win[name].IsNumber()) bad("window bound missing");
    *slot = win[name].GetDouble();
  }
  if (!doc.HasMember("resolution") || !doc["resolution"].IsUint64()) bad("missing resolution");
  const auto resolution = static_cast<std::size_t>(doc["resolution"].GetUint64());
  if (!doc.HasMember("values") || !doc["values"].IsArray()) bad("missing values");
  const auto& arr = doc["values"];
  if (resolution < 2 || arr.Size() != resolution * resolution) bad("values length mismatch");
  const auto r = static_cast<Eigen::Index>(resolution);
  Eigen::MatrixXd values(r, r);
  rapidjson::SizeType k = 0;
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j, ++k) {
      if (!arr[k].IsNumber()) bad("non-numeric value");
      const double v = arr[k].GetDouble();
      if (!(v >= 0.0) || !std::isfinite(v)) bad("coherent-state Wigner values must be >= 0");
      values(i, j) = v;
    }
  }
  return WignerGrid(window, resolution, std::move(values));
}

double wigner_value(const CoherentLabel& label, double x, double p) {
  const Complex z = label.value();
  const double dx = x - std::numbers::sqrt2 * z.real();
  const double dp = p - std::numbers::sqrt2 * z.imag();
  return std::numbers::inv_pi * std::exp(-dx * dx - dp * dp);
}

WignerGrid wigner_grid(const CoherentLabel& label, const WignerWindow& window,
                       std::size_t resolution) {
  validate_window(window);
  if (resolution < 2) fail(ErrorCode::InvalidArgument, "wigner resolution must be >= 2");
  const auto r = static_cast<Eigen::Index>(resolution);
  Eigen::MatrixXd values(r, r);
  for (std::size_t i = 0; i < resolution; ++i) {
    const double x = axis_at(window.x_min, window.x_max, resolution, i);
    for (std::size_t j = 0; j < resolution; ++j) {
      const double p = axis_at(window.p_min, window.p_max, resolution, j);
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          wigner_value(label, x, p);
    }
  }
  return WignerGrid(window, resolution, std::move(values));
}

WignerWindow wigner_window_around(const CoherentLabel& label, double sigmas) {
  // W is Gaussian with variance 1/2 along each quadrature.
  const double half = sigmas * std::numbers::sqrt2 / 2.0;
  const Complex z = label.value();
  const double cx = std::numbers::sqrt2 * z.real();
  const double cp = std::numbers::sqrt2 * z.imag();
  return {cx - half, cx + half, cp - half, cp + half};
}

}  // namespace coamp
