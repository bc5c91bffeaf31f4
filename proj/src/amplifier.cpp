// amplifier.cpp
#include "coamp/amplifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "coamp/error.hpp"
#include "coamp/serialize.hpp"

namespace coamp {

namespace {

void require_positive_gain(double g, const char* name) {
  if (!(g > 0.0) || !std::isfinite(g)) {
    fail(ErrorCode::InvalidArgument, std::string(name) + " must be finite and > 0");
  }
}

// 1 - cos(eta) without cancellation for small eta.
double one_minus_cos(double eta) {
  const double s = std::sin(0.5 * eta);
  return 2.0 * s * s;
}

}  // namespace

double fold_relative_phase(double eta) {
  const double r = normalize_phase(std::abs(eta));
  return r > std::numbers::pi ? 2.0 * std::numbers::pi - r : r;
}

AmplifierInstance::AmplifierInstance(CoherentLabel s1, CoherentLabel s2, double g1,
                                     double g2)
    : state1(s1), state2(s2), gain1(g1), gain2(g2) {
  require_positive_gain(g1, "gain1");
  require_positive_gain(g2, "gain2");
}

double AmplifierInstance::eta() const {
  return fold_relative_phase(state1.phase() - state2.phase());
}

FeasibilityReport exact_feasible(const AmplifierInstance& inst) {
  require_positive_gain(inst.gain1, "gain1");
  require_positive_gain(inst.gain2, "gain2");
  const double a1 = inst.state1.amplitude();
  const double a2 = inst.state2.amplitude();
  const double g1 = inst.gain1;
  const double g2 = inst.gain2;
  const double lhs = 2.0 * a1 * a2 * (g1 * g2 - 1.0) * std::cos(inst.eta());
  const double rhs = (g1 * g1 - 1.0) * a1 * a1 + (g2 * g2 - 1.0) * a2 * a2;

  FeasibilityReport report;
  report.binding = Binding::AnalyticBoundary;
  report.margin = (lhs - rhs) + 0.0;  // no negative zero
  report.verdict = report.margin >= 0.0 ? Verdict::Feasible : Verdict::Infeasible;
  return report;
}

double envelope_bound(double g1, double g2) {
  if (!(g1 >= 1.0) || !(g2 >= 1.0)) {
    fail(ErrorCode::InvalidArgument,
         "theorem1_envelope is only defined for gains >= 1; use exact_feasible");
  }
  if (g1 == 1.0 && g2 == 1.0) return 0.0;
  return std::sqrt((g1 * g1 - 1.0) * (g2 * g2 - 1.0)) / (g1 * g2 - 1.0);
}

bool theorem1_envelope(double eta, double g1, double g2) {
  const double bound = envelope_bound(g1, g2);
  if (g1 == 1.0 && g2 == 1.0) return true;
  return std::cos(fold_relative_phase(eta)) >= bound;
}

double equality_locus(double g1, double g2) {
  if (!(g1 > 1.0) || !(g2 > 1.0)) {
    fail(ErrorCode::InvalidArgument, "equality_locus needs both gains > 1");
  }
  return std::sqrt(g2 * g2 - 1.0) / std::sqrt(g1 * g1 - 1.0);
}

CorollaryResult corollary1_feasible(double a1, double a2, double eta, double g1) {
  if (!(a2 > 0.0)) fail(ErrorCode::InvalidArgument, "corollary1_feasible: alpha2 must be > 0");
  require_positive_gain(g1, "gain1");
  CorollaryResult out;
  out.implied_gain2 = g1 * a1 / a2;
  if (!(out.implied_gain2 > 0.0)) {
    fail(ErrorCode::InvalidArgument, "corollary1_feasible: alpha1 must be > 0");
  }
  const AmplifierInstance inst(CoherentLabel(a1, 0.0), CoherentLabel(a2, eta), g1,
                               out.implied_gain2);
  out.report = exact_feasible(inst);
  return out;
}

MaxGain max_gain(const CoherentLabel& a1, const CoherentLabel& a2) {
  const double x1 = a1.amplitude();
  const double x2 = a2.amplitude();
  if (!(x1 > 0.0) || !(x2 > 0.0)) {
    fail(ErrorCode::InvalidArgument, "max_gain needs both amplitudes > 0");
  }
  const double eta = fold_relative_phase(a1.phase() - a2.phase());
  const double denom = 2.0 * x1 * x1 * one_minus_cos(eta);
  MaxGain out;
  if (denom == 0.0) {
    out.unbounded = true;
    out.gain1 = out.gain2 = std::numeric_limits<double>::infinity();
    return out;
  }
  const double numer = x1 * x1 + x2 * x2 - 2.0 * x1 * x2 * std::cos(eta);
  out.gain1 = std::sqrt(numer / denom);
  out.gain2 = out.gain1 * x1 / x2;
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

std::optional<SweepAxis> parse_sweep_axis(const std::string& name) {
  if (name == "alpha1") return SweepAxis::Alpha1;
  if (name == "alpha2") return SweepAxis::Alpha2;
  if (name == "eta") return SweepAxis::Eta;
  if (name == "g1") return SweepAxis::Gain1;
  if (name == "g2") return SweepAxis::Gain2;
  return std::nullopt;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Alpha1: return "alpha1";
    case SweepAxis::Alpha2: return "alpha2";
    case SweepAxis::Eta: return "eta";
    case SweepAxis::Gain1: return "g1";
    case SweepAxis::Gain2: return "g2";
  }
  return "?";
}

double AxisRange::at(std::size_t i) const {
  if (steps <= 1) return min;
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

SweepSpec::SweepSpec() {
  set_fixed(SweepAxis::Alpha1, 1.0);
  set_fixed(SweepAxis::Alpha2, 1.0);
  set_fixed(SweepAxis::Eta, 0.0);
  set_fixed(SweepAxis::Gain1, 1.0);
  set_fixed(SweepAxis::Gain2, 1.0);
}

void SweepSpec::set_fixed(SweepAxis a, double value) {
  axes[static_cast<std::size_t>(a)] = {value, value, 1};
}

void SweepSpec::set_range(SweepAxis a, AxisRange range) {
  axes[static_cast<std::size_t>(a)] = range;
}

std::size_t SweepSpec::point_count() const {
  std::size_t total = 1;
  for (const auto& r : axes) {
    if (r.steps != 0 && total > kMaxSweepPoints / r.steps) return kMaxSweepPoints + 1;
    total *= r.steps;
  }
  return total;
}

void SweepSpec::validate() const {
  for (std::size_t i = 0; i < kSweepAxisCount; ++i) {
    const auto& r = axes[i];
    const std::string name = to_string(static_cast<SweepAxis>(i));
    if (r.steps < 1) fail(ErrorCode::InvalidArgument, "sweep axis " + name + ": steps must be >= 1");
    if (!std::isfinite(r.min) || !std::isfinite(r.max) || r.min > r.max) {
      fail(ErrorCode::InvalidArgument, "sweep axis " + name + ": need finite min <= max");
    }
  }
  for (auto a : {SweepAxis::Alpha1, SweepAxis::Alpha2}) {
    if (axis(a).min < 0.0) fail(ErrorCode::InvalidArgument, "sweep amplitudes must be >= 0");
  }
  for (auto a : {SweepAxis::Gain1, SweepAxis::Gain2}) {
    if (!(axis(a).min > 0.0)) fail(ErrorCode::InvalidArgument, "sweep gains must be > 0");
  }
  if (point_count() > kMaxSweepPoints) {
    fail(ErrorCode::InvalidArgument, "sweep grid exceeds 1e8 points");
  }
}

namespace {

SweepRow evaluate_point(const SweepSpec& spec, std::size_t flat) {
  std::array<double, kSweepAxisCount> v{};
  for (std::size_t k = kSweepAxisCount; k-- > 0;) {
    const auto& r = spec.axes[k];
    v[k] = r.at(flat % r.steps);
    flat /= r.steps;
  }
  SweepRow row{v[0], v[1], v[2], v[3], v[4], false, 0.0, std::nullopt};
  const CoherentLabel s1(row.alpha1, 0.0);
  const CoherentLabel s2(row.alpha2, row.eta);
  const auto report = exact_feasible(AmplifierInstance(s1, s2, row.g1, row.g2));
  row.feasible = report.feasible();
  row.margin = report.margin;
  if (row.alpha1 > 0.0 && row.alpha2 > 0.0) {
    const MaxGain mg = max_gain(s1, s2);
    if (!mg.unbounded) row.g1max = mg.gain1;
  }
  return row;
}

}  // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec, unsigned threads) {
  spec.validate();
  const std::size_t total = spec.point_count();
  std::vector<SweepRow> rows(total);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, total / 1024)));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) rows[i] = evaluate_point(spec, i);
  };
  if (threads <= 1) {
    work(0, total);
    return rows;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (total + threads - 1) / threads;
  for (std::size_t begin = 0; begin < total; begin += chunk) {
    pool.emplace_back(work, begin, std::min(total, begin + chunk));
  }
  pool.clear();
  return rows;
}

std::string sweep_csv_header() { return "alpha1,alpha2,eta,g1,g2,feasible,margin,g1max"; }

std::string to_csv_line(const SweepRow& row) {
  std::string out;
  for (double v : {row.alpha1, row.alpha2, row.eta, row.g1, row.g2}) {
    out += format_double(v);
    out += ',';
  }
  out += row.feasible ? "1," : "0,";
  out += format_double(row.margin);
  out += ',';
  if (row.g1max) out += format_double(*row.g1max);
  return out;
}

}  // namespace coamp
