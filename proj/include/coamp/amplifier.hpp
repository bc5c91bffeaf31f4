// amplifier.hpp - closed-form conditions for deterministic noiseless
// amplification of two coherent states, and parameter sweeps over them.
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "coamp/transform.hpp"

namespace coamp {

/// |a1 e^{i t1}> -> |g1 a1 e^{i t1}>,  |a2 e^{i t2}> -> |g2 a2 e^{i t2}>.
/// Gains below 1 (attenuation) are allowed.
struct AmplifierInstance {
  CoherentLabel state1;
  CoherentLabel state2;
  double gain1 = 1.0;
  double gain2 = 1.0;

  AmplifierInstance() = default;
  AmplifierInstance(CoherentLabel s1, CoherentLabel s2, double g1, double g2);

  /// Relative phase |t1 - t2| folded into [0, pi].
  double eta() const;

  std::array<CoherentLabel, 2> inputs() const { return {state1, state2}; }
  std::array<CoherentLabel, 2> outputs() const {
    return {state1.scaled(gain1), state2.scaled(gain2)};
  }
};

/// Folds any angle into [0, pi] as a relative phase.
double fold_relative_phase(double eta);

/// Exact two-state criterion, the distance inequality
///   2 a1 a2 (g1 g2 - 1) cos(eta) >= (g1^2 - 1) a1^2 + (g2^2 - 1) a2^2.
/// margin = LHS - RHS, binding = AnalyticBoundary.
FeasibilityReport exact_feasible(const AmplifierInstance& inst);

/// Right-hand side of the gain-only envelope
///   cos(eta) >= sqrt((g1^2 - 1)(g2^2 - 1)) / (g1 g2 - 1),
/// 0 when both gains are 1. Gains below 1 are a domain error.
double envelope_bound(double g1, double g2);

/// Evaluates the gain-only envelope. It is necessary for exact_feasible at
/// any amplitudes but not sufficient: it is tight only on equality_locus().
bool theorem1_envelope(double eta, double g1, double g2);

/// Amplitude ratio a1/a2 = sqrt(g2^2 - 1)/sqrt(g1^2 - 1) on which the
/// envelope is exact. Both gains must exceed 1.
double equality_locus(double g1, double g2);

struct CorollaryResult {
  FeasibilityReport report;
  double implied_gain2 = 0.0;
};

/// Equal-output-amplitude case g1 a1 = g2 a2: completes the instance with
/// g2 = g1 a1 / a2 and decides it with exact_feasible.
CorollaryResult corollary1_feasible(double a1, double a2, double eta, double g1);

struct MaxGain {
  bool unbounded = false;  // eta = 0: collinear states, no finite maximum
  double gain1 = 0.0;
  double gain2 = 0.0;      // companion gain g1max * a1 / a2
};

/// Largest g1 with g1 a1 = g2 a2 that is still deterministically feasible:
///   g1max = sqrt((a1^2 + a2^2 - 2 a1 a2 cos eta) / (2 a1^2 (1 - cos eta))).
MaxGain max_gain(const CoherentLabel& a1, const CoherentLabel& a2);

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { Alpha1 = 0, Alpha2, Eta, Gain1, Gain2 };
inline constexpr std::size_t kSweepAxisCount = 5;

std::optional<SweepAxis> parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

struct AxisRange {
  double min = 0.0;
  double max = 0.0;
  std::size_t steps = 1;

  double at(std::size_t i) const;
};

/// Each axis is either swept over a range or held fixed (a 1-step range).
struct SweepSpec {
  std::array<AxisRange, kSweepAxisCount> axes{};

  SweepSpec();
  void set_fixed(SweepAxis axis, double value);
  void set_range(SweepAxis axis, AxisRange range);
  const AxisRange& axis(SweepAxis a) const { return axes[static_cast<std::size_t>(a)]; }
  std::size_t point_count() const;
  void validate() const;
};

struct SweepRow {
  double alpha1, alpha2, eta, g1, g2;
  bool feasible;
  double margin;
  std::optional<double> g1max;
};

inline constexpr std::size_t kMaxSweepPoints = 100'000'000;

/// Evaluates every grid point; rows come out in lexicographic axis order
/// (alpha1 slowest, g2 fastest) whatever `threads` is. threads = 0 picks
/// std::thread::hardware_concurrency().
std::vector<SweepRow> sweep(const SweepSpec& spec, unsigned threads = 1);

std::string sweep_csv_header();
std::string to_csv_line(const SweepRow& row);

}  // namespace coamp
