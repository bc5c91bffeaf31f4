// channel.hpp - coherent states sent through a pure-loss channel, and
// discrimination of two coherent states with ideal and on/off receivers.
#pragma once

#include <string>
#include <vector>

#include "coamp/amplifier.hpp"

namespace coamp {

/// Pure loss with transmissivity exp(-gamma t). Coherent states stay
/// coherent: the amplitude shrinks by exp(-gamma t / 2).
struct LossChannel {
  double gamma = 0.0;

  LossChannel() = default;
  explicit LossChannel(double gamma);
  double transmissivity(double t) const;
};

CoherentLabel loss_evolve(const CoherentLabel& label, const LossChannel& ch, double t);

struct DecayReport {
  double time = 0.0;
  double distance = 0.0;       // D(t)
  double rate = 0.0;           // sigma(t) = dD/dt, the analytic value
  double analytic_rate = 0.0;  // -gamma D(t)
  double fd_rate = 0.0;        // finite difference of the evolved distance
};

/// `times` must be nonnegative and sorted ascending.
std::vector<DecayReport> distance_trajectory(const CoherentLabel& a, const CoherentLabel& b,
                                             const LossChannel& ch,
                                             const std::vector<double>& times);

struct AmplifiedComparison {
  double t = 0.0;
  double d_plain = 0.0;
  double d_amp = 0.0;
  double ratio = 0.0;          // d_amp / d_plain; NaN when d_plain = 0
  double sigma_plain = 0.0;
  double sigma_amp = 0.0;
  bool amplification_feasible = false;  // deterministic feasibility of (g1, g2)
};

/// The pair (a, b) against (g1 a, g2 b), both sent through `ch` for time t.
/// Infeasible gains are still evaluated; the flag reports them.
AmplifiedComparison compare_amplified(const CoherentLabel& a, const CoherentLabel& b,
                                      double g1, double g2, const LossChannel& ch, double t);

std::string comparison_csv_header();
std::string to_csv_line(const AmplifiedComparison& row);

/// Minimum error probability for discriminating two pure states.
double helstrom_error(const CoherentLabel& a, const CoherentLabel& b, double prior_a);

/// Gated on/off photodetector: clicks with probability
/// 1 - (1 - dark_prob) exp(-efficiency |alpha|^2).
struct DetectorModel {
  double dark_prob = 0.0;
  double efficiency = 1.0;

  DetectorModel() = default;
  DetectorModel(double dark_prob, double efficiency);
  double click_probability(const CoherentLabel& label) const;
};

struct DetectorResult {
  double p_err = 0.0;
  std::string threshold_rule;  // e.g. "click->b;no-click->a"
};

/// Decides each outcome for the hypothesis with the larger posterior weight;
/// ties go to a.
DetectorResult click_discrimination_error(const CoherentLabel& a, const CoherentLabel& b,
                                          const DetectorModel& det, double prior_a);

}  // namespace coamp
