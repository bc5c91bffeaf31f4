// channel.cpp
#include "coamp/channel.hpp"

#include <cmath>
#include <limits>

#include "coamp/error.hpp"
#include "coamp/serialize.hpp"

namespace coamp {

namespace {

void require_prior(double prior) {
  if (!(prior >= 0.0 && prior <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "prior must lie in [0, 1]");
  }
}

double evolved_distance(const CoherentLabel& a, const CoherentLabel& b, const LossChannel& ch,
                        double t) {
  return distance(loss_evolve(a, ch, t), loss_evolve(b, ch, t));
}

}  // namespace

LossChannel::LossChannel(double g) : gamma(g) {
  if (!(g >= 0.0) || !std::isfinite(g)) {
    fail(ErrorCode::InvalidArgument, "loss rate gamma must be finite and >= 0");
  }
}

double LossChannel::transmissivity(double t) const { return std::exp(-gamma * t); }

CoherentLabel loss_evolve(const CoherentLabel& label, const LossChannel& ch, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    fail(ErrorCode::InvalidArgument, "evolution time must be finite and >= 0");
  }
  return CoherentLabel(label.amplitude() * std::exp(-0.5 * ch.gamma * t), label.phase());
}

std::vector<DecayReport> distance_trajectory(const CoherentLabel& a, const CoherentLabel& b,
                                             const LossChannel& ch,
                                             const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i])) {
      fail(ErrorCode::InvalidArgument, "trajectory times must be finite and >= 0");
    }
    if (i > 0 && times[i] < times[i - 1]) {
      fail(ErrorCode::InvalidArgument, "trajectory times must be sorted ascending");
    }
  }
  const double d0 = distance(a, b);
  const double h = 1e-4 / std::max(1.0, ch.gamma);
  std::vector<DecayReport> out;
  out.reserve(times.size());
  for (double t : times) {
    DecayReport r;
    r.time = t;
    r.distance = ch.transmissivity(t) * d0;
    r.analytic_rate = -ch.gamma * r.distance;
    r.rate = r.analytic_rate;
    auto f = [&](double s) { return evolved_distance(a, b, ch, s); };
    if (t >= h) {
      r.fd_rate = (f(t + h) - f(t - h)) / (2.0 * h);
    } else {
      r.fd_rate = (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h);
    }
    out.push_back(r);
  }
  return out;
}

AmplifiedComparison compare_amplified(const CoherentLabel& a, const CoherentLabel& b,
                                      double g1, double g2, const LossChannel& ch, double t) {
  const AmplifierInstance inst(a, b, g1, g2);
  AmplifiedComparison c;
  c.t = t;
  c.amplification_feasible = exact_feasible(inst).feasible();
  c.d_plain = evolved_distance(a, b, ch, t);
  c.d_amp = evolved_distance(a.scaled(g1), b.scaled(g2), ch, t);
  c.ratio = c.d_plain > 0.0 ? c.d_amp / c.d_plain : std::numeric_limits<double>::quiet_NaN();
  c.sigma_plain = -ch.gamma * c.d_plain;
  c.sigma_amp = -ch.gamma * c.d_amp;
  return c;
}

std::string comparison_csv_header() { return "t,d_plain,d_amp,ratio,sigma_plain,sigma_amp"; }

std::string to_csv_line(const AmplifiedComparison& row) {
  std::string out;
  bool first = true;
  for (double v : {row.t, row.d_plain, row.d_amp, row.ratio, row.sigma_plain, row.sigma_amp}) {
    if (!first) out += ',';
    first = false;
    out += format_double(v);
  }
  return out;
}

double helstrom_error(const CoherentLabel& a, const CoherentLabel& b, double prior_a) {
  require_prior(prior_a);
  const double o2 = std::norm(overlap(a, b));
  const double disc = std::max(0.0, 1.0 - 4.0 * prior_a * (1.0 - prior_a) * o2);
  return 0.5 * (1.0 - std::sqrt(disc));
}

DetectorModel::DetectorModel(double dark, double eff) : dark_prob(dark), efficiency(eff) {
  if (!(dark >= 0.0 && dark < 1.0)) {
    fail(ErrorCode::InvalidArgument, "dark-count probability must lie in [0, 1)");
  }
  if (!(eff > 0.0 && eff <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "detector efficiency must lie in (0, 1]");
  }
}

double DetectorModel::click_probability(const CoherentLabel& label) const {
  const double mean = efficiency * label.amplitude() * label.amplitude();
  return 1.0 - (1.0 - dark_prob) * std::exp(-mean);
}

DetectorResult click_discrimination_error(const CoherentLabel& a, const CoherentLabel& b,
                                          const DetectorModel& det, double prior_a) {
  require_prior(prior_a);
  const double qa = det.click_probability(a);
  const double qb = det.click_probability(b);
  const double wa_click = prior_a * qa;
  const double wb_click = (1.0 - prior_a) * qb;
  const double wa_none = prior_a * (1.0 - qa);
  const double wb_none = (1.0 - prior_a) * (1.0 - qb);

  DetectorResult r;
  r.p_err = std::min(wa_click, wb_click) + std::min(wa_none, wb_none);
  r.threshold_rule = std::string("click->") + (wa_click >= wb_click ? "a" : "b") +
                     ";no-click->" + (wa_none >= wb_none ? "a" : "b");
  return r;
}

}  // namespace coamp
