// capi.cpp - extern "C" wrappers: exceptions become status codes, C++
// objects live behind opaque handles.
#include "coamp/coamp.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "coamp/channel.hpp"
#include "coamp/error.hpp"
#include "coamp/kraus.hpp"

struct coamp_matrix {
  coamp::ComplexMatrix m;
};

struct coamp_kraus {
  coamp::KrausSet set;
  coamp::VerificationReport report;
};

struct coamp_wigner {
  coamp::WignerGrid grid;
};

struct coamp_sweep_spec {
  coamp::SweepSpec spec;
};

struct coamp_sweep_result {
  std::vector<coamp::SweepRow> rows;
};

struct coamp_trajectory {
  std::vector<coamp::AmplifiedComparison> rows;
  bool feasible;
};

namespace {

thread_local std::string g_last_error;

coamp_status to_status(coamp::ErrorCode code) {
  switch (code) {
    case coamp::ErrorCode::InvalidArgument: return COAMP_ERR_INVALID_ARGUMENT;
    case coamp::ErrorCode::DimensionMismatch: return COAMP_ERR_DIMENSION_MISMATCH;
    case coamp::ErrorCode::DimensionOverflow: return COAMP_ERR_DIMENSION_OVERFLOW;
    case coamp::ErrorCode::NotPsd: return COAMP_ERR_NOT_PSD;
    case coamp::ErrorCode::IllConditioned: return COAMP_ERR_ILL_CONDITIONED;
    case coamp::ErrorCode::Inconclusive: return COAMP_ERR_INCONCLUSIVE;
    case coamp::ErrorCode::NumericFailure: return COAMP_ERR_NUMERIC;
    case coamp::ErrorCode::Io: return COAMP_ERR_IO;
  }
  return COAMP_ERR_INTERNAL;
}

template <class F>
coamp_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return COAMP_OK;
  } catch (const coamp::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return COAMP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return COAMP_ERR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) coamp::fail(coamp::ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

coamp::CoherentLabel label_of(coamp_label l) { return coamp::CoherentLabel(l.amplitude, l.phase); }

coamp_label to_c(const coamp::CoherentLabel& l) { return {l.amplitude(), l.phase()}; }

std::vector<coamp::CoherentLabel> labels_of(const coamp_label* p, std::size_t n) {
  if (n == 0) coamp::fail(coamp::ErrorCode::InvalidArgument, "label list is empty");
  require(p, "labels");
  std::vector<coamp::CoherentLabel> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(label_of(p[i]));
  return out;
}

coamp_report to_c(const coamp::FeasibilityReport& r) {
  coamp_report out{};
  out.verdict = static_cast<coamp_verdict>(static_cast<int>(r.verdict));
  out.margin = r.margin;
  out.binding = static_cast<coamp_binding>(static_cast<int>(r.binding));
  out.iterations = r.iterations;
  return out;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

coamp::SweepAxis axis_of(const char* name) {
  require(name, "axis");
  const auto axis = coamp::parse_sweep_axis(name);
  if (!axis) {
    coamp::fail(coamp::ErrorCode::InvalidArgument,
                std::string("unknown sweep axis '") + name + "' (alpha1, alpha2, eta, g1, g2)");
  }
  return *axis;
}

coamp_kraus* wrap(coamp::KrausSet ks) {
  auto report = coamp::verify_action(ks);
  return new coamp_kraus{std::move(ks), std::move(report)};
}

}  // namespace

extern "C" {

const char* coamp_version(void) { return "1.0.0"; }

const char* coamp_last_error(void) { return g_last_error.c_str(); }

const char* coamp_status_name(coamp_status status) {
  switch (status) {
    case COAMP_OK: return "ok";
    case COAMP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case COAMP_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case COAMP_ERR_DIMENSION_OVERFLOW: return "dimension_overflow";
    case COAMP_ERR_NOT_PSD: return "not_psd";
    case COAMP_ERR_ILL_CONDITIONED: return "ill_conditioned";
    case COAMP_ERR_INCONCLUSIVE: return "inconclusive";
    case COAMP_ERR_NUMERIC: return "numeric_failure";
    case COAMP_ERR_IO: return "io_failure";
    case COAMP_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* coamp_verdict_name(coamp_verdict verdict) {
  if (verdict < COAMP_FEASIBLE || verdict > COAMP_INCONCLUSIVE) return "unknown";
  return coamp::to_string(static_cast<coamp::Verdict>(verdict)).data();
}

const char* coamp_binding_name(coamp_binding binding) {
  if (binding < COAMP_BINDING_PI_POSITIVITY || binding > COAMP_BINDING_ANALYTIC_BOUNDARY) {
    return "unknown";
  }
  return coamp::to_string(static_cast<coamp::Binding>(binding)).data();
}

void coamp_string_free(char* s) { std::free(s); }

coamp_status coamp_label_normalize(coamp_label in, coamp_label* out) {
  return guarded([&] {
    require(out, "out");
    *out = to_c(label_of(in));
  });
}

coamp_status coamp_overlap(coamp_label a, coamp_label b, double* re, double* im) {
  return guarded([&] {
    require(re, "re");
    require(im, "im");
    const auto z = coamp::overlap(label_of(a), label_of(b));
    *re = z.real();
    *im = z.imag();
  });
}

coamp_status coamp_distance(coamp_label a, coamp_label b, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = coamp::distance(label_of(a), label_of(b));
  });
}

coamp_status coamp_truncation_cutoff(const coamp_label* labels, size_t n, double tail_epsilon,
                                     size_t* cutoff) {
  return guarded([&] {
    require(cutoff, "cutoff");
    coamp::TruncationConfig cfg;
    cfg.tail_epsilon = tail_epsilon;
    *cutoff = coamp::truncation_dim(labels_of(labels, n), cfg);
  });
}

size_t coamp_matrix_rows(const coamp_matrix* m) {
  return m ? static_cast<size_t>(m->m.rows()) : 0;
}

size_t coamp_matrix_cols(const coamp_matrix* m) {
  return m ? static_cast<size_t>(m->m.cols()) : 0;
}

coamp_status coamp_matrix_get(const coamp_matrix* m, size_t i, size_t j, double* re, double* im) {
  return guarded([&] {
    require(m, "matrix");
    require(re, "re");
    require(im, "im");
    if (i >= coamp_matrix_rows(m) || j >= coamp_matrix_cols(m)) {
      coamp::fail(coamp::ErrorCode::InvalidArgument, "matrix index out of range");
    }
    const auto z = m->m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    *re = z.real();
    *im = z.imag();
  });
}

void coamp_matrix_free(coamp_matrix* m) { delete m; }

coamp_status coamp_gram(const coamp_label* labels, size_t n, coamp_matrix** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = new coamp_matrix{coamp::gram(labels_of(labels, n)).entries()};
  });
}

coamp_status coamp_exact_feasible(coamp_label a1, coamp_label a2, double g1, double g2,
                                  coamp_report* out) {
  return guarded([&] {
    require(out, "out");
    *out = to_c(coamp::exact_feasible(
        coamp::AmplifierInstance(label_of(a1), label_of(a2), g1, g2)));
  });
}

coamp_status coamp_fold_phase(double eta, double* out) {
  return guarded([&] {
    require(out, "out");
    if (!std::isfinite(eta)) coamp::fail(coamp::ErrorCode::InvalidArgument, "eta must be finite");
    *out = coamp::fold_relative_phase(eta);
  });
}

coamp_status coamp_envelope(double eta, double g1, double g2, int* passes, double* bound) {
  return guarded([&] {
    const double b = coamp::envelope_bound(g1, g2);
    const bool ok = coamp::theorem1_envelope(eta, g1, g2);
    if (passes) *passes = ok ? 1 : 0;
    if (bound) *bound = b;
  });
}

coamp_status coamp_equality_locus(double g1, double g2, double* ratio) {
  return guarded([&] {
    require(ratio, "ratio");
    *ratio = coamp::equality_locus(g1, g2);
  });
}

coamp_status coamp_corollary(double a1, double a2, double eta, double g1, coamp_report* out,
                             double* implied_g2) {
  return guarded([&] {
    require(out, "out");
    const auto r = coamp::corollary1_feasible(a1, a2, eta, g1);
    *out = to_c(r.report);
    if (implied_g2) *implied_g2 = r.implied_gain2;
  });
}

coamp_status coamp_max_gain(coamp_label a1, coamp_label a2, int* unbounded, double* g1max,
                            double* g2max) {
  return guarded([&] {
    require(unbounded, "unbounded");
    const auto mg = coamp::max_gain(label_of(a1), label_of(a2));
    *unbounded = mg.unbounded ? 1 : 0;
    if (g1max) *g1max = mg.gain1;
    if (g2max) *g2max = mg.gain2;
  });
}

coamp_status coamp_pi_deterministic(const coamp_label* a, const coamp_label* b, size_t n,
                                    double tol, coamp_matrix** pi_out, coamp_report* out) {
  return guarded([&] {
    require(out, "out");
    if (pi_out) *pi_out = nullptr;
    const coamp::GramMatrix ga(labels_of(a, n));
    const coamp::GramMatrix gb(labels_of(b, n));
    auto [pi, report] = coamp::pi_deterministic(ga, gb, tol);
    *out = to_c(report);
    if (pi_out) *pi_out = new coamp_matrix{pi.entries()};
  });
}

coamp_status coamp_dykstra(const coamp_label* a, const coamp_label* b, size_t n, const double* p,
                           int max_iters, double tol, coamp_report* out, coamp_matrix** witness) {
  return guarded([&] {
    require(out, "out");
    require(p, "p");
    if (witness) *witness = nullptr;
    const coamp::GramMatrix ga(labels_of(a, n));
    const coamp::GramMatrix gb(labels_of(b, n));
    const coamp::ProbabilityVector probs(Eigen::Map<const Eigen::VectorXd>(p, static_cast<Eigen::Index>(n)));
    const auto report = coamp::dykstra_feasibility(ga, gb, probs, max_iters, tol);
    *out = to_c(report);
    if (witness && report.witness) *witness = new coamp_matrix{report.witness->entries()};
  });
}

coamp_status coamp_max_uniform_success(const coamp_label* a, const coamp_label* b, size_t n,
                                       double tol, double* p) {
  return guarded([&] {
    require(p, "p");
    *p = coamp::max_uniform_success(coamp::GramMatrix(labels_of(a, n)),
                                    coamp::GramMatrix(labels_of(b, n)), tol);
  });
}

coamp_status coamp_kraus_build(const coamp_label* a, const coamp_label* b, size_t n,
                               const double* p, double tail_epsilon, int complete,
                               coamp_report* feasibility, coamp_kraus** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    std::optional<coamp::ProbabilityVector> probs;
    if (p) probs = coamp::ProbabilityVector(Eigen::Map<const Eigen::VectorXd>(p, static_cast<Eigen::Index>(n)));
    coamp::TruncationConfig cfg;
    cfg.tail_epsilon = tail_epsilon;
    auto build = coamp::build_transformation_kraus(labels_of(a, n), labels_of(b, n), probs, cfg,
                                                   complete != 0);
    if (feasibility) *feasibility = to_c(build.feasibility);
    if (build.kraus) {
      *out = new coamp_kraus{std::move(*build.kraus), std::move(*build.verification)};
    }
  });
}

coamp_status coamp_kraus_from_json(const char* json, coamp_kraus** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = nullptr;
    *out = wrap(coamp::kraus_from_json(json));
  });
}

coamp_status coamp_kraus_summary_get(const coamp_kraus* k, coamp_kraus_summary* out) {
  return guarded([&] {
    require(k, "kraus");
    require(out, "out");
    const auto& r = k->report;
    out->dim = k->set.dim();
    out->success_count = k->set.success_count();
    out->completed = k->set.completed() ? 1 : 0;
    out->max_action = r.max_action();
    out->max_eq14 = r.max_eq14();
    out->span_completeness = r.span_completeness;
    out->full_completeness = r.full_completeness;
    out->gram_transport = r.gram_transport;
    out->span_eig_min = r.span_eig_min;
    out->span_eig_max = r.span_eig_max;
  });
}

coamp_status coamp_kraus_operator(const coamp_kraus* k, size_t index, coamp_matrix** out) {
  return guarded([&] {
    require(k, "kraus");
    require(out, "out");
    *out = nullptr;
    if (index >= k->set.operators().size()) {
      coamp::fail(coamp::ErrorCode::InvalidArgument, "Kraus operator index out of range");
    }
    *out = new coamp_matrix{k->set.operators()[index]};
  });
}

coamp_status coamp_kraus_to_json(const coamp_kraus* k, char** out) {
  return guarded([&] {
    require(k, "kraus");
    require(out, "out");
    *out = dup_string(coamp::to_json(k->set, k->report));
  });
}

void coamp_kraus_free(coamp_kraus* k) { delete k; }

coamp_status coamp_wigner_value(coamp_label label, double x, double p, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = coamp::wigner_value(label_of(label), x, p);
  });
}

coamp_status coamp_wigner_grid(coamp_label label, const double* window, size_t resolution,
                               coamp_wigner** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const auto l = label_of(label);
    const coamp::WignerWindow win =
        window ? coamp::WignerWindow{window[0], window[1], window[2], window[3]}
               : coamp::wigner_window_around(l);
    *out = new coamp_wigner{coamp::wigner_grid(l, win, resolution)};
  });
}

coamp_status coamp_wigner_integral(const coamp_wigner* w, double* out) {
  return guarded([&] {
    require(w, "grid");
    require(out, "out");
    *out = w->grid.integral();
  });
}

coamp_status coamp_wigner_max(const coamp_wigner* w, double* out) {
  return guarded([&] {
    require(w, "grid");
    require(out, "out");
    *out = w->grid.values().maxCoeff();
  });
}

coamp_status coamp_wigner_to_csv(const coamp_wigner* w, char** out) {
  return guarded([&] {
    require(w, "grid");
    require(out, "out");
    *out = dup_string(w->grid.to_csv());
  });
}

coamp_status coamp_wigner_to_json(const coamp_wigner* w, char** out) {
  return guarded([&] {
    require(w, "grid");
    require(out, "out");
    *out = dup_string(w->grid.to_json());
  });
}

coamp_status coamp_wigner_from_json(const char* json, coamp_wigner** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = nullptr;
    *out = new coamp_wigner{coamp::WignerGrid::from_json(json)};
  });
}

void coamp_wigner_free(coamp_wigner* w) { delete w; }

coamp_status coamp_sweep_spec_new(coamp_sweep_spec** out) {
  return guarded([&] {
    require(out, "out");
    *out = new coamp_sweep_spec{};
  });
}

coamp_status coamp_sweep_spec_fix(coamp_sweep_spec* s, const char* axis, double value) {
  return guarded([&] {
    require(s, "spec");
    s->spec.set_fixed(axis_of(axis), value);
  });
}

coamp_status coamp_sweep_spec_range(coamp_sweep_spec* s, const char* axis, double min, double max,
                                    size_t steps) {
  return guarded([&] {
    require(s, "spec");
    s->spec.set_range(axis_of(axis), coamp::AxisRange{min, max, steps});
  });
}

coamp_status coamp_sweep_spec_points(const coamp_sweep_spec* s, size_t* out) {
  return guarded([&] {
    require(s, "spec");
    require(out, "out");
    *out = s->spec.point_count();
  });
}

void coamp_sweep_spec_free(coamp_sweep_spec* s) { delete s; }

coamp_status coamp_sweep_run(const coamp_sweep_spec* s, unsigned threads,
                             coamp_sweep_result** out) {
  return guarded([&] {
    require(s, "spec");
    require(out, "out");
    *out = nullptr;
    *out = new coamp_sweep_result{coamp::sweep(s->spec, threads)};
  });
}

size_t coamp_sweep_result_size(const coamp_sweep_result* r) { return r ? r->rows.size() : 0; }

coamp_status coamp_sweep_result_row(const coamp_sweep_result* r, size_t i, coamp_sweep_row* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    if (i >= r->rows.size()) coamp::fail(coamp::ErrorCode::DimensionMismatch, "row out of range");
    const auto& row = r->rows[i];
    *out = {row.alpha1, row.alpha2, row.eta,    row.g1,
            row.g2,     row.feasible ? 1 : 0,   row.margin,
            row.g1max ? 1 : 0, row.g1max.value_or(std::numeric_limits<double>::quiet_NaN())};
  });
}

coamp_status coamp_sweep_result_csv(const coamp_sweep_result* r, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    std::string text = coamp::sweep_csv_header() + "\n";
    for (const auto& row : r->rows) text += coamp::to_csv_line(row) + "\n";
    *out = dup_string(text);
  });
}

void coamp_sweep_result_free(coamp_sweep_result* r) { delete r; }

coamp_status coamp_loss_evolve(coamp_label label, double gamma, double t, coamp_label* out) {
  return guarded([&] {
    require(out, "out");
    *out = to_c(coamp::loss_evolve(label_of(label), coamp::LossChannel(gamma), t));
  });
}

coamp_status coamp_distance_trajectory(coamp_label a, coamp_label b, double gamma,
                                       const double* times, size_t n, coamp_decay* out) {
  return guarded([&] {
    if (n == 0) return;
    require(times, "times");
    require(out, "out");
    const auto reports = coamp::distance_trajectory(label_of(a), label_of(b),
                                                    coamp::LossChannel(gamma),
                                                    std::vector<double>(times, times + n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = reports[i];
      out[i] = {r.time, r.distance, r.rate, r.analytic_rate, r.fd_rate};
    }
  });
}

coamp_status coamp_trajectory_new(coamp_label a, coamp_label b, double g1, double g2,
                                  double gamma, const double* times, size_t n,
                                  coamp_trajectory** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    if (n == 0) coamp::fail(coamp::ErrorCode::InvalidArgument, "trajectory needs at least one time");
    require(times, "times");
    const coamp::LossChannel ch(gamma);
    const auto la = label_of(a);
    const auto lb = label_of(b);
    auto traj = std::make_unique<coamp_trajectory>();
    traj->feasible = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0 && times[i] < times[i - 1]) {
        coamp::fail(coamp::ErrorCode::InvalidArgument, "trajectory times must be sorted ascending");
      }
      traj->rows.push_back(coamp::compare_amplified(la, lb, g1, g2, ch, times[i]));
      traj->feasible = traj->rows.back().amplification_feasible;
    }
    *out = traj.release();
  });
}

size_t coamp_trajectory_size(const coamp_trajectory* t) { return t ? t->rows.size() : 0; }

int coamp_trajectory_feasible(const coamp_trajectory* t) { return t && t->feasible ? 1 : 0; }

coamp_status coamp_trajectory_row(const coamp_trajectory* t, size_t i, coamp_comparison* out) {
  return guarded([&] {
    require(t, "trajectory");
    require(out, "out");
    if (i >= t->rows.size()) coamp::fail(coamp::ErrorCode::DimensionMismatch, "row out of range");
    const auto& r = t->rows[i];
    *out = {r.t, r.d_plain, r.d_amp, r.ratio, r.sigma_plain, r.sigma_amp};
  });
}

coamp_status coamp_trajectory_csv(const coamp_trajectory* t, char** out) {
  return guarded([&] {
    require(t, "trajectory");
    require(out, "out");
    std::string text = coamp::comparison_csv_header() + "\n";
    for (const auto& r : t->rows) text += coamp::to_csv_line(r) + "\n";
    *out = dup_string(text);
  });
}

void coamp_trajectory_free(coamp_trajectory* t) { delete t; }

coamp_status coamp_helstrom_error(coamp_label a, coamp_label b, double prior_a, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = coamp::helstrom_error(label_of(a), label_of(b), prior_a);
  });
}

coamp_status coamp_click_error(coamp_label a, coamp_label b, double dark_prob, double efficiency,
                               double prior_a, double* p_err, char** rule) {
  return guarded([&] {
    require(p_err, "p_err");
    const auto r = coamp::click_discrimination_error(
        label_of(a), label_of(b), coamp::DetectorModel(dark_prob, efficiency), prior_a);
    *p_err = r.p_err;
    if (rule) *rule = dup_string(r.threshold_rule);
  });
}

}  // extern "C"
