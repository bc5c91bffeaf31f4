// Exercises the library only through the C interface.
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <string>

#include "coamp/coamp.h"

namespace {

constexpr double kPi = std::numbers::pi;

std::string take(char* s) {
  std::string out = s ? s : "";
  coamp_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status and name helpers") {
  CHECK(std::strlen(coamp_version()) > 0);
  CHECK(std::string(coamp_status_name(COAMP_OK)) == "ok");
  CHECK(std::string(coamp_verdict_name(COAMP_INFEASIBLE)) == "infeasible");
  CHECK(std::string(coamp_binding_name(COAMP_BINDING_ANALYTIC_BOUNDARY)) == "analytic-boundary");
}

TEST_CASE("labels, overlap and distance") {
  coamp_label out{};
  REQUIRE(coamp_label_normalize({1.0, -kPi / 2}, &out) == COAMP_OK);
  CHECK(out.phase == doctest::Approx(3 * kPi / 2));

  CHECK(coamp_label_normalize({-1.0, 0.0}, &out) == COAMP_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(coamp_last_error()) > 0);
  CHECK(coamp_label_normalize({NAN, 0.0}, &out) == COAMP_ERR_INVALID_ARGUMENT);

  double re = 0, im = 0, d = 0;
  REQUIRE(coamp_overlap({1.0, 0.0}, {1.0, kPi}, &re, &im) == COAMP_OK);
  CHECK(re == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(std::abs(im) < 1e-15);
  REQUIRE(coamp_distance({1.0, 0.0}, {1.0, kPi}, &d) == COAMP_OK);
  CHECK(d == doctest::Approx(4.0));
  CHECK(coamp_overlap({1.0, 0.0}, {1.0, 0.0}, nullptr, &im) == COAMP_ERR_INVALID_ARGUMENT);

  coamp_label labels[] = {{1.0, 0.0}, {2.0, 1.0}};
  size_t cutoff = 0;
  REQUIRE(coamp_truncation_cutoff(labels, 2, 1e-12, &cutoff) == COAMP_OK);
  CHECK(cutoff > 4);
  coamp_label huge = {1e4, 0.0};
  CHECK(coamp_truncation_cutoff(&huge, 1, 1e-12, &cutoff) == COAMP_ERR_DIMENSION_OVERFLOW);

  coamp_matrix* g = nullptr;
  REQUIRE(coamp_gram(labels, 2, &g) == COAMP_OK);
  CHECK(coamp_matrix_rows(g) == 2);
  CHECK(coamp_matrix_cols(g) == 2);
  REQUIRE(coamp_matrix_get(g, 0, 0, &re, &im) == COAMP_OK);
  CHECK(re == doctest::Approx(1.0));
  CHECK(coamp_matrix_get(g, 2, 0, &re, &im) == COAMP_ERR_INVALID_ARGUMENT);
  coamp_matrix_free(g);
}

TEST_CASE("amplifier functions") {
  coamp_report r{};
  REQUIRE(coamp_exact_feasible({1.3, 0.0}, {1.3, 2 * kPi / 3}, 1.2, 1.2, &r) == COAMP_OK);
  CHECK(r.verdict == COAMP_INFEASIBLE);
  CHECK(r.binding == COAMP_BINDING_ANALYTIC_BOUNDARY);
  REQUIRE(coamp_exact_feasible({1.0, 0.0}, {1.0, kPi}, 0.5, 0.5, &r) == COAMP_OK);
  CHECK(r.verdict == COAMP_FEASIBLE);
  CHECK(coamp_exact_feasible({1.0, 0.0}, {1.0, kPi}, 0.0, 0.5, &r) == COAMP_ERR_INVALID_ARGUMENT);

  int passes = -1, unbounded = -1;
  double bound = 0, g1max = 0, g2max = 0;
  REQUIRE(coamp_envelope(2.0, 1.1, 1.1, &passes, &bound) == COAMP_OK);
  CHECK((passes == 0 || passes == 1));
  REQUIRE(coamp_max_gain({1.0, 0.0}, {2.0, kPi / 3}, &unbounded, &g1max, &g2max) == COAMP_OK);
  CHECK(unbounded == 0);
  CHECK(g1max == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(g2max == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
  REQUIRE(coamp_max_gain({1.0, 0.0}, {1.0, 0.0}, &unbounded, &g1max, &g2max) == COAMP_OK);
  CHECK(unbounded == 1);

  double folded = 0;
  REQUIRE(coamp_fold_phase(-kPi / 2, &folded) == COAMP_OK);
  CHECK(folded == doctest::Approx(kPi / 2));
}

TEST_CASE("witness search") {
  coamp_label a[] = {{1.0, 0.0}, {1.0, kPi}};
  coamp_label b[] = {{2.0, 0.0}, {2.0, kPi}};
  coamp_report r{};
  coamp_matrix* pi = nullptr;
  REQUIRE(coamp_pi_deterministic(a, b, 2, 1e-10, &pi, &r) == COAMP_OK);
  CHECK(r.verdict == COAMP_INFEASIBLE);
  REQUIRE(pi != nullptr);
  coamp_matrix_free(pi);

  const double p_ok[] = {0.8, 0.8};
  const double p_bad[] = {0.9, 0.9};
  coamp_matrix* w = nullptr;
  REQUIRE(coamp_dykstra(a, b, 2, p_ok, 20000, 1e-9, &r, &w) == COAMP_OK);
  CHECK(r.verdict == COAMP_FEASIBLE);
  CHECK(w != nullptr);
  coamp_matrix_free(w);
  REQUIRE(coamp_dykstra(a, b, 2, p_bad, 20000, 1e-9, &r, &w) == COAMP_OK);
  CHECK(r.verdict == COAMP_INFEASIBLE);
  CHECK(w == nullptr);

  double pmax = 0;
  REQUIRE(coamp_max_uniform_success(a, b, 2, 1e-6, &pmax) == COAMP_OK);
  const double closed = (1 - std::exp(-2.0)) / (1 - std::exp(-8.0));
  CHECK(std::abs(pmax - closed) < 1e-4);

  const double p_range[] = {1.5, 0.5};
  CHECK(coamp_dykstra(a, b, 2, p_range, 100, 1e-9, &r, &w) == COAMP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("Kraus handles") {
  coamp_label a[] = {{1.0, 0.0}, {1.0, kPi}};
  coamp_label b[] = {{0.5, 0.0}, {0.5, kPi}};
  coamp_report r{};
  coamp_kraus* k = nullptr;
  REQUIRE(coamp_kraus_build(a, b, 2, nullptr, 1e-12, 1, &r, &k) == COAMP_OK);
  REQUIRE(k != nullptr);
  coamp_kraus_summary s{};
  REQUIRE(coamp_kraus_summary_get(k, &s) == COAMP_OK);
  CHECK(s.completed == 1);
  CHECK(s.success_count == 2);  // Pi = G_A / G_B has full rank here
  CHECK(s.max_action < 1e-8);
  CHECK(s.full_completeness < 1e-8);

  coamp_matrix* op = nullptr;
  REQUIRE(coamp_kraus_operator(k, 0, &op) == COAMP_OK);
  CHECK(coamp_matrix_rows(op) == s.dim);
  coamp_matrix_free(op);
  CHECK(coamp_kraus_operator(k, 5, &op) == COAMP_ERR_INVALID_ARGUMENT);

  char* json = nullptr;
  REQUIRE(coamp_kraus_to_json(k, &json) == COAMP_OK);
  const std::string text = take(json);
  coamp_kraus* back = nullptr;
  REQUIRE(coamp_kraus_from_json(text.c_str(), &back) == COAMP_OK);
  REQUIRE(coamp_kraus_to_json(back, &json) == COAMP_OK);
  CHECK(take(json) == text);
  coamp_kraus_free(back);
  coamp_kraus_free(k);

  CHECK(coamp_kraus_from_json("{\"schema_version\":1}", &back) != COAMP_OK);
  CHECK(coamp_kraus_from_json("not json", &back) != COAMP_OK);

  coamp_label up[] = {{2.0, 0.0}, {2.0, kPi}};
  REQUIRE(coamp_kraus_build(a, up, 2, nullptr, 1e-12, 1, &r, &k) == COAMP_OK);
  CHECK(r.verdict == COAMP_INFEASIBLE);
  CHECK(k == nullptr);

  coamp_label close[] = {{1.0, 0.0}, {1.0, 1e-7}};
  CHECK(coamp_kraus_build(close, close, 2, nullptr, 1e-12, 1, &r, &k) == COAMP_ERR_ILL_CONDITIONED);
}

TEST_CASE("Wigner handles") {
  double v = 0;
  REQUIRE(coamp_wigner_value({0.0, 0.0}, 0.0, 0.0, &v) == COAMP_OK);
  CHECK(v == doctest::Approx(1 / kPi));
  coamp_wigner* w = nullptr;
  REQUIRE(coamp_wigner_grid({1.0, 0.5}, nullptr, 101, &w) == COAMP_OK);
  double integral = 0, peak = 0;
  REQUIRE(coamp_wigner_integral(w, &integral) == COAMP_OK);
  REQUIRE(coamp_wigner_max(w, &peak) == COAMP_OK);
  CHECK(std::abs(integral - 1) < 1e-3);
  CHECK(peak <= 1 / kPi + 1e-12);

  char* json = nullptr;
  REQUIRE(coamp_wigner_to_json(w, &json) == COAMP_OK);
  const std::string text = take(json);
  coamp_wigner* back = nullptr;
  REQUIRE(coamp_wigner_from_json(text.c_str(), &back) == COAMP_OK);
  REQUIRE(coamp_wigner_to_json(back, &json) == COAMP_OK);
  CHECK(take(json) == text);
  char* csv = nullptr;
  REQUIRE(coamp_wigner_to_csv(w, &csv) == COAMP_OK);
  CHECK(take(csv).rfind("x,p,w\n", 0) == 0);
  coamp_wigner_free(back);
  coamp_wigner_free(w);

  const double bad_window[] = {1.0, -1.0, -1.0, 1.0};
  CHECK(coamp_wigner_grid({1.0, 0.0}, bad_window, 11, &w) == COAMP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("sweep handles") {
  coamp_sweep_spec* s = nullptr;
  REQUIRE(coamp_sweep_spec_new(&s) == COAMP_OK);
  REQUIRE(coamp_sweep_spec_fix(s, "alpha1", 1.0) == COAMP_OK);
  REQUIRE(coamp_sweep_spec_fix(s, "alpha2", 1.0) == COAMP_OK);
  REQUIRE(coamp_sweep_spec_fix(s, "g2", 0.5) == COAMP_OK);
  REQUIRE(coamp_sweep_spec_range(s, "eta", 0.0, kPi, 5) == COAMP_OK);
  REQUIRE(coamp_sweep_spec_range(s, "g1", 0.5, 1.5, 3) == COAMP_OK);
  CHECK(coamp_sweep_spec_fix(s, "nope", 1.0) == COAMP_ERR_INVALID_ARGUMENT);
  size_t n = 0;
  REQUIRE(coamp_sweep_spec_points(s, &n) == COAMP_OK);
  CHECK(n == 15);

  coamp_sweep_result* r1 = nullptr;
  coamp_sweep_result* r4 = nullptr;
  REQUIRE(coamp_sweep_run(s, 1, &r1) == COAMP_OK);
  REQUIRE(coamp_sweep_run(s, 4, &r4) == COAMP_OK);
  REQUIRE(coamp_sweep_result_size(r1) == 15);
  coamp_sweep_row row{};
  REQUIRE(coamp_sweep_result_row(r1, 0, &row) == COAMP_OK);
  CHECK(row.g1 == 0.5);
  CHECK(row.feasible == 1);
  char* c1 = nullptr;
  char* c4 = nullptr;
  REQUIRE(coamp_sweep_result_csv(r1, &c1) == COAMP_OK);
  REQUIRE(coamp_sweep_result_csv(r4, &c4) == COAMP_OK);
  CHECK(take(c1) == take(c4));
  coamp_sweep_result_free(r1);
  coamp_sweep_result_free(r4);

  REQUIRE(coamp_sweep_spec_range(s, "g2", 1.0, 0.5, 3) == COAMP_OK);
  CHECK(coamp_sweep_run(s, 1, &r1) == COAMP_ERR_INVALID_ARGUMENT);
  coamp_sweep_spec_free(s);
}

TEST_CASE("channel and discrimination") {
  coamp_label out{};
  REQUIRE(coamp_loss_evolve({2.0, 1.0}, 1.0, std::log(4.0), &out) == COAMP_OK);
  CHECK(out.amplitude == doctest::Approx(1.0));
  CHECK(coamp_loss_evolve({2.0, 1.0}, 1.0, -1.0, &out) == COAMP_ERR_INVALID_ARGUMENT);

  const double times[] = {0.0, 1.0};
  coamp_decay decay[2];
  REQUIRE(coamp_distance_trajectory({1.0, 0.0}, {1.0, kPi}, 1.0, times, 2, decay) == COAMP_OK);
  CHECK(decay[1].distance == doctest::Approx(4 * std::exp(-1.0)));

  coamp_trajectory* t = nullptr;
  REQUIRE(coamp_trajectory_new({1.0, 0.0}, {1.0, kPi}, 0.5, 0.5, 1.0, times, 2, &t) == COAMP_OK);
  CHECK(coamp_trajectory_size(t) == 2);
  CHECK(coamp_trajectory_feasible(t) == 1);
  coamp_comparison row{};
  REQUIRE(coamp_trajectory_row(t, 1, &row) == COAMP_OK);
  CHECK(row.ratio == doctest::Approx(0.25));
  char* csv = nullptr;
  REQUIRE(coamp_trajectory_csv(t, &csv) == COAMP_OK);
  CHECK(take(csv).rfind("t,d_plain,d_amp,ratio,sigma_plain,sigma_amp\n", 0) == 0);
  coamp_trajectory_free(t);

  double err = 0;
  REQUIRE(coamp_helstrom_error({0.0, 0.0}, {1.0, 0.0}, 0.5, &err) == COAMP_OK);
  CHECK(err == doctest::Approx(0.5 * (1 - std::sqrt(1 - std::exp(-1.0)))));
  char* rule = nullptr;
  REQUIRE(coamp_click_error({0.0, 0.0}, {1.0, 0.0}, 0.0, 1.0, 0.5, &err, &rule) == COAMP_OK);
  CHECK(err == doctest::Approx(0.5 * std::exp(-1.0)));
  CHECK(take(rule) == "click->b;no-click->a");
}
