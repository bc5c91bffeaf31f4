#include <doctest.h>

#include <rapidjson/document.h>

#include <cmath>
#include <numbers>

#include "coamp/error.hpp"
#include "coamp/kraus.hpp"
#include "oracles.hpp"

using namespace coamp;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<CoherentLabel> pair(double a, double t1, double b, double t2) {
  return {CoherentLabel(a, t1), CoherentLabel(b, t2)};
}

std::size_t dim_for(const std::vector<CoherentLabel>& a, const std::vector<CoherentLabel>& b,
                    double eps = 1e-12) {
  std::vector<CoherentLabel> all = a;
  all.insert(all.end(), b.begin(), b.end());
  TruncationConfig cfg;
  cfg.tail_epsilon = eps;
  return truncation_dim(all, cfg) + 1;
}

ComplexMatrix projector(const std::vector<CoherentLabel>& labels, std::size_t dim) {
  ComplexMatrix psi(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    psi.col(static_cast<Eigen::Index>(i)) = coherent_vector(labels[i], dim).coefficients();
  }
  // Orthonormal basis of the span via a thin QR, independent of the Gram inverse.
  Eigen::HouseholderQR<ComplexMatrix> qr(psi);
  const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(psi.rows(), psi.cols());
  return q * q.adjoint();
}

}  // namespace

TEST_CASE("reciprocal states for one and two inputs") {
  const auto single = reciprocal_states({CoherentLabel(0.9, 0.4)}, 40);
  REQUIRE(single.duals.size() == 1);
  CHECK(std::abs(single.normalizers[0] - 1.0) < 1e-12);
  CHECK((single.duals[0].coefficients() -
         coherent_vector(CoherentLabel(0.9, 0.4), 40).coefficients()).norm() < 1e-10);

  const auto a = pair(1.0, 0.0, 1.0, kPi);
  const std::size_t dim = dim_for(a, a);
  const DualBasis d = reciprocal_states(a, dim);
  CHECK(d.convention == DualConvention::Reciprocal);
  const double expected = (1.0 - std::exp(-4.0)) / std::exp(-2.0);
  CHECK(expected == doctest::Approx(7.2537).epsilon(1e-4));
  CHECK(std::abs(d.normalizers[0] - expected) < 1e-8);
  CHECK(std::abs(d.normalizers[1] - expected) < 1e-8);
  const FockVector psi2 = coherent_vector(a[1], dim);
  CHECK(std::abs(inner_product(d.duals[0], psi2)) < 1e-8);
}

TEST_CASE("reciprocal normalizers follow the closed form for complex overlaps") {
  oracle::Rng rng(51);
  for (int k = 0; k < 50; ++k) {
    const auto a = pair(rng.uniform(0.2, 2.0), rng.uniform(0, 2 * kPi), rng.uniform(0.2, 2.0),
                        rng.uniform(0, 2 * kPi));
    if (distance(a[0], a[1]) < 0.3) continue;
    const DualBasis d = reciprocal_states(a, dim_for(a, a));
    const auto o12 = oracle::coherent_overlap(a[0].value(), a[1].value());
    const auto gamma1 = (1.0 - std::norm(o12)) / o12;
    const auto gamma2 = (1.0 - std::norm(o12)) / std::conj(o12);
    CHECK(std::abs(d.normalizers[0] - gamma1) < 1e-8);
    CHECK(std::abs(d.normalizers[1] - gamma2) < 1e-8);
  }
}

TEST_CASE("nearly identical inputs are rejected as ill-conditioned") {
  const auto a = pair(1.0, 0.0, 1.0, 1e-7);
  try {
    reciprocal_states(a, 40);
    FAIL("expected a conditioning error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllConditioned);
    CHECK(std::string(e.what()).find("condition number") != std::string::npos);
  }
}

TEST_CASE("identity transformation yields the span projector") {
  const auto a = pair(0.8, 0.3, 1.2, 2.5);
  const std::size_t dim = dim_for(a, a);
  const KrausSet ks = build_kraus(a, a, CoefficientMatrix{ComplexMatrix::Ones(1, 2)}, dim);
  REQUIRE(ks.operators().size() == 1);
  const ComplexMatrix p = projector(a, dim);
  CHECK((ks.operators()[0] - p).cwiseAbs().maxCoeff() < 1e-10);
  const auto report = verify_action(ks);
  CHECK(report.span_completeness < 1e-10);

  const KrausSet done = complete_to_identity(ks);
  REQUIRE(done.operators().size() == 2);
  const ComplexMatrix complement = ComplexMatrix::Identity(p.rows(), p.cols()) - p;
  CHECK((done.operators()[1] - complement).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("deterministic deamplification pipeline") {
  const auto a = pair(1.0, 0.0, 1.0, kPi);
  const auto b = pair(0.5, 0.0, 0.5, kPi);
  TruncationConfig cfg;
  const auto build = build_transformation_kraus(a, b, std::nullopt, cfg, true);
  REQUIRE(build.feasibility.feasible());
  REQUIRE(build.kraus);
  const auto& r = *build.verification;
  CHECK(r.max_action() < 1e-8);
  CHECK(r.max_eq14() < 1e-8);
  CHECK(r.span_completeness < 1e-8);
  CHECK(r.full_completeness < 1e-8);
  CHECK(r.gram_transport < 1e-8);

  const auto& ks = *build.kraus;
  CHECK(ks.completed());
  const ComplexMatrix& completion = ks.operators().back();
  for (const auto& l : a) {
    CHECK((completion * coherent_vector(l, ks.dim()).coefficients()).norm() < 1e-8);
  }
  for (const auto& op : ks.operators()) {
    CHECK(op.allFinite());
    Eigen::JacobiSVD<ComplexMatrix> svd(op);
    CHECK(svd.singularValues()(0) <= 1.0 + 1e-6);
  }
}

TEST_CASE("rank-one Pi gives a single success operator") {
  const auto a = pair(1.0, 0.0, 1.5, 2.0);
  auto [pi, report] = pi_deterministic(GramMatrix(a), GramMatrix(a));
  const auto c = factor_coefficients(pi);
  CHECK(c.rows() == 1);
  CHECK(build_kraus(a, a, c, dim_for(a, a)).success_count() == 1);
}

TEST_CASE("probabilistic build stays below the span projector") {
  const auto a = pair(1.0, 0.0, 1.0, kPi);
  const auto b = pair(2.0, 0.0, 2.0, kPi);
  TruncationConfig cfg;
  const auto build = build_transformation_kraus(a, b, ProbabilityVector::uniform(2, 0.8), cfg, true);
  REQUIRE(build.feasibility.feasible());
  const auto& r = *build.verification;
  CHECK(r.span_eig_min >= -1e-8);
  CHECK(r.span_eig_max <= 1.0 + 1e-8);
  CHECK(r.max_action() < 1e-7);
  CHECK(r.full_completeness < 1e-8);

  const auto infeasible = build_transformation_kraus(a, b, ProbabilityVector::uniform(2, 0.95), cfg, true);
  CHECK_FALSE(infeasible.feasibility.feasible());
  CHECK_FALSE(infeasible.kraus.has_value());
}

TEST_CASE("Kraus operators do not depend on the dual scaling") {
  oracle::Rng rng(52);
  for (int k = 0; k < 20; ++k) {
    const auto a = pair(rng.uniform(0.3, 1.8), 0.0, rng.uniform(0.3, 1.8), rng.uniform(0.8, kPi));
    std::vector<CoherentLabel> b = {a[0].scaled(rng.uniform(0.3, 1.0)), a[1].scaled(rng.uniform(0.3, 1.0))};
    auto [pi, report] = pi_deterministic(GramMatrix(a), GramMatrix(b));
    if (!report.feasible()) continue;
    const auto c = factor_coefficients(pi);
    const std::size_t dim = dim_for(a, b);
    const KrausSet reciprocal = build_kraus(a, b, c, dim);
    const KrausSet inverse = build_kraus(a, b, c, dim, gram_inverse_duals(a, dim));
    for (std::size_t i = 0; i < reciprocal.operators().size(); ++i) {
      CHECK((reciprocal.operators()[i] - inverse.operators()[i]).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("forcing an infeasible Pi through the construction is caught") {
  const auto a = pair(0.5, 0.0, 0.5, kPi);
  const auto b = pair(1.0, 0.0, 1.0, kPi);
  const KrausSet ks = build_kraus(a, b, CoefficientMatrix{ComplexMatrix::Ones(1, 2)}, dim_for(a, b));
  try {
    complete_to_identity(ks);
    FAIL("expected NotPsd");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPsd);
  }
}

TEST_CASE("three-state attenuation") {
  std::vector<CoherentLabel> a, b;
  for (int i = 0; i < 3; ++i) {
    a.emplace_back(1.2, 2 * kPi * i / 3);
    b.push_back(a.back().scaled(0.6));
  }
  const auto build = build_transformation_kraus(a, b, std::nullopt, TruncationConfig{}, true);
  REQUIRE(build.feasibility.feasible());
  const auto& r = *build.verification;
  CHECK(r.max_action() < 1e-8);
  CHECK(r.max_eq14() < 1e-8);
  CHECK(r.span_completeness < 1e-8);
  CHECK(r.full_completeness < 1e-8);
}

TEST_CASE("residuals shrink as the truncation tightens") {
  oracle::Rng rng(53);
  for (int k = 0; k < 10; ++k) {
    const auto a = pair(rng.uniform(0.5, 1.8), 0.0, rng.uniform(0.5, 1.8), rng.uniform(1.0, kPi));
    std::vector<CoherentLabel> b = {a[0].scaled(0.7), a[1].scaled(0.7)};
    double prev_action = INFINITY, prev_transport = INFINITY;
    for (double eps : {1e-6, 1e-9, 1e-12}) {
      TruncationConfig cfg;
      cfg.tail_epsilon = eps;
      const auto build = build_transformation_kraus(a, b, std::nullopt, cfg, false);
      REQUIRE(build.verification);
      const auto& r = *build.verification;
      CHECK(r.max_action() <= prev_action + 1e-13);
      CHECK(r.gram_transport <= prev_transport + 1e-13);
      prev_action = r.max_action();
      prev_transport = r.gram_transport;
    }
  }
}

TEST_CASE("Kraus bundles round-trip through JSON") {
  const auto a = pair(1.0, 0.0, 1.0, kPi);
  const auto b = pair(0.5, 0.0, 0.5, kPi);
  const auto build = build_transformation_kraus(a, b, std::nullopt, TruncationConfig{}, true);
  const std::string json = to_json(*build.kraus, *build.verification);

  rapidjson::Document doc;
  doc.Parse(json.c_str());
  REQUIRE_FALSE(doc.HasParseError());
  CHECK(doc["schema_version"].GetInt() == 1);
  CHECK(doc["dim"].GetUint64() == build.kraus->dim());
  CHECK(doc["M"].GetUint64() == build.kraus->success_count());
  CHECK(doc["operators"].Size() == build.kraus->operators().size());
  CHECK(doc["gains"][0].GetDouble() == doctest::Approx(0.5));

  const KrausSet back = kraus_from_json(json);
  for (std::size_t i = 0; i < back.operators().size(); ++i) {
    CHECK(back.operators()[i] == build.kraus->operators()[i]);
  }
  CHECK(to_json(back, verify_action(back)) == json);

  CHECK_THROWS_AS(kraus_from_json("[]"), Error);
  std::string wrong_count = json;
  const auto at = wrong_count.find("\"M\":");
  REQUIRE(at != std::string::npos);
  wrong_count.replace(at, 5, "\"M\":9");
  CHECK_THROWS_AS(kraus_from_json(wrong_count), Error);
}
