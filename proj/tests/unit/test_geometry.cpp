#include <doctest.h>

#include <rapidjson/document.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coamp/error.hpp"
#include "coamp/geometry.hpp"
#include "oracles.hpp"

using namespace coamp;

namespace {

CoherentLabel random_label(oracle::Rng& rng, double max_amp = 3.0) {
  return CoherentLabel(rng.uniform(0.0, max_amp), rng.uniform(0.0, 2 * std::numbers::pi));
}

}  // namespace

TEST_CASE("overlap examples") {
  const CoherentLabel vac(0.0, 0.0);
  CHECK(overlap(vac, vac) == Complex(1.0, 0.0));
  const CoherentLabel a(1.3, 0.4);
  CHECK(std::abs(overlap(a, a) - 1.0) < 1e-15);

  const CoherentLabel plus(1.0, 0.0);
  const CoherentLabel minus(1.0, std::numbers::pi);
  CHECK(std::abs(overlap(plus, minus) - 0.1353353) < 1e-7);
  CHECK(std::norm(overlap(plus, minus)) == doctest::Approx(0.0183156).epsilon(1e-6));
}

TEST_CASE("overlap agrees with the closed form and the Fock-space inner product") {
  oracle::Rng rng(21);
  for (int k = 0; k < 100; ++k) {
    const auto a = random_label(rng);
    const auto b = random_label(rng);
    const Complex expected = oracle::coherent_overlap(a.value(), b.value());
    CHECK(std::abs(overlap(a, b) - expected) < 1e-14);
    const Complex numeric = inner_product(coherent_vector(a, 80), coherent_vector(b, 80));
    CHECK(std::abs(numeric - expected) < 1e-12);
    CHECK(std::abs(overlap(a, b)) > 0.0);
  }
}

TEST_CASE("distance examples") {
  const CoherentLabel plus(1.0, 0.0);
  CHECK(distance(plus, plus) == 0.0);
  CHECK(distance(plus, CoherentLabel(1.0, std::numbers::pi)) == doctest::Approx(4.0));
  CHECK(distance(plus, CoherentLabel(1.0, std::numbers::pi / 2)) == doctest::Approx(2.0));
}

TEST_CASE("overlap-distance identity on random pairs") {
  oracle::Rng rng(22);
  for (int k = 0; k < 1000; ++k) {
    const auto a = random_label(rng);
    const auto b = random_label(rng);
    CHECK(std::abs(std::norm(overlap(a, b)) - std::exp(-distance(a, b))) < 1e-12);
    CHECK(distance(a, b) == distance(b, a));
  }
}

TEST_CASE("distance vanishes exactly for equal labels") {
  oracle::Rng rng(23);
  for (int k = 0; k < 100; ++k) {
    const auto a = random_label(rng);
    const CoherentLabel same(a.amplitude(), a.phase() + 2 * std::numbers::pi);
    CHECK(distance(a, same) < 1e-24);
    const CoherentLabel other(a.amplitude() + 0.1, a.phase());
    CHECK(distance(a, other) > 0.0);
  }
  CHECK(distance(CoherentLabel(0.0, 0.0), CoherentLabel(0.0, 3.0)) == 0.0);
}

TEST_CASE("uniform gain scales distance by g squared") {
  oracle::Rng rng(24);
  for (int k = 0; k < 100; ++k) {
    const auto a = random_label(rng);
    const auto b = random_label(rng);
    const double g = rng.uniform(1.0, 3.0);
    CHECK(distance(a.scaled(g), b.scaled(g)) ==
          doctest::Approx(g * g * distance(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("gram examples and positivity") {
  const GramMatrix single = gram(std::vector{CoherentLabel(0.8, 1.0)});
  CHECK(single.size() == 1);
  CHECK(single.entries()(0, 0) == Complex(1.0, 0.0));

  const GramMatrix pair = gram(std::vector{CoherentLabel(0.5, 0.0), CoherentLabel(0.5, std::numbers::pi)});
  CHECK(std::abs(pair.entries()(0, 1) - 0.6065307) < 1e-7);

  oracle::Rng rng(25);
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + static_cast<int>(rng.uniform(0.0, 8.0));
    std::vector<CoherentLabel> labels;
    for (int i = 0; i < n; ++i) labels.push_back(random_label(rng));
    const GramMatrix g = gram(labels);
    CHECK(psd_check(g.entries(), 1e-10).is_psd);
    for (int i = 0; i < n; ++i) {
      CHECK(g.entries()(i, i) == Complex(1.0, 0.0));
      for (int j = 0; j < n; ++j) CHECK(g.entries()(i, j) == std::conj(g.entries()(j, i)));
    }
  }
}

TEST_CASE("psd_check examples") {
  const PsdVerdict id = psd_check(ComplexMatrix::Identity(3, 3));
  CHECK(id.is_psd);
  CHECK(id.min_eigenvalue == doctest::Approx(1.0));

  ComplexMatrix m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;
  const PsdVerdict v = psd_check(m);
  CHECK_FALSE(v.is_psd);
  CHECK(v.min_eigenvalue == doctest::Approx(-1.0));
  CHECK(v.is_psd == (v.min_eigenvalue >= -v.tolerance_used));

  CHECK_THROWS_AS(psd_check(ComplexMatrix::Zero(2, 3)), Error);
  ComplexMatrix skew(2, 2);
  skew << 1.0, 0.5, 0.1, 1.0;
  CHECK_THROWS_AS(psd_check(skew), Error);
}

TEST_CASE("psd tolerance is relative to the matrix scale") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1e6;
  m(1, 1) = -1e-5;
  CHECK(psd_check(m, 1e-10).is_psd);
  m(1, 1) = -1e-3;
  CHECK_FALSE(psd_check(m, 1e-10).is_psd);
}

TEST_CASE("wigner grid examples") {
  const WignerWindow win{-3.0, 3.0, -3.0, 3.0};
  const WignerGrid vac = wigner_grid(CoherentLabel(0.0, 0.0), win, 61);
  CHECK(vac.values()(30, 30) == doctest::Approx(std::numbers::inv_pi).epsilon(1e-12));
  CHECK(vac.values().maxCoeff() == vac.values()(30, 30));
  CHECK(vac.values().minCoeff() >= 0.0);

  const CoherentLabel one(1.0, 0.0);
  CHECK(wigner_value(one, std::numbers::sqrt2, 0.0) == doctest::Approx(std::numbers::inv_pi));
  CHECK(wigner_value(one, std::numbers::sqrt2 + 0.01, 0.0) < std::numbers::inv_pi);
  const WignerGrid shifted = wigner_grid(one, wigner_window_around(one), 201);
  Eigen::Index i = 0, j = 0;
  shifted.values().maxCoeff(&i, &j);
  CHECK(shifted.x_at(static_cast<std::size_t>(i)) == doctest::Approx(std::numbers::sqrt2));
  CHECK(shifted.p_at(static_cast<std::size_t>(j)) == doctest::Approx(0.0));
}

TEST_CASE("wigner grids integrate to one over six standard deviations") {
  oracle::Rng rng(26);
  for (int k = 0; k < 20; ++k) {
    const auto l = random_label(rng);
    const WignerGrid g = wigner_grid(l, wigner_window_around(l, 6.0), 201);
    CHECK(std::abs(g.integral() - 1.0) < 1e-6);
    CHECK(std::abs(g.values().maxCoeff() - std::numbers::inv_pi) < 1e-9);
  }
}

TEST_CASE("wigner grid serialization") {
  const WignerGrid g = wigner_grid(CoherentLabel(0.7, 1.2), WignerWindow{-2, 2, -1, 3}, 5);
  const std::string csv = g.to_csv();
  CHECK(csv.rfind("x,p,w\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 26);

  const std::string json = g.to_json();
  rapidjson::Document doc;
  doc.Parse(json.c_str());
  REQUIRE_FALSE(doc.HasParseError());
  CHECK(doc["schema_version"].GetInt() == 1);
  CHECK(doc["values"].Size() == 25);

  const WignerGrid back = WignerGrid::from_json(json);
  CHECK(back.resolution() == 5);
  CHECK(back.values() == g.values());
  CHECK(back.to_json() == json);

  CHECK_THROWS_AS(WignerGrid::from_json("{}"), Error);
  CHECK_THROWS_AS(WignerGrid::from_json(
                      R"({"schema_version":1,"window":{"x_min":0,"x_max":1,"p_min":0,"p_max":1},)"
                      R"("resolution":2,"values":[0.1,0.2,-0.3,0.4]})"),
                  Error);
}

TEST_CASE("wigner grid rejects degenerate input") {
  CHECK_THROWS_AS(wigner_grid(CoherentLabel(1.0, 0.0), WignerWindow{0, 0, -1, 1}, 10), Error);
  CHECK_THROWS_AS(wigner_grid(CoherentLabel(1.0, 0.0), WignerWindow{-1, 1, -1, 1}, 1), Error);
}
