#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "coamp/error.hpp"
#include "coamp/fock.hpp"
#include "oracles.hpp"

using namespace coamp;

namespace {

std::size_t cutoff_for(std::vector<CoherentLabel> labels, double eps) {
  TruncationConfig cfg;
  cfg.tail_epsilon = eps;
  return truncation_dim(labels, cfg);
}

}  // namespace

TEST_CASE("labels normalize their phase and reject negative amplitudes") {
  const CoherentLabel l(1.0, -std::numbers::pi / 2);
  CHECK(l.phase() == doctest::Approx(3 * std::numbers::pi / 2));
  CHECK(CoherentLabel(1.0, 0.25) == CoherentLabel(1.0, 0.25 + 2 * std::numbers::pi));
  CHECK_FALSE(CoherentLabel(1.0, 0.0) == CoherentLabel(1.0, 0.1));
  CHECK(CoherentLabel(0.0, 0.0) == CoherentLabel(0.0, 2.0));
  CHECK_THROWS_AS(CoherentLabel(-0.5, 0.0), Error);
  CHECK_THROWS_AS(CoherentLabel(NAN, 0.0), Error);
  CHECK(CoherentLabel::from_complex({0.0, 2.0}).phase() == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("truncation_dim examples") {
  CHECK(cutoff_for({CoherentLabel(0.0, 0.0)}, 1e-3) == 0);
  CHECK(cutoff_for({CoherentLabel(1.0, 0.0)}, 1e-3) == 5);
  // The tail masses that make 5 the answer.
  CHECK(oracle::poisson_tail(1.0, 5) == doctest::Approx(5.94e-4).epsilon(1e-2));
  CHECK(oracle::poisson_tail(1.0, 4) == doctest::Approx(3.66e-3).epsilon(1e-2));
  CHECK(cutoff_for({CoherentLabel(1.0, 0.0), CoherentLabel(2.0, 1.0)}, 1e-9) ==
        cutoff_for({CoherentLabel(2.0, 1.0)}, 1e-9));
}

TEST_CASE("truncation_dim matches the brute-force Poisson tail") {
  oracle::Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    const double alpha = rng.uniform(0.0, 5.0);
    const double eps = std::pow(10.0, -rng.uniform(2.0, 14.0));
    INFO("alpha=" << alpha << " eps=" << eps);
    CHECK(cutoff_for({CoherentLabel(alpha, 0.0)}, eps) == oracle::poisson_cutoff(alpha * alpha, eps));
  }
}

TEST_CASE("truncation_dim honours explicit_dim and max_dim") {
  TruncationConfig cfg;
  cfg.explicit_dim = 17;
  CHECK(truncation_dim(std::vector{CoherentLabel(3.0, 0.0)}, cfg) == 16);

  TruncationConfig tight;
  tight.max_dim = 10;
  try {
    truncation_dim(std::vector{CoherentLabel(0.5, 0.0), CoherentLabel(4.0, 1.0)}, tight);
    FAIL("expected an overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionOverflow);
    CHECK(std::string(e.what()).find("4") != std::string::npos);
  }

  // Every term within the limit underflows here, so the whole mass lies
  // beyond max_dim.
  CHECK_THROWS_AS(truncation_dim(std::vector{CoherentLabel(1e4, 0.0)}), Error);
  TruncationConfig small;
  small.max_dim = 6;
  CHECK_THROWS_AS(truncation_dim(std::vector{CoherentLabel(1.0, 0.0)}, small), Error);
  small.tail_epsilon = 1e-2;
  CHECK(truncation_dim(std::vector{CoherentLabel(1.0, 0.0)}, small) ==
        oracle::poisson_cutoff(1.0, 1e-2));

  TruncationConfig bad;
  bad.tail_epsilon = 1.5;
  CHECK_THROWS_AS(truncation_dim(std::vector{CoherentLabel(1.0, 0.0)}, bad), Error);
  CHECK_THROWS_AS(truncation_dim(std::vector<CoherentLabel>{}, TruncationConfig{}), Error);
}

TEST_CASE("truncated vectors lose less than epsilon of their norm") {
  oracle::Rng rng(12);
  for (int k = 0; k < 200; ++k) {
    const CoherentLabel l(rng.uniform(0.0, 6.0), rng.uniform(0.0, 6.3));
    const double eps = std::pow(10.0, -rng.uniform(3.0, 13.0));
    const std::size_t n = cutoff_for({l}, eps);
    const FockVector v = coherent_vector(l, n + 1);
    const double lost = 1.0 - v.norm() * v.norm();
    CHECK(lost < eps);
    CHECK(v.norm() <= 1.0 + 1e-12);
  }
}

TEST_CASE("coherent_vector examples") {
  const FockVector vac = coherent_vector(CoherentLabel(0.0, 1.0), 5);
  CHECK(vac.coefficients()(0) == Complex(1.0, 0.0));
  CHECK(vac.coefficients().tail(4).norm() == 0.0);

  const FockVector one = coherent_vector(CoherentLabel(1.0, 0.0), 60);
  CHECK(std::abs(inner_product(one, one) - 1.0) < 1e-12);

  const FockVector minus = coherent_vector(CoherentLabel(1.0, std::numbers::pi), 40);
  const Complex ov = inner_product(coherent_vector(CoherentLabel(1.0, 0.0), 40), minus);
  CHECK(std::abs(ov - std::exp(-2.0)) < 1e-10);

  CHECK_THROWS_AS(coherent_vector(CoherentLabel(1.0, 0.0), 0), Error);
  CHECK_THROWS_AS(coherent_vector(CoherentLabel(40.0, 0.0), 10), Error);
}

TEST_CASE("recurrence coefficients match direct factorial evaluation") {
  oracle::Rng rng(13);
  for (int k = 0; k < 50; ++k) {
    const CoherentLabel l(rng.uniform(0.1, 4.0), rng.uniform(0.0, 6.3));
    const FockVector v = coherent_vector(l, 21);
    for (unsigned n = 0; n <= 20; ++n) {
      const Complex expected = oracle::coherent_coefficient(l.value(), n);
      const Complex got = v.coefficients()(n);
      CHECK(std::abs(got - expected) <= 1e-12 * std::abs(expected));
    }
  }
}

TEST_CASE("inner_product properties and examples") {
  const FockVector vac = coherent_vector(CoherentLabel(0.0, 0.0), 30);
  const FockVector one = coherent_vector(CoherentLabel(1.0, 0.0), 30);
  CHECK(std::abs(inner_product(vac, one) - std::exp(-0.5)) < 1e-10);

  const FockVector u = coherent_vector(CoherentLabel(0.7, 0.3), 30);
  const FockVector v = coherent_vector(CoherentLabel(1.1, 2.0), 30);
  CHECK(std::abs(inner_product(u, v) - std::conj(inner_product(v, u))) < 1e-15);
  const Complex self = inner_product(v, v);
  CHECK(self.real() >= 0.0);
  CHECK(self.imag() == 0.0);

  CHECK_THROWS_AS(inner_product(u, coherent_vector(CoherentLabel(1.0, 0.0), 10)), Error);
}

TEST_CASE("truncated overlaps converge to the analytic overlap") {
  oracle::Rng rng(14);
  for (double eps : {1e-6, 1e-9, 1e-12}) {
    for (int k = 0; k < 100; ++k) {
      const CoherentLabel a(rng.uniform(0.0, 3.0), rng.uniform(0.0, 6.3));
      const CoherentLabel b(rng.uniform(0.0, 3.0), rng.uniform(0.0, 6.3));
      const std::size_t dim = cutoff_for({a, b}, eps) + 1;
      const Complex numeric = inner_product(coherent_vector(a, dim), coherent_vector(b, dim));
      CHECK(std::abs(numeric - oracle::coherent_overlap(a.value(), b.value())) < 10 * eps);
    }
  }
}
