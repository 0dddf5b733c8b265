#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "bees/core.hpp"
#include "bees/error.hpp"
#include "bees/rng.hpp"

using namespace bees;
using doctest::Approx;

TEST_SUITE("core") {

TEST_CASE("normalize_log_weights examples") {
  auto q = normalize_log_weights(LogWeightVector({0, 0, 0}));
  for (double x : q) CHECK(x == Approx(1.0 / 3).epsilon(1e-15));

  q = normalize_log_weights(LogWeightVector({1000, 1000}));
  CHECK(q[0] == 0.5);
  CHECK(q[1] == 0.5);

  q = normalize_log_weights(LogWeightVector({std::log(1.0), std::log(3.0)}));
  CHECK(std::abs(q[0] - 0.25) < 1e-15);
  CHECK(std::abs(q[1] - 0.75) < 1e-15);
}

TEST_CASE("normalize_log_weights errors") {
  CHECK_THROWS_AS(normalize_log_weights(LogWeightVector{}), DimensionError);
  CHECK_THROWS_AS(LogWeightVector({0.0, NAN}), ParameterError);
  CHECK_THROWS_AS(LogWeightVector({0.0, INFINITY}), ParameterError);
}

TEST_CASE("normalize_log_weights is shift invariant") {
  RngStream rng(7, 99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 40;
    std::vector<double> lw(n), shifted(n);
    const double shift = (rng.next_uniform() - 0.5) * 2000.0;
    for (std::size_t i = 0; i < n; ++i) {
      lw[i] = (rng.next_uniform() - 0.5) * 50.0;
      shifted[i] = lw[i] + shift;
    }
    const auto a = normalize_log_weights(LogWeightVector(lw));
    const auto b = normalize_log_weights(LogWeightVector(shifted));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
  }
}

TEST_CASE("mix_advice examples") {
  auto p = mix_advice(ProbVector({1.0}), AdviceMatrix::from_rows({{1, 0}}), 0.1);
  CHECK(p[0] == Approx(0.9));
  CHECK(p[1] == Approx(0.1));

  // rho = 1/K wipes out the advice
  p = mix_advice(ProbVector({0.3, 0.7}), AdviceMatrix::from_rows({{1, 0, 0, 0}, {0, 0, 0.5, 0.5}}),
                 0.25);
  for (double x : p) CHECK(x == Approx(0.25));

  p = mix_advice(ProbVector({0.5, 0.5}), AdviceMatrix::from_rows({{1, 0}, {0, 1}}), 0.1);
  CHECK(p[0] == Approx(0.5));
  CHECK(p[1] == Approx(0.5));
}

TEST_CASE("mix_advice errors") {
  const auto adv = AdviceMatrix::from_rows({{1, 0}});
  CHECK_THROWS_AS(mix_advice(ProbVector({1.0}), adv, 0.0), ParameterError);
  CHECK_THROWS_AS(mix_advice(ProbVector({1.0}), adv, 0.51), ParameterError);
  CHECK_THROWS_AS(mix_advice(ProbVector({0.5, 0.5}), adv, 0.1), DimensionError);
  CHECK_THROWS_AS(AdviceMatrix::from_rows({{1, 0}, {1}}), DimensionError);
}

TEST_CASE("mix_advice keeps the floor on random inputs") {
  RngStream rng(3, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 2 + rng.next_u64() % 9, n = 1 + rng.next_u64() % 12;
    std::vector<std::vector<double>> rows(n, std::vector<double>(k));
    for (auto& r : rows) {
      for (auto& x : r) x = rng.next_uniform();
      const double s = std::accumulate(r.begin(), r.end(), 0.0);
      for (auto& x : r) x /= s;
    }
    std::vector<double> lw(n);
    for (auto& x : lw) x = (rng.next_uniform() - 0.5) * 20;
    const double rho = rng.next_uniform() / static_cast<double>(k) + 1e-9;
    const auto p = mix_advice(normalize_log_weights(LogWeightVector(lw)),
                              AdviceMatrix::from_rows(rows), std::min(rho, 1.0 / k));
    double sum = 0;
    for (double x : p) {
      CHECK(x >= std::min(rho, 1.0 / k) - 1e-12);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("sample_categorical") {
  RngStream rng(11, 3);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_categorical(ProbVector({1, 0, 0}), rng) == 0);
    CHECK(sample_categorical(ProbVector({0, 0, 0, 1}), rng) == 3);
  }
  RngStream counted(1, 1);
  sample_categorical(ProbVector({0.5, 0.5}), counted);
  CHECK(counted.counter() == 1);

  // binomial(1e5, 0.5) has sd 158, so +-1000 is over 6 sd
  RngStream mc(2024, 3);
  int first = 0;
  for (int i = 0; i < 100000; ++i) first += sample_categorical(ProbVector({0.5, 0.5}), mc) == 0;
  CHECK(std::abs(first / 1e5 - 0.5) <= 0.01);
}

TEST_CASE("sample_categorical is reproducible") {
  const ProbVector p({0.1, 0.2, 0.3, 0.4});
  RngStream a(5, 3), b(5, 3);
  for (int i = 0; i < 1000; ++i) CHECK(sample_categorical(p, a) == sample_categorical(p, b));
}

TEST_CASE("sample_index skips zero-probability entries") {
  const std::vector<double> p{0.0, 0.5, 0.0, 0.5, 0.0};
  for (double u : {0.0, 0.25, 0.4999999, 0.5, 0.75, std::nextafter(1.0, 0.0)}) {
    const auto a = sample_index(p, u);
    CHECK(p[a] > 0.0);
  }
}

TEST_CASE("project_to_simplex") {
  auto p = project_to_simplex(std::vector<double>{0.5, 0.5});
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);
  p = project_to_simplex(std::vector<double>{-0.2, 0.6});
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 1.0);
  p = project_to_simplex(std::vector<double>{-1, -1});
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);
}

TEST_CASE("ProbVector validation") {
  CHECK_NOTHROW(ProbVector({0.5, 0.5 + 5e-10}));
  CHECK_THROWS_AS(ProbVector({0.5, 0.6}), ParameterError);
  CHECK_THROWS(ProbVector({-0.1, 1.1}));
  CHECK(ProbVector::point_mass(3, 2)[2] == 1.0);
}

TEST_CASE("rng streams") {
  RngStream a(42, 1), b(42, 1), c(42, 2);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  RngStream d(42, 1);
  CHECK(d.at(5) == RngStream(42, 1).at(5));
  // the stream is SplitMix64 from its key
  CHECK(mix64(0) == 0);
  CHECK(a.split(1).stream() != a.split(2).stream());
  for (int i = 0; i < 1000; ++i) {
    const double u = d.next_uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

}
