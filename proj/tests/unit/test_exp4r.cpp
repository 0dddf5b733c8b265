#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <doctest.h>

#include "bees/error.hpp"
#include "bees/exp4r.hpp"
#include "bees/log.hpp"

using namespace bees;
using doctest::Approx;

namespace {

Exp4RConfig make_config(std::size_t k, std::size_t n, std::uint64_t T, double rho, double delta = 0.05) {
  Exp4RConfig c;
  c.actions = k;
  c.horizon = T;
  c.rho = rho;
  c.delta = delta;
  for (std::size_t i = 1; i <= n; ++i) c.expert_ids.push_back(i);
  return c;
}

std::vector<double> random_simplex(RngStream& rng, std::size_t k) {
  std::vector<double> v(k);
  for (auto& x : v) x = rng.next_uniform();
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
  return v;
}

// Quiet the short-horizon warning for the toy instances below.
struct MuteWarnings {
  WarningHandler old = set_warning_handler([](std::string_view) {});
  ~MuteWarnings() { set_warning_handler(old); }
};

}  // namespace

TEST_SUITE("exp4r") {

TEST_CASE("check_assumption1 examples") {
  CHECK(check_assumption1(10, 2, 116, 0.05));
  CHECK_FALSE(check_assumption1(10, 2, 20, 0.05));
  // N = 1: only the second branch remains, ln(40)/((e-2)*10) = 0.513
  CHECK(check_assumption1(10, 1, 1, 0.05));
  CHECK(check_assumption1(1, 1, 6, 0.05));
  CHECK_FALSE(check_assumption1(1, 1, 5, 0.05));
}

TEST_CASE("rho_default examples") {
  CHECK(rho_default(1, 10, 100) == 0.0);
  CHECK(rho_default(2, 10, 116) == Approx(0.024447).epsilon(1e-5));
  CHECK(std::abs(rho_default(2, 10, 116) - std::sqrt(std::log(2.0) / 1160)) < 1e-15);
}

TEST_CASE("init") {
  MuteWarnings mute;
  Exp4R e(make_config(10, 2, 116, 0.02));
  CHECK(e.beta() == Approx(0.061464).epsilon(1e-5));
  CHECK(e.round() == 0);
  for (double x : e.log_weights().values()) CHECK(x == 0.0);
  for (double x : e.vhat_sum()) CHECK(x == 0.0);

  Exp4R three(make_config(4, 3, 50, 0.1));
  const auto q = normalize_log_weights(three.log_weights());
  for (double x : q) CHECK(x == Approx(1.0 / 3));
}

TEST_CASE("config validation") {
  MuteWarnings mute;
  CHECK_THROWS_AS(Exp4R{make_config(10, 2, 100, 0.0)}, ParameterError);
  CHECK_THROWS_AS(Exp4R{make_config(10, 2, 100, 0.11)}, ParameterError);
  CHECK_THROWS_AS(Exp4R{make_config(10, 2, 0, 0.05)}, ParameterError);
  CHECK_THROWS_AS(Exp4R{make_config(10, 2, 100, 0.05, 0.0)}, ParameterError);
  CHECK_THROWS_AS(Exp4R{make_config(10, 0, 100, 0.05)}, DimensionError);
  auto dup = make_config(10, 2, 100, 0.05);
  dup.expert_ids = {3, 3};
  CHECK_THROWS_AS(Exp4R{dup}, ParameterError);
  CHECK_NOTHROW(Exp4R{make_config(10, 2, 100, 0.1)});
}

TEST_CASE("policy examples") {
  MuteWarnings mute;
  Exp4R u(make_config(4, 3, 10, 0.05));
  const auto uni = AdviceMatrix::from_rows({{.25, .25, .25, .25}, {.25, .25, .25, .25}, {.25, .25, .25, .25}});
  for (double x : u.policy(uni)) CHECK(x == Approx(0.25));

  Exp4R one(make_config(2, 1, 10, 0.1));
  const auto p = one.policy(AdviceMatrix::from_rows({{1, 0}}));
  CHECK(p[0] == Approx(0.9));
  CHECK(p[1] == Approx(0.1));

  Exp4R flat(make_config(4, 2, 10, 0.25));
  for (double x : flat.policy(AdviceMatrix::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}}))) {
    CHECK(x == Approx(0.25));
  }
}

TEST_CASE("update examples") {
  MuteWarnings mute;
  SUBCASE("zero reward only adds the variance term") {
    Exp4R e(make_config(3, 2, 5, 0.1));
    const auto adv = AdviceMatrix::from_rows({{0.2, 0.3, 0.5}, {1, 0, 0}});
    const auto p = e.policy(adv);
    e.update(adv, 1, 0.0, p.values());
    for (std::size_t i = 0; i < 2; ++i) {
      double v = 0;
      for (std::size_t b = 0; b < 3; ++b) v += adv(i, b) / p[b];
      CHECK(e.log_weights()[i] == Approx(0.05 * e.beta() * v).epsilon(1e-14));
      CHECK(e.vhat_sum()[i] == Approx(v).epsilon(1e-14));
    }
  }
  SUBCASE("uniform expert under uniform policy") {
    const double rho = 0.25;
    Exp4R e(make_config(4, 1, 5, rho));
    const auto adv = AdviceMatrix::from_rows({{.25, .25, .25, .25}});
    const auto p = e.policy(adv);
    e.update(adv, 2, 1.0, p.values());
    // yhat = r = 1, vhat = K = 4
    CHECK(e.vhat_sum()[0] == Approx(4.0));
    CHECK(e.log_weights()[0] == Approx(rho / 2 * (1.0 + e.beta() * 4.0)));
  }
  SUBCASE("point mass expert") {
    Exp4R e(make_config(2, 1, 5, 0.1));
    const auto adv = AdviceMatrix::from_rows({{1, 0}});
    const std::vector<double> p{0.9, 0.1};
    e.update(adv, 0, 1.0, p);
    CHECK(e.vhat_sum()[0] == Approx(1.0 / 0.9));
    CHECK(e.log_weights()[0] == Approx(0.05 * (1.0 / 0.9 + e.beta() / 0.9)));
  }
}

TEST_CASE("update errors and sequencing") {
  MuteWarnings mute;
  Exp4R e(make_config(2, 1, 2, 0.1));
  const auto adv = AdviceMatrix::from_rows({{1, 0}});
  auto p = e.policy(adv);
  CHECK_THROWS_AS(e.update(adv, 0, 1.5, p.values()), DomainError);
  CHECK_THROWS_AS(e.update(adv, 0, -0.1, p.values()), DomainError);
  CHECK_THROWS_AS(e.update(adv, 2, 1.0, p.values()), IndexError);
  CHECK_THROWS_AS(e.update(AdviceMatrix::from_rows({{1, 0}, {0, 1}}), 0, 1.0, p.values()),
                  DimensionError);
  CHECK_THROWS_AS(e.finalize(), SequencingError);
  e.update(adv, 0, 1.0, p.values());
  p = e.policy(adv);
  e.update(adv, 1, 0.0, p.values());
  CHECK(e.finished());
  CHECK_THROWS_AS(e.policy(adv), SequencingError);
  CHECK_THROWS_AS(e.update(adv, 0, 1.0, p.values()), SequencingError);
  CHECK_NOTHROW(e.finalize());
}

TEST_CASE("finalize thresholds") {
  MuteWarnings mute;
  // uniform expert under a uniform policy: vhat_sum = K T, eps = 2 ln(2N/delta)
  const std::size_t k = 10;
  const std::uint64_t T = 40;
  Exp4R e(make_config(k, 2, T, 0.1));
  AdviceMatrix adv(2, k);
  for (auto& x : adv.data()) x = 0.1;
  RngStream rng(1, 3);
  for (std::uint64_t t = 0; t < T; ++t) {
    const auto p = e.policy(adv);
    e.update(adv, rng.next_u64() % k, rng.next_uniform() < 0.5 ? 1.0 : 0.0, p.values());
  }
  const auto out = e.finalize();
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(out.vhat_sum[i] == Approx(static_cast<double>(k * T)));
    CHECK(out.epsilon[i] == Approx(2 * std::log(80.0)));
    CHECK(out.epsilon[i] == Approx(8.7641).epsilon(1e-4));
  }
}

TEST_CASE("rank_dominates examples") {
  Exp4ROutput out;
  out.log_w_final = LogWeightVector({5, 0});
  out.epsilon = {1, 1};
  CHECK(rank_dominates(out, 0, 1));
  CHECK_FALSE(rank_dominates(out, 1, 0));
  out.epsilon = {6, 1};
  CHECK_FALSE(rank_dominates(out, 0, 1));
  out.epsilon = {5, 1};
  CHECK_FALSE(rank_dominates(out, 0, 1));  // strict
  out.log_w_final = LogWeightVector({2, 2});
  out.epsilon = {1e-300, 1e-300};
  CHECK_FALSE(rank_dominates(out, 0, 1));
  CHECK_FALSE(rank_dominates(out, 1, 0));
  CHECK_THROWS_AS(rank_dominates(out, 0, 2), IndexError);
}

TEST_CASE("estimator identities on random triples") {
  RngStream rng(99, 5);
  for (int trial = 0; trial < 5000; ++trial) {
    const std::size_t k = 2 + rng.next_u64() % 9;
    const double rho = (0.05 + 0.95 * rng.next_uniform()) / static_cast<double>(k);
    auto p = random_simplex(rng, k);
    for (auto& x : p) x = (1.0 - k * rho) * x + rho;
    const auto xi = random_simplex(rng, k);
    std::vector<double> r(k);
    for (auto& x : r) x = rng.next_uniform();
    double y = 0, mean = 0, vhat = 0, second = 0;
    for (std::size_t a = 0; a < k; ++a) {
      y += xi[a] * r[a];
      mean += p[a] * (xi[a] * r[a] / p[a]);
      vhat += xi[a] / p[a];
    }
    for (std::size_t a = 0; a < k; ++a) {
      const double d = y - xi[a] * r[a] / p[a];
      second += p[a] * d * d;
    }
    CHECK(std::abs(mean - y) <= 1e-12);
    CHECK(second <= vhat + 1e-9);
    CHECK(vhat >= 1.0 - 1e-12);
    CHECK(vhat <= 1.0 / rho + 1e-9);
  }
}

TEST_CASE("log-weight closed form and transient bounds") {
  MuteWarnings mute;
  RngStream rng(5, 8);
  const std::size_t k = 5, n = 6;
  const std::uint64_t T = 300;
  const double rho = rho_default(n, k, T);
  Exp4R e(make_config(k, n, T, rho));
  std::vector<double> rhat(n, 0.0), vsum(n, 0.0);
  AdviceMatrix adv(n, k);
  for (std::uint64_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = random_simplex(rng, k);
      std::copy(row.begin(), row.end(), adv.row(i).begin());
    }
    const auto p = e.policy(adv);
    for (double x : p) CHECK(x >= rho - 1e-12);
    const std::size_t a = sample_categorical(p, rng);
    const double r = rng.next_uniform();
    for (std::size_t i = 0; i < n; ++i) {
      const double y = adv(i, a) * r / p[a];
      double v = 0;
      for (std::size_t b = 0; b < k; ++b) v += adv(i, b) / p[b];
      CHECK(y >= 0.0);
      CHECK(y <= 1.0 / rho + 1e-9);
      CHECK(v >= 1.0 - 1e-12);
      CHECK(v <= 1.0 / rho + 1e-9);
      rhat[i] += y;
      vsum[i] += v;
    }
    e.update(adv, a, r, p.values());
  }
  const auto out = e.finalize();
  const auto est = out.estimated_rewards();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(std::abs(out.log_w_final[i] - rho / 2 * (rhat[i] + e.beta() * vsum[i])) <= 1e-9);
    CHECK(std::abs(est[i] - rhat[i]) <= 1e-6);
  }
}

TEST_CASE("update_and_advance matches update then policy") {
  MuteWarnings mute;
  RngStream rng(17, 2);
  for (std::size_t k : {2u, 3u, 7u, 10u}) {
    const std::size_t n = 300;  // spans several blocks
    const std::uint64_t T = 60;
    const double rho = rho_default(n, k, T) / 4;
    Exp4R slow(make_config(k, n, T, rho)), fast(make_config(k, n, T, rho));
    std::vector<AdviceMatrix> rounds(T, AdviceMatrix(n, k));
    for (auto& m : rounds) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = random_simplex(rng, k);
        std::copy(row.begin(), row.end(), m.row(i).begin());
      }
    }
    AdviceMatrix cur = rounds[0];
    auto p_fast = fast.policy(cur).vector();
    std::vector<double> p_next(k);
    for (std::uint64_t t = 0; t < T; ++t) {
      const auto p_slow = slow.policy(rounds[t]);
      for (std::size_t a = 0; a < k; ++a) CHECK(std::abs(p_slow[a] - p_fast[a]) <= 1e-12);
      const std::size_t a = sample_index(p_fast, rng.next_uniform());
      const double r = rng.next_uniform() < 0.5 ? 1.0 : 0.0;
      slow.update(rounds[t], a, r, p_fast);
      if (t + 1 == T) {
        CHECK_THROWS_AS(fast.update_and_advance(cur, a, r, p_fast, {}, p_next), SequencingError);
        fast.update(cur, a, r, p_fast);
        break;
      }
      fast.update_and_advance(
          cur, a, r, p_fast,
          [&](std::size_t first, std::size_t count, std::span<double> rows) {
            std::copy_n(rounds[t + 1].data().begin() + first * k, count * k, rows.begin());
          },
          p_next);
      p_fast = p_next;
    }
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(slow.log_weights()[i] == fast.log_weights()[i]);
      CHECK(slow.vhat_sum()[i] == fast.vhat_sum()[i]);
    }
  }
}

}
