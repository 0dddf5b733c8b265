#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "bees/error.hpp"
#include "bees/experiment.hpp"
#include "bees/log.hpp"

using namespace bees;
using doctest::Approx;

namespace {

const char* kSmall = R"({
  "algorithm": ["exp4r", "bees", "bees_lb", "exp4p_trunc"],
  "K": 10,
  "horizons": [300, 600],
  "seeds": [3, 1],
  "exp4p_experts": 32,
  "candidate_range": 40
})";

struct MuteWarnings {
  WarningHandler old = set_warning_handler([](std::string_view) {});
  ~MuteWarnings() { set_warning_handler(old); }
};

ResultRow row(Algorithm a, std::uint64_t T, std::uint64_t seed, double regret) {
  ResultRow r;
  r.algorithm = a;
  r.horizon = T;
  r.seed = seed;
  r.regret = regret;
  return r;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("minimal config gets the defaults") {
  const auto c = parse_config(R"({"algorithm": "bees_lb", "K": 10, "horizons": [1000], "seeds": "1..10"})");
  CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::BeesLB});
  CHECK(c.delta == 0.05);
  CHECK(c.alpha == 1);
  CHECK(c.c == 1);
  CHECK(c.resolved_C() == 58);
  CHECK(c.anytime);
  CHECK(c.seeds.size() == 10);
  CHECK(c.seeds.front() == 1);
  CHECK(c.seeds.back() == 10);
}

TEST_CASE("config errors name the field") {
  const auto bad = [](const std::string& text, const std::string& field) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(field) != std::string::npos);
      return;
    }
    FAIL("no ConfigError for " << text);
  };
  const std::string base = R"("algorithm": "bees", "K": 10, "seeds": [1])";
  bad("{" + base + R"(, "horizons": [1000], "delta": 0})", "delta");
  bad("{" + base + R"(, "horizons": [1000], "delta": 1.5})", "delta");
  bad("{" + base + R"(, "horizons": [1000, 500]})", "horizons");
  bad("{" + base + R"(, "horizons": []})", "horizons");
  bad("{" + base + R"(, "horizons": [1000], "bogus": 1})", "bogus");
  bad("{" + base + R"(, "horizons": "1000"})", "horizons");
  bad("{" + base + R"(, "horizons": [100]})", "horizons");  // shorter than 2C
  bad(R"({"algorithm": "bees", "K": 10, "horizons": [1000], "seeds": [1, 1]})", "seeds");
  bad(R"({"algorithm": "nope", "K": 10, "horizons": [1000], "seeds": [1]})", "algorithm");
  bad("{" + base + R"(, "horizons": [1000], "pool": {"kind": "unimodal"}})", "pool");
  bad("{" + base + R"(, "horizons": [1000], "pool": {"i_star": -3}})", "i_star");
  bad("{\n" + base + ",\n \"horizons\": [1000,\n}", "line");
}

TEST_CASE("canonical form round-trips") {
  const auto c = parse_config(kSmall);
  const auto text = to_canonical_json(c);
  const auto again = parse_config(text);
  CHECK(again == c);
  CHECK(to_canonical_json(again) == text);

  auto custom = parse_config(R"({"algorithm": ["bees"], "K": 4, "horizons": [500], "seeds": [2],
    "C": 40, "anytime": false, "pool": {"kind": "custom_table",
    "rows": [[0.25, 0.25, 0.25, 0.25], [1, 0, 0, 0]]}, "adversary": {"bias": [1, 0, 0, 0.5]}})");
  CHECK(parse_config(to_canonical_json(custom)) == custom);
}

TEST_CASE("one cell, one row") {
  MuteWarnings mute;
  auto c = parse_config(R"({"algorithm": "bees", "K": 10, "horizons": [400], "seeds": [5]})");
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].seed == 5);
  CHECK(rows[0].horizon == 400);
  CHECK(rows[0].epochs == 2);  // 348 <= 400 < 812
  CHECK_FALSE(rows[0].lower_bound);
  CHECK_FALSE(rows[0].wall_ms);
}

TEST_CASE("row order and determinism across thread counts") {
  MuteWarnings mute;
  const auto c = parse_config(kSmall);
  const auto one = run_experiment(c);
  REQUIRE(one.size() == 16);
  CHECK(one[0].algorithm == Algorithm::Exp4R);
  CHECK(one[0].horizon == 300);
  CHECK(one[0].seed == 3);
  CHECK(one[1].seed == 1);
  CHECK(one[15].algorithm == Algorithm::Exp4PTrunc);
  for (const auto& r : one) {
    CHECK((r.algorithm == Algorithm::BeesLB) == r.lower_bound.has_value());
    CHECK(std::isfinite(r.regret));
  }
  RunSettings four;
  four.threads = 4;
  const auto par = run_experiment(c, four);
  CHECK(to_csv(one) == to_csv(par));
  CHECK(to_csv(one) == to_csv(run_experiment(c)));
}

TEST_CASE("csv format") {
  std::vector<ResultRow> rows{row(Algorithm::BeesLB, 100, 1, 1.0 / 3)};
  rows[0].total_reward = 42;
  rows[0].lower_bound = 9;
  rows[0].epochs = 3;
  const auto text = to_csv(rows);
  CHECK(text == "algorithm,T,seed,regret,total_reward,lower_bound,epochs,wall_ms\n"
                "bees_lb,100,1,0.333333333,42,9,3,\n");
  CHECK(text.find('\r') == std::string::npos);
  std::istringstream is(text);
  const auto back = read_csv(is);
  REQUIRE(back.size() == 1);
  CHECK(back[0].lower_bound == 9u);
  CHECK(back[0].regret == Approx(1.0 / 3).epsilon(1e-8));

  std::istringstream broken("algorithm,T,seed,regret,total_reward,lower_bound,epochs,wall_ms\nbees,x\n");
  CHECK_THROWS_WITH_AS(read_csv(broken), doctest::Contains("line 2"), ConfigError);
}

TEST_CASE("summarize") {
  CHECK_THROWS(summarize(std::vector<ResultRow>{}));
  auto s = summarize(std::vector<ResultRow>{row(Algorithm::Bees, 10, 1, 7.5)});
  REQUIRE(s.size() == 1);
  CHECK(s[0].mean_regret == 7.5);
  CHECK(s[0].std_regret == 0.0);

  std::vector<ResultRow> rows{row(Algorithm::Bees, 10, 1, 2), row(Algorithm::Bees, 10, 2, 4)};
  s = summarize(rows);
  CHECK(s[0].mean_regret == 3.0);
  CHECK(s[0].std_regret == Approx(std::sqrt(2.0)).epsilon(1e-15));

  // permutation invariance, bit for bit
  RngStream rng(1, 1);
  std::vector<ResultRow> many;
  for (int i = 0; i < 50; ++i) {
    many.push_back(row(i % 2 ? Algorithm::Bees : Algorithm::BeesLB, 100 * (1 + i % 3), i,
                       rng.next_uniform() * 1e4));
  }
  const auto base = summarize(many);
  for (int trial = 0; trial < 20; ++trial) {
    for (std::size_t i = many.size() - 1; i > 0; --i) std::swap(many[i], many[rng.next_u64() % (i + 1)]);
    const auto again = summarize(many);
    REQUIRE(again.size() == base.size());
    for (std::size_t g = 0; g < base.size(); ++g) {
      CHECK(again[g].mean_regret == base[g].mean_regret);
      CHECK(again[g].std_regret == base[g].std_regret);
    }
  }
  CHECK(base.front().algorithm == Algorithm::Bees);
  CHECK(base.front().horizon == 100);
}

TEST_CASE("format_decimal") {
  CHECK(format_decimal(3.0) == "3");
  CHECK(format_decimal(1234567.891) == "1234567.89");
  CHECK(format_decimal(-0.125) == "-0.125");
}

}
