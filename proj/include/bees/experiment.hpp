#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bees/env.hpp"
#include "bees/error.hpp"
#include "bees/meta.hpp"

namespace bees {

enum class Algorithm { Exp4R, Bees, BeesLB, Exp4PTrunc };

std::string to_string(Algorithm algorithm);
// Accepts exp4r, bees, bees_lb, exp4p_trunc.
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct PoolConfig {
  PoolKind kind = PoolKind::UniformFirstUnimodal;
  UnimodalPoolSpec unimodal;                  // kind = UniformFirstUnimodal
  std::vector<double> identical;              // kind = Identical
  std::vector<std::vector<double>> table;     // kind = CustomTable

  friend bool operator==(const PoolConfig&, const PoolConfig&);
};

// Binary oblivious adversary. With an explicit `bias` vector each action has
// its own frequency of reward 1; otherwise good actions (those of the pool's
// good set, action 0 for other pool kinds) use `good_bias` and the rest
// `other_bias`.
struct AdversaryConfig {
  std::vector<double> bias;
  double good_bias = 0.7;
  double other_bias = 0.3;

  friend bool operator==(const AdversaryConfig&, const AdversaryConfig&) = default;
};

struct ExperimentConfig {
  std::vector<Algorithm> algorithms;
  std::size_t actions = 10;
  std::vector<std::uint64_t> horizons;
  double delta = 0.05;
  std::uint32_t alpha = 1;
  std::uint64_t c = 1;
  std::optional<std::uint64_t> C;  // default_C when absent
  bool anytime = true;
  bool inject_uniform = true;
  FinalEpochExperts final_epoch = FinalEpochExperts::Scheduled;
  PoolConfig pool;
  AdversaryConfig adversary;
  std::vector<std::uint64_t> seeds;
  // Benchmark experts are 1..candidate_range; when absent, four times the
  // largest expert id queried by any algorithm of the (T, seed) cell.
  std::optional<std::uint64_t> candidate_range;
  std::uint64_t exp4r_experts = 16;
  std::optional<std::uint64_t> exp4p_experts;  // T when absent
  std::string output;

  std::uint64_t resolved_C() const;
  MetaParams meta_params() const;
  // Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&);
};

// JSON document; see docs/config.md. Unknown keys, type mismatches and
// violated invariants raise ConfigError with a line:column or field location.
ExperimentConfig parse_config(std::string_view text);
// Canonical JSON with every default spelled out; parse_config inverts it.
std::string to_canonical_json(const ExperimentConfig& config);

// Rewards and pool for one (T, seed) cell.
Environment make_environment(const ExperimentConfig& config, std::uint64_t horizon,
                             std::uint64_t seed);

struct ResultRow {
  Algorithm algorithm = Algorithm::Bees;
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  double regret = 0.0;
  double total_reward = 0.0;
  std::optional<std::uint64_t> lower_bound;  // BEES.LB only
  std::uint32_t epochs = 0;
  std::optional<double> wall_ms;              // only with RunSettings::wall_time

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct RunSettings {
  unsigned threads = 1;
  bool wall_time = false;
  std::string trace_dir;  // write one trace file per run when nonempty
};

// Raised when some cells fail; carries the rows of the cells that finished.
class ExperimentError : public Error {
 public:
  ExperimentError(const std::string& what, std::vector<ResultRow> partial)
      : Error(what), partial_(std::move(partial)) {}
  const std::vector<ResultRow>& partial_rows() const noexcept { return partial_; }

 private:
  std::vector<ResultRow> partial_;
};

// Runs every (algorithm, T, seed) combination. Rows are ordered by the
// algorithm's position in the config, then T, then seed, whatever the thread
// count.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const RunSettings& settings = {});

inline constexpr std::string_view kCsvHeader =
    "algorithm,T,seed,regret,total_reward,lower_bound,epochs,wall_ms";

void write_csv(std::ostream& os, std::span<const ResultRow> rows);
std::string to_csv(std::span<const ResultRow> rows);
// Throws ConfigError with the offending line on malformed input.
std::vector<ResultRow> read_csv(std::istream& is);

struct SummaryRow {
  Algorithm algorithm = Algorithm::Bees;
  std::uint64_t horizon = 0;
  std::size_t runs = 0;
  double mean_regret = 0.0;
  double std_regret = 0.0;  // sample standard deviation, 0 for a single run
};

// Grouped by (algorithm, T), sorted by algorithm then T. Each group's
// regrets are summed in sorted order, so the result does not depend on the
// order of the input rows.
std::vector<SummaryRow> summarize(std::span<const ResultRow> rows);
void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows);

// printf("%.9g").
std::string format_decimal(double x);

}  // namespace bees
