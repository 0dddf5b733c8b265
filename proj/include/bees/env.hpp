#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bees/core.hpp"
#include "bees/rng.hpp"
#include "bees/trace.hpp"

namespace bees {

// Rounds and global expert ids are 1-based; actions are 0-based.

// Closed round interval [first, last]; empty when first > last.
struct Interval {
  std::uint64_t first = 1;
  std::uint64_t last = 0;

  bool empty() const noexcept { return first > last; }
  std::uint64_t size() const noexcept { return empty() ? 0 : last - first + 1; }
};

// Closed range of global expert ids [first, last].
struct ExpertRange {
  std::uint64_t first = 1;
  std::uint64_t last = 1;

  std::uint64_t size() const noexcept { return last >= first ? last - first + 1 : 0; }
};

// Oblivious adversary: every reward is fixed before the first round.
class RewardTable {
 public:
  RewardTable() = default;
  // `rewards` is row-major T x K; all entries must lie in [0, 1].
  RewardTable(std::size_t actions, std::vector<double> rewards, RngStream origin = {});

  std::uint64_t horizon() const noexcept { return horizon_; }
  std::size_t actions() const noexcept { return actions_; }
  const RngStream& origin() const noexcept { return origin_; }
  double reward(std::uint64_t t, std::size_t a) const;
  // Reward vector r(t); unchecked.
  std::span<const double> round(std::uint64_t t) const noexcept {
    return {rewards_.data() + (t - 1) * actions_, actions_};
  }

  friend bool operator==(const RewardTable& a, const RewardTable& b) {
    return a.actions_ == b.actions_ && a.rewards_ == b.rewards_;
  }

 private:
  std::size_t actions_ = 0;
  std::uint64_t horizon_ = 0;
  std::vector<double> rewards_;
  RngStream origin_;
};

// r_a(t) = 1 with frequency bias[a], else 0, drawn from a counter-based
// stream so that entry (t, a) depends only on (seed, t, a).
RewardTable make_binary_adversary(std::uint64_t seed, std::uint64_t horizon, std::size_t actions,
                                  std::span<const double> bias);

enum class PoolKind { UniformFirstUnimodal, Identical, CustomTable };

std::string to_string(PoolKind kind);

// Countably infinite sequence of experts with deterministic advice.
class ExpertPool {
 public:
  virtual ~ExpertPool() = default;

  virtual PoolKind kind() const noexcept = 0;
  virtual std::size_t actions() const noexcept = 0;
  // True when expert `id` advises the uniform distribution in every round.
  virtual bool is_uniform(std::uint64_t id) const noexcept = 0;
  // Writes the advice of experts first, ..., first + count - 1 at round t into
  // consecutive rows of `out` (count * K entries).
  virtual void fill_advice(std::uint64_t first, std::size_t count, std::uint64_t t,
                           std::span<double> out) const = 0;

  ProbVector advice(std::uint64_t id, std::uint64_t t) const;
  // Arbitrary id list; id 0 is the synthetic uniform advisor.
  void fill_advice(std::span<const std::uint64_t> ids, std::uint64_t t, std::span<double> out) const;
};

// Every expert gives the same time-invariant advice.
class IdenticalPool final : public ExpertPool {
 public:
  explicit IdenticalPool(ProbVector advice);

  PoolKind kind() const noexcept override { return PoolKind::Identical; }
  std::size_t actions() const noexcept override { return advice_.size(); }
  bool is_uniform(std::uint64_t id) const noexcept override;
  void fill_advice(std::uint64_t first, std::size_t count, std::uint64_t t,
                   std::span<double> out) const override;
  using ExpertPool::fill_advice;

 private:
  ProbVector advice_;
  bool uniform_ = false;
};

// Explicit time-invariant advice for experts 1..rows.size(); experts past the
// table repeat the last row.
class CustomTablePool final : public ExpertPool {
 public:
  explicit CustomTablePool(std::vector<ProbVector> rows);

  PoolKind kind() const noexcept override { return PoolKind::CustomTable; }
  std::size_t actions() const noexcept override { return rows_.front().size(); }
  bool is_uniform(std::uint64_t id) const noexcept override;
  void fill_advice(std::uint64_t first, std::size_t count, std::uint64_t t,
                   std::span<double> out) const override;
  using ExpertPool::fill_advice;

  std::size_t table_size() const noexcept { return rows_.size(); }

 private:
  const ProbVector& row_for(std::uint64_t id) const noexcept;

  std::vector<ProbVector> rows_;
  std::vector<bool> uniform_;
};

// Concentration level of expert i on the good-action set. Levels ramp
// linearly from the uniform level |G|/K at expert 1 to `peak` at i_star and
// then decay geometrically toward `tail` with ratio `decay`. When `levels` is
// nonempty it overrides the ramp for experts 1..levels.size() and the
// geometric tail starts from its last entry.
struct QualityProfile {
  double peak = 0.9;
  double tail = 0.1;
  double decay = 0.8;
  std::vector<double> levels;
};

struct UnimodalPoolSpec {
  std::size_t actions = 10;
  std::uint64_t i_star = 9;
  std::uint64_t pool_depth = 64;  // experts covered by validation and oracle scans
  double noise_std = 0.01;
  std::vector<std::size_t> good_actions{0};
  // How the off-good mass 1 - q is split over the other actions. Empty means
  // evenly; otherwise K nonnegative weights, zero on good actions.
  std::vector<double> off_weights;
  QualityProfile quality;

  double uniform_level() const noexcept;
  // Pre-noise concentration of expert i (i >= 1).
  double level(std::uint64_t i) const noexcept;
  // Throws ParameterError on out-of-range values or a non-unimodal profile
  // over 1..pool_depth.
  void validate() const;
};

// Expert 1 is exactly uniform. Expert i >= 2 puts level(i) on the good
// actions and spreads the rest by off_weights (evenly by default), adds iid N(0, noise_std^2) to every
// entry and projects back onto the simplex. The noise for (i, t) is
// regenerated from a counter-based stream on every query: word w of the noise
// is mix64(key_i + (t * W + w + 1) * golden) with key_i the i-th draw of the
// pool's stream and W = ceil(K / 5); each word yields five 12-bit normal
// draws.
class UnimodalPool final : public ExpertPool {
 public:
  UnimodalPool(UnimodalPoolSpec spec, std::uint64_t seed);

  PoolKind kind() const noexcept override { return PoolKind::UniformFirstUnimodal; }
  std::size_t actions() const noexcept override { return spec_.actions; }
  bool is_uniform(std::uint64_t id) const noexcept override { return id == 1; }
  void fill_advice(std::uint64_t first, std::size_t count, std::uint64_t t,
                   std::span<double> out) const override;
  using ExpertPool::fill_advice;

  const UnimodalPoolSpec& spec() const noexcept { return spec_; }
  // Advice of expert i before noise.
  ProbVector base_advice(std::uint64_t id) const;

 private:
  template <std::size_t StaticK>
  void fill_noisy(std::uint64_t first, std::size_t count, std::uint64_t t,
                  std::span<double> out) const;

  UnimodalPoolSpec spec_;
  RngStream noise_;
  std::vector<char> is_good_;
  std::size_t good_count_ = 0;
  // Pre-noise rows of experts 1..base_rows_; past stable_from_ the level no
  // longer changes in double precision and the last row is reused.
  std::vector<double> base_;
  std::uint64_t base_rows_ = 0;
  std::uint64_t stable_from_ = 0;
};

// Discretized standard normal: maps the low 12 bits k to
// Phi^{-1}((k + 0.5) / 4096).
inline constexpr unsigned kNormalBits = 12;
double normal_from_bits(std::uint32_t bits) noexcept;

// A reward table together with the expert pool that advises on it.
struct Environment {
  RewardTable rewards;
  std::shared_ptr<const ExpertPool> pool;

  std::size_t actions() const noexcept { return rewards.actions(); }
  std::uint64_t horizon() const noexcept { return rewards.horizon(); }
  // Throws DimensionError if the pool and the table disagree on K.
  void validate() const;
};

// y_i(t) = sum_a xi^i_a(t) r_a(t).
double expected_reward(const ExpertPool& pool, const RewardTable& rewards, std::uint64_t id,
                       std::uint64_t t);

// R_i(interval); zero on an empty interval.
double cumulative_reward(const ExpertPool& pool, const RewardTable& rewards, std::uint64_t id,
                         Interval interval);

struct OracleReport {
  Interval interval;
  ExpertRange range;
  std::vector<double> cumulative;  // R_i for i in range, in order
  std::uint64_t best = 0;          // lowest id attaining the maximum
  double best_reward = 0.0;
};

// One pass over the interval computing R_i for every expert in the range.
OracleReport oracle_scan(const ExpertPool& pool, const RewardTable& rewards, Interval interval,
                         ExpertRange range);

// min argmax_{i in range} R_i(interval).
std::uint64_t best_expert(const ExpertPool& pool, const RewardTable& rewards, Interval interval,
                          ExpertRange range);

// R_{i*}([1, T]) - sum of realized rewards, with i* = best_expert over range.
double compute_regret(const RunTrace& trace, const ExpertPool& pool, const RewardTable& rewards,
                      ExpertRange range);
// Same, with the benchmark reward already known.
double compute_regret(const RunTrace& trace, double best_cumulative_reward);

// Two-sided concentration bound on R_i - Rhat_i for every expert of the
// epoch, evaluated with oracle rewards over the epoch's rounds.
bool check_concentration_event(const EpochRecord& record, const ExpertPool& pool,
                               const RewardTable& rewards, double delta);

}  // namespace bees
