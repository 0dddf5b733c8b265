#include "bees/env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <limits>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "bees/error.hpp"
#include "kdispatch.hpp"

namespace bees {

// ---------------------------------------------------------------------------
// Rewards

RewardTable::RewardTable(std::size_t actions, std::vector<double> rewards, RngStream origin)
    : actions_(actions), rewards_(std::move(rewards)), origin_(origin) {
  if (actions_ == 0) throw ParameterError("reward table needs K >= 1");
  if (rewards_.size() % actions_ != 0) {
    throw DimensionError("reward data is not a whole number of K-vectors");
  }
  horizon_ = rewards_.size() / actions_;
  for (double r : rewards_) {
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("rewards must lie in [0, 1]");
  }
}

double RewardTable::reward(std::uint64_t t, std::size_t a) const {
  if (t < 1 || t > horizon_) throw IndexError("round " + std::to_string(t) + " outside [1, T]");
  if (a >= actions_) throw IndexError("action index out of range");
  return rewards_[(t - 1) * actions_ + a];
}

RewardTable make_binary_adversary(std::uint64_t seed, std::uint64_t horizon, std::size_t actions,
                                  std::span<const double> bias) {
  if (horizon == 0 || actions == 0) throw ParameterError("adversary needs T >= 1 and K >= 1");
  if (bias.size() != actions) {
    throw DimensionError("bias profile has " + std::to_string(bias.size()) +
                         " entries, expected K=" + std::to_string(actions));
  }
  for (double b : bias) {
    if (!(b >= 0.0 && b <= 1.0)) throw ParameterError("bias entries must lie in [0, 1]");
  }
  const RngStream stream(seed, streams::kAdversary);
  std::vector<double> r(horizon * actions);
  for (std::uint64_t n = 0; n < r.size(); ++n) {
    // u < 1 always, so bias 1 gives all ones and bias 0 all zeros.
    r[n] = RngStream::to_unit(stream.at(n)) < bias[n % actions] ? 1.0 : 0.0;
  }
  return RewardTable(actions, std::move(r), stream);
}

// ---------------------------------------------------------------------------
// Pools

std::string to_string(PoolKind kind) {
  switch (kind) {
    case PoolKind::UniformFirstUnimodal: return "uniform_first_unimodal";
    case PoolKind::Identical: return "identical";
    case PoolKind::CustomTable: return "custom_table";
  }
  return "unknown";
}

ProbVector ExpertPool::advice(std::uint64_t id, std::uint64_t t) const {
  if (id == 0) throw IndexError("expert ids start at 1");
  std::vector<double> row(actions());
  fill_advice(id, 1, t, row);
  return ProbVector::unchecked(std::move(row));
}

void ExpertPool::fill_advice(std::span<const std::uint64_t> ids, std::uint64_t t,
                             std::span<double> out) const {
  const std::size_t k = actions();
  std::size_t j = 0;
  while (j < ids.size()) {
    if (ids[j] == 0) {
      std::fill_n(out.begin() + j * k, k, 1.0 / static_cast<double>(k));
      ++j;
      continue;
    }
    // Batch contiguous runs of ids into one call.
    std::size_t run = 1;
    while (j + run < ids.size() && ids[j + run] == ids[j] + run) ++run;
    fill_advice(ids[j], run, t, out.subspan(j * k, run * k));
    j += run;
  }
}

IdenticalPool::IdenticalPool(ProbVector advice) : advice_(std::move(advice)) {
  if (advice_.empty()) throw DimensionError("advice must be nonempty");
  const double u = 1.0 / static_cast<double>(advice_.size());
  uniform_ = std::all_of(advice_.begin(), advice_.end(), [u](double x) { return x == u; });
}

bool IdenticalPool::is_uniform(std::uint64_t) const noexcept { return uniform_; }

void IdenticalPool::fill_advice(std::uint64_t, std::size_t count, std::uint64_t,
                                std::span<double> out) const {
  const std::size_t k = advice_.size();
  for (std::size_t j = 0; j < count; ++j) {
    std::copy(advice_.begin(), advice_.end(), out.begin() + j * k);
  }
}

CustomTablePool::CustomTablePool(std::vector<ProbVector> rows) : rows_(std::move(rows)) {
  if (rows_.empty() || rows_.front().empty()) throw DimensionError("advice table must be nonempty");
  const std::size_t k = rows_.front().size();
  const double u = 1.0 / static_cast<double>(k);
  for (const auto& r : rows_) {
    if (r.size() != k) throw DimensionError("ragged advice table");
    uniform_.push_back(std::all_of(r.begin(), r.end(), [u](double x) { return x == u; }));
  }
}

const ProbVector& CustomTablePool::row_for(std::uint64_t id) const noexcept {
  return rows_[std::min<std::uint64_t>(id, rows_.size()) - 1];
}

bool CustomTablePool::is_uniform(std::uint64_t id) const noexcept {
  return id >= 1 && uniform_[std::min<std::uint64_t>(id, rows_.size()) - 1];
}

void CustomTablePool::fill_advice(std::uint64_t first, std::size_t count, std::uint64_t,
                                  std::span<double> out) const {
  if (first == 0) throw IndexError("expert ids start at 1");
  const std::size_t k = actions();
  for (std::size_t j = 0; j < count; ++j) {
    const auto& r = row_for(first + j);
    std::copy(r.begin(), r.end(), out.begin() + j * k);
  }
}

namespace {

constexpr std::size_t kNormalLevels = std::size_t{1} << kNormalBits;
constexpr std::uint64_t kNormalMask = kNormalLevels - 1;
constexpr std::size_t kDrawsPerWord = 64 / kNormalBits;

const double* normal_table() noexcept {
  static const auto table = [] {
    std::array<double, kNormalLevels> t{};
    const boost::math::normal_distribution<double> standard;
    for (std::size_t k = 0; k < t.size(); ++k) {
      t[k] = boost::math::quantile(standard, (static_cast<double>(k) + 0.5) /
                                                 static_cast<double>(kNormalLevels));
    }
    return t;
  }();
  return table.data();
}

// Rows past this many experts are built on the fly instead of cached.
constexpr std::uint64_t kMaxBaseRows = 1 << 14;

}  // namespace

double normal_from_bits(std::uint32_t bits) noexcept { return normal_table()[bits & kNormalMask]; }

double UnimodalPoolSpec::uniform_level() const noexcept {
  return static_cast<double>(good_actions.size()) / static_cast<double>(actions);
}

double UnimodalPoolSpec::level(std::uint64_t i) const noexcept {
  if (i <= 1) return uniform_level();
  const auto& q = quality;
  std::uint64_t tail_start;
  double tail_from;
  if (!q.levels.empty()) {
    if (i <= q.levels.size()) return q.levels[i - 1];
    tail_start = q.levels.size();
    tail_from = q.levels.back();
  } else {
    if (i <= i_star) {
      const double frac = static_cast<double>(i - 1) / static_cast<double>(i_star - 1);
      return uniform_level() + frac * (q.peak - uniform_level());
    }
    tail_start = i_star;
    tail_from = q.peak;
  }
  return q.tail + (tail_from - q.tail) * std::pow(q.decay, static_cast<double>(i - tail_start));
}

void UnimodalPoolSpec::validate() const {
  if (actions == 0) throw ParameterError("unimodal pool needs K >= 1");
  if (i_star < 1) throw ParameterError("i_star must be >= 1");
  if (pool_depth < i_star) throw ParameterError("pool_depth must be >= i_star");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ParameterError("noise_std must be finite and >= 0");
  }
  if (good_actions.empty()) throw ParameterError("good action set must be nonempty");
  std::vector<char> seen(actions, 0);
  for (std::size_t a : good_actions) {
    if (a >= actions) throw ParameterError("good action index out of range");
    if (seen[a]) throw ParameterError("duplicate good action");
    seen[a] = 1;
  }
  if (!off_weights.empty()) {
    if (off_weights.size() != actions) throw ParameterError("off_weights needs K entries");
    double total = 0.0;
    for (std::size_t a = 0; a < actions; ++a) {
      const double w = off_weights[a];
      if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("off_weights must be finite and >= 0");
      if (seen[a] && w != 0.0) throw ParameterError("off_weights must be 0 on good actions");
      total += w;
    }
    if (good_actions.size() < actions && !(total > 0.0)) {
      throw ParameterError("off_weights must have positive mass off the good set");
    }
  }
  const auto& q = quality;
  if (!(q.decay >= 0.0 && q.decay <= 1.0)) throw ParameterError("decay must lie in [0, 1]");
  for (double x : {q.peak, q.tail}) {
    if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("quality levels must lie in [0, 1]");
  }
  for (double x : q.levels) {
    if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("quality levels must lie in [0, 1]");
  }
  for (std::uint64_t i = 2; i <= pool_depth; ++i) {
    const double prev = level(i - 1);
    const double cur = level(i);
    if (i <= i_star && cur < prev) {
      throw ParameterError("quality profile decreases before i_star at expert " +
                           std::to_string(i));
    }
    if (i > i_star && cur > prev) {
      throw ParameterError("quality profile increases after i_star at expert " +
                           std::to_string(i));
    }
  }
}

UnimodalPool::UnimodalPool(UnimodalPoolSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), noise_(seed, streams::kPoolNoise) {
  spec_.validate();
  is_good_.assign(spec_.actions, 0);
  for (std::size_t a : spec_.good_actions) is_good_[a] = 1;
  good_count_ = spec_.good_actions.size();
  // Past the ramp the profile is geometric; find where it stops changing in
  // double precision.
  std::uint64_t i = std::max<std::uint64_t>(spec_.i_star, spec_.quality.levels.size()) + 1;
  for (; i < (1ULL << 24); ++i) {
    if (spec_.level(i) == spec_.level(i - 1)) break;
  }
  stable_from_ = i;
  base_rows_ = std::min(stable_from_, kMaxBaseRows);
  const std::size_t k = spec_.actions;
  base_.resize(base_rows_ * k);
  for (std::uint64_t id = 1; id <= base_rows_; ++id) {
    const auto row = base_advice(id);
    std::copy(row.begin(), row.end(), base_.begin() + (id - 1) * k);
  }
}

ProbVector UnimodalPool::base_advice(std::uint64_t id) const {
  if (id == 0) throw IndexError("expert ids start at 1");
  const std::size_t k = spec_.actions;
  if (id == 1 || good_count_ == k) return ProbVector::uniform(k);
  const double q = spec_.level(std::min(id, stable_from_));
  const double on_good = q / static_cast<double>(good_count_);
  std::vector<double> p(k);
  const auto& w = spec_.off_weights;
  if (w.empty()) {
    const double off_good = (1.0 - q) / static_cast<double>(k - good_count_);
    for (std::size_t a = 0; a < k; ++a) p[a] = is_good_[a] ? on_good : off_good;
  } else {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t a = 0; a < k; ++a) p[a] = is_good_[a] ? on_good : (1.0 - q) * w[a] / total;
  }
  return ProbVector::unchecked(std::move(p));
}

void UnimodalPool::fill_advice(std::uint64_t first, std::size_t count, std::uint64_t t,
                               std::span<double> out) const {
  if (first == 0) throw IndexError("expert ids start at 1");
  detail::dispatch_actions(spec_.actions, [&](auto static_k) {
    fill_noisy<decltype(static_k)::value>(first, count, t, out);
  });
}

template <std::size_t StaticK>
void UnimodalPool::fill_noisy(std::uint64_t first, std::size_t count, std::uint64_t t,
                              std::span<double> out) const {
  const std::size_t k = StaticK ? StaticK : spec_.actions;
  const double uniform = 1.0 / static_cast<double>(k);
  const double sigma = spec_.noise_std;
  const std::uint64_t words = (k + kDrawsPerWord - 1) / kDrawsPerWord;
  const double* normal = normal_table();
  const std::uint64_t word_base = (t * words + 1) * RngStream::kGolden;
  std::vector<double> scratch;
  constexpr std::size_t kStack = 60;
  double noise_buf[kStack];
  double* noise = noise_buf;
  if (words * kDrawsPerWord > kStack) {
    scratch.resize(words * kDrawsPerWord);
    noise = scratch.data();
  }
  ProbVector far_row;

  for (std::size_t j = 0; j < count; ++j) {
    const std::uint64_t id = first + j;
    double* row = out.data() + j * k;
    if (id == 1 || good_count_ == k) {
      std::fill_n(row, k, uniform);
      continue;
    }
    const double* base;
    if (id <= base_rows_) {
      base = base_.data() + (id - 1) * k;
    } else if (stable_from_ <= base_rows_) {
      base = base_.data() + (base_rows_ - 1) * k;
    } else {
      far_row = base_advice(id);
      base = far_row.values().data();
    }
    if (sigma == 0.0) {
      std::copy_n(base, k, row);
      continue;
    }
    const std::uint64_t key = noise_.at(id) + word_base;
    for (std::uint64_t w = 0; w < words; ++w) {
      std::uint64_t bits = mix64(key + w * RngStream::kGolden);
      double* dst = noise + w * kDrawsPerWord;
      for (std::size_t d = 0; d < kDrawsPerWord; ++d) {
        dst[d] = normal[bits & kNormalMask];
        bits >>= kNormalBits;
      }
    }
    // Projection back onto the simplex: clamp, then renormalize.
    double sum = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      const double x = std::max(base[a] + sigma * noise[a], 0.0);
      row[a] = x;
      sum += x;
    }
    if (sum > 0.0) {
      const double inv = 1.0 / sum;
      for (std::size_t a = 0; a < k; ++a) row[a] *= inv;
    } else {
      std::fill_n(row, k, uniform);
    }
  }
}

void Environment::validate() const {
  if (!pool) throw ParameterError("environment has no expert pool");
  if (pool->actions() != rewards.actions()) {
    throw DimensionError("pool advises on " + std::to_string(pool->actions()) +
                         " actions but the reward table has " +
                         std::to_string(rewards.actions()));
  }
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

void check_round(const RewardTable& rewards, std::uint64_t t) {
  if (t < 1 || t > rewards.horizon()) {
    throw IndexError("round " + std::to_string(t) + " outside [1, " +
                     std::to_string(rewards.horizon()) + "]");
  }
}

void check_pool(const ExpertPool& pool, const RewardTable& rewards) {
  if (pool.actions() != rewards.actions()) throw DimensionError("pool and rewards disagree on K");
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double expected_reward(const ExpertPool& pool, const RewardTable& rewards, std::uint64_t id,
                       std::uint64_t t) {
  check_pool(pool, rewards);
  check_round(rewards, t);
  if (id == 0) throw IndexError("expert ids start at 1");
  return dot(pool.advice(id, t).values(), rewards.round(t));
}

double cumulative_reward(const ExpertPool& pool, const RewardTable& rewards, std::uint64_t id,
                         Interval interval) {
  if (interval.empty()) return 0.0;
  return oracle_scan(pool, rewards, interval, {id, id}).cumulative.front();
}

OracleReport oracle_scan(const ExpertPool& pool, const RewardTable& rewards, Interval interval,
                         ExpertRange range) {
  check_pool(pool, rewards);
  if (range.first == 0) throw IndexError("expert ids start at 1");
  if (range.size() == 0) throw ParameterError("candidate range is empty");
  if (!interval.empty()) {
    check_round(rewards, interval.first);
    check_round(rewards, interval.last);
  }
  const std::size_t k = rewards.actions();
  const std::size_t m = range.size();
  OracleReport rep;
  rep.interval = interval;
  rep.range = range;
  rep.cumulative.assign(m, 0.0);
  std::vector<double> buf(m * k);
  for (std::uint64_t t = interval.first; !interval.empty() && t <= interval.last; ++t) {
    pool.fill_advice(range.first, m, t, buf);
    const auto r = rewards.round(t);
    for (std::size_t j = 0; j < m; ++j) {
      rep.cumulative[j] += dot({buf.data() + j * k, k}, r);
    }
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < m; ++j) {
    if (rep.cumulative[j] > rep.cumulative[best]) best = j;
  }
  rep.best = range.first + best;
  rep.best_reward = rep.cumulative[best];
  return rep;
}

std::uint64_t best_expert(const ExpertPool& pool, const RewardTable& rewards, Interval interval,
                          ExpertRange range) {
  return oracle_scan(pool, rewards, interval, range).best;
}

double compute_regret(const RunTrace& trace, double best_cumulative_reward) {
  return best_cumulative_reward - trace.total_reward;
}

double compute_regret(const RunTrace& trace, const ExpertPool& pool, const RewardTable& rewards,
                      ExpertRange range) {
  if (trace.horizon != rewards.horizon() || trace.rounds.size() != rewards.horizon()) {
    throw ParameterError("trace covers " + std::to_string(trace.rounds.size()) +
                         " rounds but the reward table has " + std::to_string(rewards.horizon()));
  }
  const auto rep = oracle_scan(pool, rewards, {1, rewards.horizon()}, range);
  return compute_regret(trace, rep.best_reward);
}

bool check_concentration_event(const EpochRecord& record, const ExpertPool& pool,
                               const RewardTable& rewards, double delta) {
  const auto& out = record.output;
  const std::size_t n = out.experts();
  if (n == 0 || out.log_w_final.size() != n || out.vhat_sum.size() != n || !(out.rho > 0.0) ||
      out.horizon == 0 || out.actions == 0) {
    throw Error("epoch record lacks the audit data needed for the concentration check");
  }
  if (!(delta > 0.0) || delta > 1.0) throw ParameterError("delta must lie in (0, 1]");
  check_pool(pool, rewards);

  const std::size_t k = out.actions;
  const Interval interval{record.first_round, record.first_round + out.horizon - 1};
  check_round(rewards, interval.first);
  check_round(rewards, interval.last);

  std::vector<double> oracle(n, 0.0);
  std::vector<double> buf(n * k);
  for (std::uint64_t t = interval.first; t <= interval.last; ++t) {
    pool.fill_advice(out.expert_ids, t, buf);
    const auto r = rewards.round(t);
    for (std::size_t i = 0; i < n; ++i) oracle[i] += dot({buf.data() + i * k, k}, r);
  }

  const double kt = static_cast<double>(k) * static_cast<double>(out.horizon);
  const double ln_n = std::log(static_cast<double>(n));
  const double log_term = std::log(2.0 * static_cast<double>(n) / delta);
  const auto estimated = out.estimated_rewards();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = out.vhat_sum[i];
    const double lower = ln_n > 0.0 ? -log_term * std::sqrt(kt / ln_n) - std::sqrt(ln_n / kt) * v
                                    : -std::numeric_limits<double>::infinity();
    const double upper = std::sqrt(log_term) * (v / std::sqrt(kt) + std::sqrt(kt));
    const double gap = oracle[i] - estimated[i];
    if (!(lower <= gap && gap <= upper)) return false;
  }
  return true;
}

}  // namespace bees
