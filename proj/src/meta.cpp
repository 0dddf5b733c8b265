#include "bees/meta.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "bees/error.hpp"

namespace bees {

void MetaParams::validate() const {
  if (!(delta > 0.0) || delta > 1.0) throw ParameterError("delta must lie in (0, 1]");
  if (alpha < 1) throw ParameterError("alpha must be >= 1");
  if (c < 1) throw ParameterError("c must be >= 1");
}

std::uint64_t default_C(std::uint32_t alpha, std::uint64_t c, std::size_t actions, double delta) {
  if (alpha < 1 || c < 1 || actions < 1) throw ParameterError("alpha, c and K must be >= 1");
  if (!(delta > 0.0) || delta > 1.0) throw ParameterError("delta must lie in (0, 1]");
  const double log_term =
      std::log(16.0) + 4.0 * std::log(static_cast<double>(c)) - std::log(delta);
  const double value = static_cast<double>(alpha) * static_cast<double>(actions) * log_term;
  return static_cast<std::uint64_t>(std::ceil(value));
}

EpochCount epoch_count(std::uint64_t horizon, std::uint64_t C) {
  if (C < 1) throw ParameterError("C must be >= 1");
  if (horizon / 2 < C) {
    throw ParameterError("horizon " + std::to_string(horizon) + " is shorter than one epoch (2C = " +
                         std::to_string(2 * C) + ")");
  }
  // floor(log2(1 + T / (2C))) is the largest L with 2C (2^L - 1) <= T.
  std::uint32_t L = 1;
  while (L < 62) {
    const std::uint64_t span = (std::uint64_t{1} << (L + 1)) - 1;
    if (span > horizon / (2 * C) + 1 || 2 * C * span > horizon) break;
    ++L;
  }
  const std::uint64_t before_last = C * ((std::uint64_t{1} << L) - 2);
  return {L, horizon - before_last};
}

std::vector<std::uint64_t> epoch_lengths(std::uint64_t horizon, std::uint64_t C) {
  const auto count = epoch_count(horizon, C);
  std::vector<std::uint64_t> lengths;
  for (std::uint32_t l = 1; l < count.epochs; ++l) lengths.push_back(C << l);
  lengths.push_back(count.last_length);
  return lengths;
}

namespace {

std::uint64_t checked_shift(std::uint64_t base, std::uint64_t shift, const char* what) {
  if (shift >= 63 || base > (std::numeric_limits<std::uint64_t>::max() >> shift)) {
    throw ResourceError(std::string(what) + " overflows 64-bit integers");
  }
  return base << shift;
}

double schedule_rho(std::uint64_t experts, std::size_t actions, std::uint64_t length) {
  const double rho = rho_default(experts, actions, length);
  if (rho > 1.0 / static_cast<double>(actions)) {
    throw ParameterError("exploration floor " + std::to_string(rho) +
                         " exceeds 1/K; the epoch is too short for " + std::to_string(experts) +
                         " experts (increase C)");
  }
  return rho;
}

}  // namespace

EpochSchedule make_schedule(std::uint32_t l, std::uint32_t alpha, std::uint64_t c, std::uint64_t C,
                            std::size_t actions, std::uint64_t window_start) {
  if (l < 1) throw ParameterError("epoch index starts at 1");
  if (window_start < 1) throw ParameterError("window start must be >= 1");
  EpochSchedule s;
  s.index = l;
  s.experts = checked_shift(c, static_cast<std::uint64_t>(alpha) * l, "N_l");
  s.length = checked_shift(C, l, "T_l");
  if (window_start > std::numeric_limits<std::uint64_t>::max() - s.experts) {
    throw ResourceError("expert window overflows 64-bit ids");
  }
  s.window_start = window_start;
  s.rho = schedule_rho(s.experts, actions, s.length);
  return s;
}

std::uint64_t pts(std::span<const double> log_w, std::span<const double> epsilon,
                  std::uint64_t i_lower) {
  if (log_w.size() != epsilon.size()) throw DimensionError("log_w and epsilon differ in length");
  if (log_w.empty()) throw DimensionError("PTS needs at least one expert");
  if (i_lower < 1) throw ParameterError("lower bound must be >= 1");
  const std::size_t n = log_w.size();
  std::size_t j_low = 1;
  for (std::size_t j = 1; j <= n - 1; ++j) {
    for (std::size_t jp = j + 1; jp <= n; ++jp) {
      if (log_w[jp - 1] - log_w[j - 1] > epsilon[jp - 1]) j_low = j + 1;
    }
  }
  return i_lower + j_low - 1;
}

std::uint64_t pts_fast(std::span<const double> log_w, std::span<const double> epsilon,
                       std::uint64_t i_lower) {
  if (log_w.size() != epsilon.size()) throw DimensionError("log_w and epsilon differ in length");
  if (log_w.empty()) throw DimensionError("PTS needs at least one expert");
  if (i_lower < 1) throw ParameterError("lower bound must be >= 1");
  const std::size_t n = log_w.size();

  double max_lw = 0.0;
  double max_eps = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    max_lw = std::max(max_lw, std::abs(log_w[j]));
    max_eps = std::max(max_eps, std::abs(epsilon[j]));
  }
  // Bound on the rounding gap between (a - e) - b and the literal (a - b) > e.
  const double margin = 8.0 * DBL_EPSILON * (2.0 * max_lw + max_eps);

  // Walk j downward (0-based) keeping the suffix max of ln w_j' - eps_j'
  // over j' > j; the first j that is dominated is the largest one.
  double suffix = -std::numeric_limits<double>::infinity();
  for (std::size_t j = n - 1; j-- > 0;) {
    suffix = std::max(suffix, log_w[j + 1] - epsilon[j + 1]);
    const double gap = suffix - log_w[j];
    if (gap < -margin) continue;
    bool dominated = gap > margin;
    for (std::size_t jp = j + 1; !dominated && jp < n; ++jp) {
      dominated = log_w[jp] - log_w[j] > epsilon[jp];
    }
    if (dominated) return i_lower + (j + 1);
  }
  return i_lower;
}

namespace {

std::string echo(const char* algorithm, const MetaParams& p, std::uint64_t C) {
  std::ostringstream os;
  os << algorithm << " delta=" << p.delta << " alpha=" << p.alpha << " c=" << p.c << " C=" << C
     << " anytime=" << (p.anytime ? "true" : "false")
     << " inject_uniform=" << (p.inject_uniform ? "true" : "false") << " final_epoch="
     << (p.final_epoch == FinalEpochExperts::Scheduled ? "scheduled" : "grow");
  return os.str();
}

// Plays one learner over rounds first_round .. first_round + T - 1 and appends
// the rounds to the trace.
struct EpochResult {
  Exp4ROutput output;
  double reward = 0.0;
};

EpochResult play(const Environment& env, const Exp4RConfig& config, std::uint64_t first_round,
                 RngStream& rng, RunTrace& trace, const RunOptions& options) {
  Exp4R learner(config);
  const std::size_t k = config.actions;
  const std::size_t n = config.experts();
  AdviceMatrix advice(n, k);
  std::vector<double> q(n);
  std::vector<double> p(k);
  double total = 0.0;
  const std::span<const std::uint64_t> ids = config.expert_ids;
  std::uint64_t t = first_round;
  env.pool->fill_advice(ids, t, advice.data());
  learner.policy_into(advice, q, p);
  std::vector<double> p_next(k);
  for (std::uint64_t s = 0; s < config.horizon; ++s, ++t) {
    if (options.observer) options.observer(t, p);
    const std::size_t a = sample_index(p, rng.next_uniform());
    const double r = env.rewards.round(t)[a];
    trace.rounds.push_back({static_cast<std::uint32_t>(a), r, hash_policy(p)});
    total += r;
    if (s + 1 == config.horizon) {
      learner.update(advice, a, r, p);
      break;
    }
    learner.update_and_advance(
        advice, a, r, p,
        [&](std::size_t first, std::size_t count, std::span<double> rows) {
          env.pool->fill_advice(ids.subspan(first, count), t + 1, rows);
        },
        p_next);
    std::swap(p, p_next);
  }
  return {learner.finalize(), total};
}

void check_env(const Environment& env, std::uint64_t horizon) {
  env.validate();
  if (horizon < 1) throw ParameterError("horizon must be positive");
  if (horizon > env.horizon()) {
    throw ParameterError("environment provides " + std::to_string(env.horizon()) +
                         " rounds, run needs " + std::to_string(horizon));
  }
}

RunTrace run_epochs(const Environment& env, std::uint64_t horizon, const MetaParams& params,
                    RngStream rng, const RunOptions& options, bool lower_bound) {
  params.validate();
  check_env(env, horizon);
  const std::size_t k = env.actions();
  const std::uint64_t C = params.C ? params.C : default_C(params.alpha, params.c, k, params.delta);
  const auto count = epoch_count(horizon, C);
  const double epoch_delta = params.anytime ? params.delta : params.delta / count.epochs;

  RunTrace trace;
  trace.algorithm = lower_bound ? "bees_lb" : "bees";
  trace.seed = rng.seed();
  trace.actions = k;
  trace.horizon = horizon;
  trace.config_echo = echo(trace.algorithm.c_str(), params, C);
  trace.rounds.reserve(horizon);

  std::uint64_t lower = 1;
  std::uint64_t first_round = 1;
  for (std::uint32_t l = 1; l <= count.epochs; ++l) {
    EpochSchedule sched = make_schedule(l, params.alpha, params.c, C, k, lower_bound ? lower : 1);
    if (l == count.epochs) {
      sched.length = count.last_length;
      if (params.final_epoch == FinalEpochExperts::Grow) {
        const auto grown = static_cast<std::uint32_t>(std::bit_width(sched.length / C) - 1);
        sched.experts = checked_shift(params.c, std::uint64_t{params.alpha} * grown, "N_L");
      }
      sched.rho = schedule_rho(sched.experts, k, sched.length);
    }

    Exp4RConfig config;
    config.delta = epoch_delta;
    config.horizon = sched.length;
    config.rho = sched.rho;
    config.actions = k;
    config.expert_ids = sched.window();
    if (params.inject_uniform && !env.pool->is_uniform(sched.window_start)) {
      config.expert_ids.push_back(kUniformAdvisorId);
    }

    auto result = play(env, config, first_round, rng, trace, options);

    EpochRecord rec;
    rec.schedule = sched;
    rec.first_round = first_round;
    rec.lower_bound_before = lower;
    if (lower_bound) {
      const auto m = static_cast<std::size_t>(sched.experts);
      lower = pts_fast(result.output.log_w_final.values().first(m),
                       std::span<const double>(result.output.epsilon).first(m), lower);
    }
    rec.lower_bound_after = lower;
    rec.realized_reward = result.reward;
    rec.output = std::move(result.output);
    trace.total_reward += result.reward;
    trace.epochs.push_back(std::move(rec));
    first_round += sched.length;
  }
  return trace;
}

}  // namespace

RunTrace run_bees(const Environment& env, std::uint64_t horizon, const MetaParams& params,
                  RngStream rng, const RunOptions& options) {
  return run_epochs(env, horizon, params, rng, options, false);
}

RunTrace run_bees_lb(const Environment& env, std::uint64_t horizon, const MetaParams& params,
                     RngStream rng, const RunOptions& options) {
  return run_epochs(env, horizon, params, rng, options, true);
}

RunTrace run_exp4r(const Environment& env, std::uint64_t horizon,
                   std::vector<std::uint64_t> expert_ids, double delta, double rho, RngStream rng,
                   const RunOptions& options) {
  check_env(env, horizon);
  Exp4RConfig config;
  config.delta = delta;
  config.horizon = horizon;
  config.rho = rho;
  config.actions = env.actions();
  config.expert_ids = std::move(expert_ids);

  RunTrace trace;
  trace.algorithm = "exp4r";
  trace.seed = rng.seed();
  trace.actions = config.actions;
  trace.horizon = horizon;
  {
    std::ostringstream os;
    os << "exp4r delta=" << delta << " rho=" << rho << " experts=" << config.experts();
    trace.config_echo = os.str();
  }
  trace.rounds.reserve(horizon);

  EpochRecord rec;
  rec.schedule.index = 1;
  rec.schedule.experts = config.experts();
  rec.schedule.length = horizon;
  rec.schedule.rho = rho;
  rec.schedule.window_start = config.expert_ids.empty() ? 1 : config.expert_ids.front();
  auto result = play(env, config, 1, rng, trace, options);
  rec.realized_reward = result.reward;
  rec.output = std::move(result.output);
  trace.total_reward = result.reward;
  trace.epochs.push_back(std::move(rec));
  return trace;
}

RunTrace run_exp4p_truncated(const Environment& env, std::uint64_t horizon,
                             std::uint64_t num_experts, double delta, RngStream rng,
                             const RunOptions& options) {
  if (num_experts < 2) {
    throw ParameterError("truncated baseline needs at least 2 experts (rho_default is 0 for N=1)");
  }
  check_env(env, horizon);
  std::vector<std::uint64_t> ids(num_experts);
  for (std::uint64_t i = 0; i < num_experts; ++i) ids[i] = i + 1;
  const double rho = rho_default(num_experts, env.actions(), horizon);
  auto trace = run_exp4r(env, horizon, std::move(ids), delta, rho, rng, options);
  trace.algorithm = "exp4p_trunc";
  // The ranking thresholds are not used by this baseline.
  trace.epochs.front().output.epsilon.clear();
  return trace;
}

}  // namespace bees
