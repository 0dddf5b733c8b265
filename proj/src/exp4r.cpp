#include "bees/exp4r.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bees/error.hpp"
#include "bees/log.hpp"
#include "kdispatch.hpp"
#include "vexp.hpp"

namespace bees {

void Exp4RConfig::validate() const {
  if (actions == 0) throw ParameterError("action count K must be positive");
  if (expert_ids.empty()) throw DimensionError("expert set must be nonempty");
  if (horizon == 0) throw ParameterError("horizon T must be positive");
  if (!(delta > 0.0) || delta > 1.0) throw ParameterError("delta must lie in (0, 1]");
  if (!(rho > 0.0) || rho > 1.0 / static_cast<double>(actions)) {
    throw ParameterError("rho must lie in (0, 1/K], got " + std::to_string(rho));
  }
  std::vector<std::uint64_t> sorted = expert_ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ParameterError("expert ids must be distinct");
  }
}

bool check_assumption1(std::size_t actions, std::size_t experts, std::uint64_t horizon,
                       double delta) {
  const double k = static_cast<double>(actions);
  const double n = static_cast<double>(experts);
  const double first = 4.0 * k * std::log(n);
  const double second = std::log(2.0 * n / delta) / ((std::numbers::e - 2.0) * k);
  return std::max(first, second) <= static_cast<double>(horizon);
}

double rho_default(std::size_t experts, std::size_t actions, std::uint64_t horizon) {
  return std::sqrt(std::log(static_cast<double>(experts)) /
                   (static_cast<double>(actions) * static_cast<double>(horizon)));
}

std::vector<double> Exp4ROutput::estimated_rewards() const {
  std::vector<double> r(log_w_final.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = 2.0 * log_w_final[i] / rho - beta * vhat_sum[i];
  }
  return r;
}

Exp4R::Exp4R(Exp4RConfig config) : config_(std::move(config)) {
  config_.validate();
  const double n = static_cast<double>(config_.experts());
  const double k = static_cast<double>(config_.actions);
  log_term_ = std::log(2.0 * n / config_.delta);
  beta_ = std::sqrt(log_term_ / (k * static_cast<double>(config_.horizon)));
  log_w_ = LogWeightVector::zeros(config_.experts());
  vhat_sum_.assign(config_.experts(), 0.0);
  inv_p_.assign(config_.actions, 0.0);
  if (!check_assumption1(config_.actions, config_.experts(), config_.horizon, config_.delta)) {
    warn("horizon " + std::to_string(config_.horizon) + " is below the regime required by the " +
         "regret and ranking guarantees for N=" + std::to_string(config_.experts()) +
         ", K=" + std::to_string(config_.actions));
  }
}

void Exp4R::check_shape(const AdviceMatrix& advice) const {
  if (advice.experts() != config_.experts() || advice.actions() != config_.actions) {
    throw DimensionError("advice is " + std::to_string(advice.experts()) + "x" +
                         std::to_string(advice.actions()) + ", expected " +
                         std::to_string(config_.experts()) + "x" +
                         std::to_string(config_.actions));
  }
}

ProbVector Exp4R::policy(const AdviceMatrix& advice) const {
  check_shape(advice);
  advice.validate_rows();
  std::vector<double> q(experts());
  std::vector<double> p(actions());
  policy_into(advice, q, p);
  return ProbVector::unchecked(std::move(p));
}

void Exp4R::policy_into(const AdviceMatrix& advice, std::span<double> q_scratch,
                        std::span<double> p_out) const {
  if (finished()) throw SequencingError("round budget exhausted: all T rounds were played");
  check_shape(advice);
  if (q_scratch.size() != experts() || p_out.size() != actions()) {
    throw DimensionError("scratch buffers do not match N and K");
  }
  normalize_log_weights_into(log_w_.values(), q_scratch);
  mix_advice_into(q_scratch, advice, config_.rho, p_out);
}

void Exp4R::check_update(const AdviceMatrix& advice, std::size_t action, double reward,
                         std::span<const double> p) const {
  if (finished()) throw SequencingError("round budget exhausted: all T rounds were played");
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw DomainError("reward must lie in [0, 1], got " + std::to_string(reward));
  }
  check_shape(advice);
  if (p.size() != actions()) throw DimensionError("policy length differs from K");
  if (action >= actions()) throw IndexError("action index out of range");
}

namespace {

// Applies one round of the log-weight update to experts [first, last) and
// returns the largest updated log-weight.
template <std::size_t StaticK>
double update_block(const AdviceMatrix& advice, std::size_t first, std::size_t last,
                    std::size_t action, double weight_on_action, const double* inv_p,
                    double step, double beta, double rho, double* lw, double* vs) {
  const std::size_t k = StaticK ? StaticK : advice.actions();
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = first; i < last; ++i) {
    const double* xi = advice.row(i).data();
    double v = 0.0;
    for (std::size_t b = 0; b < k; ++b) v += xi[b] * inv_p[b];
    const double y = xi[action] * weight_on_action;
    assert(y >= 0.0 && y <= (1.0 + 1e-9) / rho);
    assert(v >= 1.0 - 1e-9 && v <= (1.0 + 1e-9) / rho);
    (void)rho;
    lw[i] += step * (y + beta * v);
    vs[i] += v;
    m = std::max(m, lw[i]);
  }
  return m;
}

constexpr std::size_t kBlock = 128;

}  // namespace

void Exp4R::update(const AdviceMatrix& advice, std::size_t action, double reward,
                   std::span<const double> p) {
  check_update(advice, action, reward, p);
  const std::size_t k = actions();
  for (std::size_t b = 0; b < k; ++b) inv_p_[b] = 1.0 / p[b];
  lw_max_ = detail::dispatch_actions(k, [&](auto static_k) {
    return update_block<decltype(static_k)::value>(
        advice, 0, experts(), action, reward * inv_p_[action], inv_p_.data(), 0.5 * config_.rho,
        beta_, config_.rho, log_w_.values().data(), vhat_sum_.data());
  });
  ++t_;
}

void Exp4R::update_and_advance(AdviceMatrix& advice, std::size_t action, double reward,
                               std::span<const double> p, const AdviceFill& fill_next,
                               std::span<double> p_next) {
  check_update(advice, action, reward, p);
  if (t_ + 1 >= config_.horizon) {
    throw SequencingError("no next round to advance to; use update() on the last round");
  }
  if (p_next.size() != actions()) throw DimensionError("p_next length differs from K");
  const std::size_t k = actions();
  const std::size_t n = experts();
  for (std::size_t b = 0; b < k; ++b) inv_p_[b] = 1.0 / p[b];
  const double weight_on_action = reward * inv_p_[action];
  const double step = 0.5 * config_.rho;
  const double shift = lw_max_;
  double* lw = log_w_.values().data();
  double* vs = vhat_sum_.data();

  double e[kBlock];
  double acc_buf[64];
  std::vector<double> acc_heap;
  double* acc = acc_buf;
  if (k > 64) {
    acc_heap.assign(k, 0.0);
    acc = acc_heap.data();
  } else {
    std::fill_n(acc, k, 0.0);
  }
  double total = 0.0;
  double m = -std::numeric_limits<double>::infinity();

  detail::dispatch_actions(k, [&](auto static_k) {
    constexpr std::size_t kc = decltype(static_k)::value;
    const std::size_t kk = kc ? kc : k;
    for (std::size_t first = 0; first < n; first += kBlock) {
      const std::size_t count = std::min(kBlock, n - first);
      m = std::max(m, update_block<kc>(advice, first, first + count, action, weight_on_action,
                                       inv_p_.data(), step, beta_, config_.rho, lw, vs));
      fill_next(first, count, {advice.data().data() + first * kk, count * kk});
      total += detail::exp_shifted(lw + first, shift, e, count);
      const double* rows = advice.data().data() + first * kk;
      for (std::size_t j = 0; j < count; ++j) {
        const double w = e[j];
        const double* xi = rows + j * kk;
        for (std::size_t a = 0; a < kk; ++a) acc[a] += w * xi[a];
      }
    }
  });
  lw_max_ = m;
  ++t_;

  const double keep = (1.0 - static_cast<double>(k) * config_.rho) / total;
  for (std::size_t a = 0; a < k; ++a) p_next[a] = keep * acc[a] + config_.rho;
}

Exp4ROutput Exp4R::finalize() const {
  if (!finished()) {
    throw SequencingError("thresholds are defined only after all " +
                          std::to_string(config_.horizon) + " rounds (played " +
                          std::to_string(t_) + ")");
  }
  Exp4ROutput out;
  out.log_w_final = log_w_;
  out.vhat_sum = vhat_sum_;
  out.expert_ids = config_.expert_ids;
  out.actions = config_.actions;
  out.horizon = config_.horizon;
  out.delta = config_.delta;
  out.rho = config_.rho;
  out.beta = beta_;
  const double kt = static_cast<double>(config_.actions) * static_cast<double>(config_.horizon);
  out.epsilon.resize(experts());
  for (std::size_t i = 0; i < experts(); ++i) {
    out.epsilon[i] = (1.0 + vhat_sum_[i] / kt) * log_term_;
  }
  return out;
}

bool rank_dominates(const Exp4ROutput& out, std::size_t i, std::size_t j) {
  const std::size_t n = out.log_w_final.size();
  if (i >= n || j >= n) throw IndexError("expert index out of range");
  if (i == j) throw ParameterError("rank_dominates needs two distinct experts");
  return out.log_w_final[i] - out.log_w_final[j] > out.epsilon[i];
}

}  // namespace bees
