#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bees/core.hpp"

namespace bees {

// Global id reserved for the synthetic always-uniform advisor that a driver
// may append to an expert set. Real experts are numbered from 1.
inline constexpr std::uint64_t kUniformAdvisorId = 0;

struct Exp4RConfig {
  double delta = 0.05;                   // error rate in (0, 1]
  std::uint64_t horizon = 1;             // T
  double rho = 0.0;                      // exploration floor in (0, 1/K]
  std::vector<std::uint64_t> expert_ids; // advice rows are given in this order
  std::size_t actions = 0;               // K

  std::size_t experts() const noexcept { return expert_ids.size(); }
  // Throws ParameterError / DimensionError.
  void validate() const;
};

// T >= max(4K ln N, ln(2N/delta) / ((e-2) K)).
bool check_assumption1(std::size_t actions, std::size_t experts, std::uint64_t horizon,
                       double delta);

// sqrt(ln N / (K T)). Zero for N = 1, which Exp4RConfig rejects.
double rho_default(std::size_t experts, std::size_t actions, std::uint64_t horizon);

// Result of a completed run. Besides ln w(T+1) and the ranking thresholds it
// keeps the tuning (rho, beta, delta) so that the estimated cumulative rewards
// can be recovered from the log-weights.
struct Exp4ROutput {
  LogWeightVector log_w_final;
  std::vector<double> epsilon;
  std::vector<double> vhat_sum;
  std::vector<std::uint64_t> expert_ids;
  std::size_t actions = 0;
  std::uint64_t horizon = 0;
  double delta = 0.0;
  double rho = 0.0;
  double beta = 0.0;

  std::size_t experts() const noexcept { return expert_ids.size(); }
  // Rhat_i = 2 ln w_i / rho - beta * Vhat_i.
  std::vector<double> estimated_rewards() const;
};

// The ranking-capable exponential-weights learner.
//
// A round is two calls: `policy` returns the action distribution for the
// current advice without touching the state, then `update` consumes the
// sampled action, its reward and the same distribution. Weights are stored as
// natural logarithms for the whole run.
class Exp4R {
 public:
  // Initializes ln w = 0. Warns (does not throw) when the horizon is too
  // short for the theoretical guarantees.
  explicit Exp4R(Exp4RConfig config);

  const Exp4RConfig& config() const noexcept { return config_; }
  std::size_t experts() const noexcept { return config_.experts(); }
  std::size_t actions() const noexcept { return config_.actions; }
  double beta() const noexcept { return beta_; }
  double rho() const noexcept { return config_.rho; }
  std::uint64_t round() const noexcept { return t_; }
  bool finished() const noexcept { return t_ >= config_.horizon; }
  const LogWeightVector& log_weights() const noexcept { return log_w_; }
  std::span<const double> vhat_sum() const noexcept { return vhat_sum_; }

  ProbVector policy(const AdviceMatrix& advice) const;
  // Allocation-free variant: `q_scratch` has N entries and `p_out` K entries.
  // Only the shapes are checked, not the advice rows.
  void policy_into(const AdviceMatrix& advice, std::span<double> q_scratch,
                   std::span<double> p_out) const;

  // `p` must be exactly the distribution returned by `policy` this round.
  void update(const AdviceMatrix& advice, std::size_t action, double reward,
              std::span<const double> p);

  // Fills advice rows [first, first + count) of the local expert list.
  using AdviceFill =
      std::function<void(std::size_t first, std::size_t count, std::span<double> rows)>;

  // update() for this round fused with refilling `advice` for the next round
  // (through `fill_next`) and computing the next policy into `p_next`, in one
  // blocked pass over the experts. Same result as update, fill, policy_into
  // except for rounding: q is normalized against the largest log-weight of
  // the previous round rather than the current one. Not allowed on the last
  // round.
  void update_and_advance(AdviceMatrix& advice, std::size_t action, double reward,
                          std::span<const double> p, const AdviceFill& fill_next,
                          std::span<double> p_next);

  // Valid once all T rounds have been played.
  Exp4ROutput finalize() const;

 private:
  void check_shape(const AdviceMatrix& advice) const;
  void check_update(const AdviceMatrix& advice, std::size_t action, double reward,
                    std::span<const double> p) const;

  Exp4RConfig config_;
  double beta_ = 0.0;
  double log_term_ = 0.0;  // ln(2N / delta)
  LogWeightVector log_w_;
  std::vector<double> vhat_sum_;
  std::vector<double> inv_p_;
  double lw_max_ = 0.0;  // largest log-weight after the last update
  std::uint64_t t_ = 0;
};

// True iff ln w_i - ln w_j > epsilon_i (strict, no tolerance). Indices are
// 0-based positions in the run's expert list.
bool rank_dominates(const Exp4ROutput& out, std::size_t i, std::size_t j);

}  // namespace bees
