#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bees/env.hpp"
#include "bees/exp4r.hpp"
#include "bees/rng.hpp"
#include "bees/trace.hpp"

namespace bees {

// How many experts the (possibly stretched) final epoch queries.
enum class FinalEpochExperts {
  Scheduled,  // N_L = c 2^{alpha L}
  Grow,       // N_L = c 2^{alpha l'} with l' = floor(log2(T_L / C))
};

struct MetaParams {
  double delta = 0.05;
  std::uint32_t alpha = 1;
  std::uint64_t c = 1;
  std::uint64_t C = 0;  // 0 selects default_C(alpha, c, K, delta)
  // Every epoch runs at error rate delta (true) or delta / L (false).
  bool anytime = true;
  // Append a synthetic uniform advisor to an epoch whose window does not
  // start at a uniform expert. It is never part of the window nor of PTS.
  bool inject_uniform = true;
  FinalEpochExperts final_epoch = FinalEpochExperts::Scheduled;

  void validate() const;
};

// ceil(alpha K ln(16 c^4 / delta)).
std::uint64_t default_C(std::uint32_t alpha, std::uint64_t c, std::size_t actions, double delta);

struct EpochCount {
  std::uint32_t epochs = 0;        // L = floor(log2(1 + T / (2C)))
  std::uint64_t last_length = 0;   // T - sum_{l<L} C 2^l
};

// Throws ParameterError when T < 2C.
EpochCount epoch_count(std::uint64_t horizon, std::uint64_t C);
// Lengths of all L epochs; they sum to T.
std::vector<std::uint64_t> epoch_lengths(std::uint64_t horizon, std::uint64_t C);

// N_l = c 2^{alpha l}, T_l = C 2^l, rho_l = sqrt(ln N_l / (K T_l)), window
// starting at `window_start`. Throws ResourceError on integer overflow and
// ParameterError when rho_l would exceed 1/K.
EpochSchedule make_schedule(std::uint32_t l, std::uint32_t alpha, std::uint64_t c, std::uint64_t C,
                            std::size_t actions, std::uint64_t window_start);

// Lower-bound search. With j_low = 1 + the largest j in [N-1] dominated by
// some j' > j (ln w_j' - ln w_j > eps_j'), or 1 when there is none, returns
// i_lower + j_low - 1. Literal double loop, O(N^2).
std::uint64_t pts(std::span<const double> log_w, std::span<const double> epsilon,
                  std::uint64_t i_lower);
// Same result in O(N) for all but near-tied inputs: a suffix maximum of
// ln w - eps screens each j, and only candidates within rounding distance of
// the threshold are settled with the literal comparison.
std::uint64_t pts_fast(std::span<const double> log_w, std::span<const double> epsilon,
                       std::uint64_t i_lower);

// Called once per round with the 1-based global round and the policy used.
using RoundObserver = std::function<void(std::uint64_t, std::span<const double>)>;

struct RunOptions {
  RoundObserver observer;
};

// Epoch windows [1, N_l].
RunTrace run_bees(const Environment& env, std::uint64_t horizon, const MetaParams& params,
                  RngStream rng, const RunOptions& options = {});

// Epoch windows start at the running lower bound, advanced by pts_fast after
// every epoch.
RunTrace run_bees_lb(const Environment& env, std::uint64_t horizon, const MetaParams& params,
                     RngStream rng, const RunOptions& options = {});

// One learner run over the given experts, recorded as a single epoch.
RunTrace run_exp4r(const Environment& env, std::uint64_t horizon,
                   std::vector<std::uint64_t> expert_ids, double delta, double rho, RngStream rng,
                   const RunOptions& options = {});

// Baseline: one run over experts [1, num_experts] with rho = rho_default and
// the thresholds ignored. Throws ParameterError for num_experts < 2.
RunTrace run_exp4p_truncated(const Environment& env, std::uint64_t horizon,
                             std::uint64_t num_experts, double delta, RngStream rng,
                             const RunOptions& options = {});

}  // namespace bees
