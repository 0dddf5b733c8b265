#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bees/exp4r.hpp"

namespace bees {

// One epoch of an epoch-based meta-algorithm: epoch index l, the number of
// experts N_l, the epoch length T_l, the exploration floor and the expert
// window {window_start, ..., window_start + N_l - 1} (global, 1-based ids).
struct EpochSchedule {
  std::uint32_t index = 0;
  std::uint64_t experts = 0;
  std::uint64_t length = 0;
  double rho = 0.0;
  std::uint64_t window_start = 1;

  std::uint64_t window_end() const noexcept { return window_start + experts - 1; }
  std::vector<std::uint64_t> window() const;

  friend bool operator==(const EpochSchedule&, const EpochSchedule&) = default;
};

struct EpochRecord {
  EpochSchedule schedule;
  std::uint64_t first_round = 1;      // 1-based round at which the epoch starts
  Exp4ROutput output;                 // may include the synthetic uniform advisor (id 0)
  std::uint64_t lower_bound_before = 1;
  std::uint64_t lower_bound_after = 1;
  double realized_reward = 0.0;

  std::uint64_t last_round() const noexcept { return first_round + schedule.length - 1; }
};

struct RoundRecord {
  std::uint32_t action = 0;     // 0-based action index
  double reward = 0.0;
  std::uint64_t policy_hash = 0;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

// Audit record of one learner run.
struct RunTrace {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::size_t actions = 0;
  std::uint64_t horizon = 0;
  std::string config_echo;
  std::vector<RoundRecord> rounds;
  std::vector<EpochRecord> epochs;
  double total_reward = 0.0;

  std::uint64_t final_lower_bound() const noexcept {
    return epochs.empty() ? 1 : epochs.back().lower_bound_after;
  }
};

// FNV-1a over the bit patterns of the entries.
std::uint64_t hash_policy(std::span<const double> p) noexcept;

// Line-oriented text form; see docs/formats.md.
void write_trace(std::ostream& os, const RunTrace& trace);
std::string to_text(const RunTrace& trace);

}  // namespace bees
