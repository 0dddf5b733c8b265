#include "bees/trace.hpp"

#include <bit>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace bees {
namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string hex64(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace

std::vector<std::uint64_t> EpochSchedule::window() const {
  std::vector<std::uint64_t> ids(experts);
  for (std::uint64_t j = 0; j < experts; ++j) ids[j] = window_start + j;
  return ids;
}

std::uint64_t hash_policy(std::span<const double> p) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double x : p) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (bits >> (8 * byte)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void write_trace(std::ostream& os, const RunTrace& tr) {
  os << "bees-trace 1\n";
  os << "algorithm " << tr.algorithm << '\n';
  os << "seed " << tr.seed << '\n';
  os << "actions " << tr.actions << '\n';
  os << "horizon " << tr.horizon << '\n';
  os << "config " << tr.config_echo << '\n';
  os << "total_reward " << fmt17(tr.total_reward) << '\n';
  for (const auto& e : tr.epochs) {
    os << "epoch " << e.schedule.index << ' ' << e.first_round << ' ' << e.schedule.length << ' '
       << e.schedule.experts << ' ' << e.schedule.window_start << ' ' << fmt17(e.schedule.rho)
       << ' ' << e.lower_bound_before << ' ' << e.lower_bound_after << ' '
       << fmt17(e.realized_reward) << '\n';
    const auto& out = e.output;
    for (std::size_t i = 0; i < out.experts(); ++i) {
      os << "expert " << out.expert_ids[i] << ' ' << fmt17(out.log_w_final[i]) << ' '
         << fmt17(out.epsilon[i]) << ' ' << fmt17(out.vhat_sum[i]) << '\n';
    }
  }
  for (std::size_t t = 0; t < tr.rounds.size(); ++t) {
    const auto& r = tr.rounds[t];
    os << "round " << (t + 1) << ' ' << r.action << ' ' << fmt17(r.reward) << ' '
       << hex64(r.policy_hash) << '\n';
  }
}

std::string to_text(const RunTrace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

}  // namespace bees
