#include "bees/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace bees {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Names

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Exp4R: return "exp4r";
    case Algorithm::Bees: return "bees";
    case Algorithm::BeesLB: return "bees_lb";
    case Algorithm::Exp4PTrunc: return "exp4p_trunc";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::Exp4R, Algorithm::Bees, Algorithm::BeesLB, Algorithm::Exp4PTrunc}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

namespace {

std::optional<PoolKind> parse_pool_kind(std::string_view name) {
  for (auto k : {PoolKind::UniformFirstUnimodal, PoolKind::Identical, PoolKind::CustomTable}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

bool same_spec(const UnimodalPoolSpec& a, const UnimodalPoolSpec& b) {
  return a.actions == b.actions && a.i_star == b.i_star && a.pool_depth == b.pool_depth &&
         a.noise_std == b.noise_std && a.good_actions == b.good_actions &&
         a.off_weights == b.off_weights &&
         a.quality.peak == b.quality.peak && a.quality.tail == b.quality.tail &&
         a.quality.decay == b.quality.decay && a.quality.levels == b.quality.levels;
}

}  // namespace

bool operator==(const PoolConfig& a, const PoolConfig& b) {
  return a.kind == b.kind && same_spec(a.unimodal, b.unimodal) && a.identical == b.identical &&
         a.table == b.table;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.algorithms == b.algorithms && a.actions == b.actions && a.horizons == b.horizons &&
         a.delta == b.delta && a.alpha == b.alpha && a.c == b.c && a.C == b.C &&
         a.anytime == b.anytime && a.inject_uniform == b.inject_uniform &&
         a.final_epoch == b.final_epoch && a.pool == b.pool && a.adversary == b.adversary &&
         a.seeds == b.seeds && a.candidate_range == b.candidate_range &&
         a.exp4r_experts == b.exp4r_experts && a.exp4p_experts == b.exp4p_experts &&
         a.output == b.output;
}

// ---------------------------------------------------------------------------
// Config

std::uint64_t ExperimentConfig::resolved_C() const {
  return C ? *C : default_C(alpha, c, actions, delta);
}

MetaParams ExperimentConfig::meta_params() const {
  MetaParams p;
  p.delta = delta;
  p.alpha = alpha;
  p.c = c;
  p.C = resolved_C();
  p.anytime = anytime;
  p.inject_uniform = inject_uniform;
  p.final_epoch = final_epoch;
  return p;
}

void ExperimentConfig::validate() const {
  if (algorithms.empty()) throw ConfigError("algorithm", "at least one algorithm is required");
  if (actions < 1) throw ConfigError("K", "must be >= 1");
  if (horizons.empty()) throw ConfigError("horizons", "must be nonempty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1) throw ConfigError("horizons", "entries must be positive");
    if (i > 0 && horizons[i] <= horizons[i - 1]) {
      throw ConfigError("horizons", "must be strictly ascending");
    }
  }
  if (!(delta > 0.0) || delta > 1.0) throw ConfigError("delta", "must lie in (0, 1]");
  if (alpha < 1) throw ConfigError("alpha", "must be >= 1");
  if (c < 1) throw ConfigError("c", "must be >= 1");
  if (C && *C < 1) throw ConfigError("C", "must be >= 1");
  if (seeds.empty()) throw ConfigError("seeds", "must be nonempty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds", "must be distinct");
  }
  if (candidate_range && *candidate_range < 1) {
    throw ConfigError("candidate_range", "must be >= 1");
  }
  if (exp4r_experts < 2) throw ConfigError("exp4r_experts", "must be >= 2");
  if (exp4p_experts && *exp4p_experts < 2) throw ConfigError("exp4p_experts", "must be >= 2");

  const bool epochs = std::any_of(algorithms.begin(), algorithms.end(), [](Algorithm a) {
    return a == Algorithm::Bees || a == Algorithm::BeesLB;
  });
  if (epochs && horizons.front() < 2 * resolved_C()) {
    throw ConfigError("horizons", "BEES needs T >= 2C = " + std::to_string(2 * resolved_C()));
  }

  switch (pool.kind) {
    case PoolKind::UniformFirstUnimodal:
      if (pool.unimodal.actions != actions) throw ConfigError("pool", "K mismatch");
      try {
        pool.unimodal.validate();
      } catch (const ParameterError& e) {
        throw ConfigError("pool", e.what());
      }
      break;
    case PoolKind::Identical:
      if (pool.identical.size() != actions || !is_probability_vector(pool.identical)) {
        throw ConfigError("pool.advice", "must be a probability vector of length K");
      }
      break;
    case PoolKind::CustomTable:
      if (pool.table.empty()) throw ConfigError("pool.rows", "must be nonempty");
      for (std::size_t i = 0; i < pool.table.size(); ++i) {
        if (pool.table[i].size() != actions || !is_probability_vector(pool.table[i])) {
          throw ConfigError("pool.rows[" + std::to_string(i) + "]",
                            "must be a probability vector of length K");
        }
      }
      break;
  }
  if (!adversary.bias.empty() && adversary.bias.size() != actions) {
    throw ConfigError("adversary.bias", "must have K entries");
  }
  for (double b : adversary.bias) {
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("adversary.bias", "entries must lie in [0, 1]");
  }
  for (double b : {adversary.good_bias, adversary.other_bias}) {
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("adversary", "biases must lie in [0, 1]");
  }
}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads the members of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "document" : path_, "expected an object");
  }

  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return join(path_, key); }

  std::optional<std::uint64_t> uint(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return as_uint(*v, where(key));
  }

  std::optional<double> number(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ConfigError(where(key), "expected a number");
    return v->get<double>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) throw ConfigError(where(key), "expected true or false");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(where(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return as_numbers(*v, where(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(where(it.key()), "unknown key");
    }
  }

  static std::uint64_t as_uint(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where, "expected a nonnegative integer");
    if (!v.is_number_unsigned()) throw ConfigError(where, "must be nonnegative");
    return v.get<std::uint64_t>();
  }

  static std::vector<double> as_numbers(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(where + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<std::uint64_t> parse_seeds(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    unsigned long long lo = 0, hi = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%llu..%llu%c", &lo, &hi, &tail) != 2 || lo > hi) {
      throw ConfigError("seeds", "expected a range \"a..b\" with a <= b or an array of integers");
    }
    std::vector<std::uint64_t> out;
    for (auto x = lo; x <= hi; ++x) out.push_back(x);
    return out;
  }
  if (!v.is_array()) throw ConfigError("seeds", "expected an array of integers or \"a..b\"");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(ObjectReader::as_uint(v[i], "seeds[" + std::to_string(i) + "]"));
  }
  return out;
}

PoolConfig parse_pool(const json& v, std::size_t actions) {
  ObjectReader r(v, "pool");
  PoolConfig pool;
  if (auto kind = r.string("kind")) {
    auto k = parse_pool_kind(*kind);
    if (!k) throw ConfigError("pool.kind", "unknown pool kind '" + *kind + "'");
    pool.kind = *k;
  }
  pool.unimodal.actions = actions;
  switch (pool.kind) {
    case PoolKind::UniformFirstUnimodal: {
      auto& s = pool.unimodal;
      if (auto x = r.uint("i_star")) s.i_star = *x;
      if (auto x = r.uint("pool_depth")) s.pool_depth = *x;
      if (auto x = r.number("noise_std")) s.noise_std = *x;
      if (const json* g = r.find("good_actions")) {
        if (!g->is_array()) throw ConfigError("pool.good_actions", "expected an array");
        s.good_actions.clear();
        for (std::size_t i = 0; i < g->size(); ++i) {
          s.good_actions.push_back(ObjectReader::as_uint(
              (*g)[i], "pool.good_actions[" + std::to_string(i) + "]"));
        }
      }
      if (auto x = r.numbers("off_weights")) s.off_weights = *x;
      if (auto x = r.number("peak")) s.quality.peak = *x;
      if (auto x = r.number("tail")) s.quality.tail = *x;
      if (auto x = r.number("decay")) s.quality.decay = *x;
      if (auto x = r.numbers("levels")) s.quality.levels = *x;
      break;
    }
    case PoolKind::Identical:
      if (auto x = r.numbers("advice")) {
        pool.identical = *x;
      } else {
        pool.identical.assign(actions, 1.0 / static_cast<double>(actions));
      }
      break;
    case PoolKind::CustomTable: {
      const json* rows = r.find("rows");
      if (!rows || !rows->is_array()) throw ConfigError("pool.rows", "expected an array of rows");
      for (std::size_t i = 0; i < rows->size(); ++i) {
        pool.table.push_back(
            ObjectReader::as_numbers((*rows)[i], "pool.rows[" + std::to_string(i) + "]"));
      }
      break;
    }
  }
  r.finish();
  return pool;
}

AdversaryConfig parse_adversary(const json& v) {
  ObjectReader r(v, "adversary");
  AdversaryConfig a;
  if (auto kind = r.string("kind"); kind && *kind != "binary") {
    throw ConfigError("adversary.kind", "only 'binary' adversaries are supported");
  }
  if (auto x = r.numbers("bias")) a.bias = *x;
  if (auto x = r.number("good_bias")) a.good_bias = *x;
  if (auto x = r.number("other_bias")) a.other_bias = *x;
  r.finish();
  return a;
}

std::string location(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte just past the offending token.
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    std::string msg = e.what();
    if (auto pos = msg.find("parse error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(location(text, byte), msg);
  }

  ObjectReader r(doc, "");
  ExperimentConfig cfg;
  if (const json* a = r.find("algorithm")) {
    std::vector<std::string> names;
    if (a->is_string()) {
      names.push_back(a->get<std::string>());
    } else if (a->is_array()) {
      for (const auto& x : *a) {
        if (!x.is_string()) throw ConfigError("algorithm", "expected algorithm names");
        names.push_back(x.get<std::string>());
      }
    } else {
      throw ConfigError("algorithm", "expected a name or an array of names");
    }
    for (const auto& n : names) {
      auto alg = parse_algorithm(n);
      if (!alg) throw ConfigError("algorithm", "unknown algorithm '" + n + "'");
      if (std::find(cfg.algorithms.begin(), cfg.algorithms.end(), *alg) != cfg.algorithms.end()) {
        throw ConfigError("algorithm", "'" + n + "' listed twice");
      }
      cfg.algorithms.push_back(*alg);
    }
  }
  if (auto k = r.uint("K")) cfg.actions = *k;
  if (const json* h = r.find("horizons")) {
    if (!h->is_array()) throw ConfigError("horizons", "expected an array of integers");
    for (std::size_t i = 0; i < h->size(); ++i) {
      cfg.horizons.push_back(ObjectReader::as_uint((*h)[i], "horizons[" + std::to_string(i) + "]"));
    }
  }
  if (auto x = r.number("delta")) cfg.delta = *x;
  if (auto x = r.uint("alpha")) {
    if (*x > 62) throw ConfigError("alpha", "must be <= 62");
    cfg.alpha = static_cast<std::uint32_t>(*x);
  }
  if (auto x = r.uint("c")) cfg.c = *x;
  if (auto x = r.uint("C")) cfg.C = *x;
  if (auto x = r.boolean("anytime")) cfg.anytime = *x;
  if (auto x = r.boolean("inject_uniform")) cfg.inject_uniform = *x;
  if (auto x = r.string("final_epoch_nl")) {
    if (*x == "scheduled") {
      cfg.final_epoch = FinalEpochExperts::Scheduled;
    } else if (*x == "grow") {
      cfg.final_epoch = FinalEpochExperts::Grow;
    } else {
      throw ConfigError("final_epoch_nl", "expected 'scheduled' or 'grow'");
    }
  }
  if (const json* s = r.find("seeds")) cfg.seeds = parse_seeds(*s);
  if (auto x = r.uint("candidate_range")) cfg.candidate_range = *x;
  if (auto x = r.uint("exp4r_experts")) cfg.exp4r_experts = *x;
  if (const json* e = r.find("exp4p_experts")) {
    if (e->is_string() && e->get<std::string>() == "T") {
      cfg.exp4p_experts.reset();
    } else {
      cfg.exp4p_experts = ObjectReader::as_uint(*e, "exp4p_experts");
    }
  }
  if (auto x = r.string("output")) cfg.output = *x;
  cfg.pool.unimodal.actions = cfg.actions;
  if (const json* p = r.find("pool")) cfg.pool = parse_pool(*p, cfg.actions);
  if (const json* a = r.find("adversary")) cfg.adversary = parse_adversary(*a);
  r.finish();

  cfg.validate();
  cfg.C = cfg.resolved_C();  // defaults are explicit from here on
  return cfg;
}

std::string to_canonical_json(const ExperimentConfig& cfg) {
  json j;
  json algs = json::array();
  for (auto a : cfg.algorithms) algs.push_back(to_string(a));
  j["algorithm"] = algs;
  j["K"] = cfg.actions;
  j["horizons"] = cfg.horizons;
  j["delta"] = cfg.delta;
  j["alpha"] = cfg.alpha;
  j["c"] = cfg.c;
  j["C"] = cfg.resolved_C();
  j["anytime"] = cfg.anytime;
  j["inject_uniform"] = cfg.inject_uniform;
  j["final_epoch_nl"] = cfg.final_epoch == FinalEpochExperts::Grow ? "grow" : "scheduled";
  j["seeds"] = cfg.seeds;
  if (cfg.candidate_range) j["candidate_range"] = *cfg.candidate_range;
  j["exp4r_experts"] = cfg.exp4r_experts;
  if (cfg.exp4p_experts) {
    j["exp4p_experts"] = *cfg.exp4p_experts;
  } else {
    j["exp4p_experts"] = "T";
  }
  if (!cfg.output.empty()) j["output"] = cfg.output;

  json pool;
  pool["kind"] = to_string(cfg.pool.kind);
  switch (cfg.pool.kind) {
    case PoolKind::UniformFirstUnimodal: {
      const auto& s = cfg.pool.unimodal;
      pool["i_star"] = s.i_star;
      pool["pool_depth"] = s.pool_depth;
      pool["noise_std"] = s.noise_std;
      pool["good_actions"] = s.good_actions;
      if (!s.off_weights.empty()) pool["off_weights"] = s.off_weights;
      pool["peak"] = s.quality.peak;
      pool["tail"] = s.quality.tail;
      pool["decay"] = s.quality.decay;
      if (!s.quality.levels.empty()) pool["levels"] = s.quality.levels;
      break;
    }
    case PoolKind::Identical: pool["advice"] = cfg.pool.identical; break;
    case PoolKind::CustomTable: pool["rows"] = cfg.pool.table; break;
  }
  j["pool"] = pool;

  json adv;
  adv["kind"] = "binary";
  if (!cfg.adversary.bias.empty()) adv["bias"] = cfg.adversary.bias;
  adv["good_bias"] = cfg.adversary.good_bias;
  adv["other_bias"] = cfg.adversary.other_bias;
  j["adversary"] = adv;
  return j.dump(2) + "\n";
}

// The canonical form spells C out, which parses back as an explicit value.
// Equality of configs compares the optional, so normalize on both sides.

// ---------------------------------------------------------------------------
// Environments

Environment make_environment(const ExperimentConfig& cfg, std::uint64_t horizon,
                             std::uint64_t seed) {
  std::vector<double> bias = cfg.adversary.bias;
  if (bias.empty()) {
    bias.assign(cfg.actions, cfg.adversary.other_bias);
    if (cfg.pool.kind == PoolKind::UniformFirstUnimodal) {
      for (std::size_t a : cfg.pool.unimodal.good_actions) bias[a] = cfg.adversary.good_bias;
    } else {
      bias[0] = cfg.adversary.good_bias;
    }
  }
  Environment env;
  env.rewards = make_binary_adversary(seed, horizon, cfg.actions, bias);
  switch (cfg.pool.kind) {
    case PoolKind::UniformFirstUnimodal:
      env.pool = std::make_shared<UnimodalPool>(cfg.pool.unimodal, seed);
      break;
    case PoolKind::Identical:
      env.pool = std::make_shared<IdenticalPool>(ProbVector(cfg.pool.identical));
      break;
    case PoolKind::CustomTable: {
      std::vector<ProbVector> rows;
      for (const auto& r : cfg.pool.table) rows.emplace_back(r);
      env.pool = std::make_shared<CustomTablePool>(std::move(rows));
      break;
    }
  }
  return env;
}

// ---------------------------------------------------------------------------
// Running

namespace {

std::uint64_t max_expert_queried(const RunTrace& trace) {
  std::uint64_t m = 1;
  for (const auto& e : trace.epochs) {
    for (auto id : e.output.expert_ids) m = std::max(m, id);
  }
  return m;
}

struct CellResult {
  std::vector<ResultRow> rows;  // one per algorithm, in config order
  std::string error;
};

CellResult run_cell(const ExperimentConfig& cfg, std::uint64_t horizon, std::uint64_t seed,
                    const RunSettings& settings) {
  const Environment env = make_environment(cfg, horizon, seed);
  const MetaParams params = cfg.meta_params();

  std::vector<RunTrace> traces;
  std::vector<double> wall;
  for (auto alg : cfg.algorithms) {
    const RngStream rng(seed, streams::kLearner);
    const auto start = std::chrono::steady_clock::now();
    switch (alg) {
      case Algorithm::Exp4R: {
        std::vector<std::uint64_t> ids(cfg.exp4r_experts);
        for (std::uint64_t i = 0; i < ids.size(); ++i) ids[i] = i + 1;
        const double rho = rho_default(ids.size(), cfg.actions, horizon);
        traces.push_back(run_exp4r(env, horizon, std::move(ids), cfg.delta, rho, rng));
        break;
      }
      case Algorithm::Bees: traces.push_back(run_bees(env, horizon, params, rng)); break;
      case Algorithm::BeesLB: traces.push_back(run_bees_lb(env, horizon, params, rng)); break;
      case Algorithm::Exp4PTrunc:
        traces.push_back(run_exp4p_truncated(env, horizon, cfg.exp4p_experts.value_or(horizon),
                                             cfg.delta, rng));
        break;
    }
    const auto stop = std::chrono::steady_clock::now();
    wall.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }

  std::uint64_t bound = 0;
  if (cfg.candidate_range) {
    bound = *cfg.candidate_range;
  } else {
    for (const auto& tr : traces) bound = std::max(bound, 4 * max_expert_queried(tr));
  }
  const auto oracle = oracle_scan(*env.pool, env.rewards, {1, horizon}, {1, bound});

  CellResult cell;
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    const auto& tr = traces[a];
    ResultRow row;
    row.algorithm = cfg.algorithms[a];
    row.horizon = horizon;
    row.seed = seed;
    row.regret = compute_regret(tr, oracle.best_reward);
    row.total_reward = tr.total_reward;
    if (row.algorithm == Algorithm::BeesLB) row.lower_bound = tr.final_lower_bound();
    row.epochs = static_cast<std::uint32_t>(tr.epochs.size());
    if (settings.wall_time) row.wall_ms = wall[a];
    cell.rows.push_back(row);

    if (!settings.trace_dir.empty()) {
      const auto path = std::filesystem::path(settings.trace_dir) /
                        (to_string(row.algorithm) + "_T" + std::to_string(horizon) + "_seed" +
                         std::to_string(seed) + ".trace");
      std::ofstream os(path, std::ios::binary);
      if (!os) throw ResourceError("cannot write trace file " + path.string());
      write_trace(os, tr);
    }
  }
  return cell;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const RunSettings& settings) {
  cfg.validate();
  if (!settings.trace_dir.empty()) std::filesystem::create_directories(settings.trace_dir);

  struct Cell {
    std::uint64_t horizon;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto h : cfg.horizons) {
    for (auto s : cfg.seeds) cells.push_back({h, s});
  }
  // Largest horizons first so long cells do not end up last in the queue.
  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cells[a].horizon > cells[b].horizon;
  });

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t n = next++; n < order.size(); n = next++) {
      const auto& cell = cells[order[n]];
      try {
        results[order[n]] = run_cell(cfg, cell.horizon, cell.seed, settings);
      } catch (const std::exception& e) {
        results[order[n]].error = "T=" + std::to_string(cell.horizon) +
                                  " seed=" + std::to_string(cell.seed) + ": " + e.what();
      }
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(settings.threads, static_cast<unsigned>(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  std::vector<ResultRow> rows;
  std::string errors;
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    for (const auto& r : results) {
      if (r.error.empty()) rows.push_back(r.rows[a]);
    }
  }
  for (const auto& r : results) {
    if (!r.error.empty()) errors += (errors.empty() ? "" : "; ") + r.error;
  }
  if (!errors.empty()) throw ExperimentError(errors, std::move(rows));
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_decimal(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_csv(std::ostream& os, std::span<const ResultRow> rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.algorithm) << ',' << r.horizon << ',' << r.seed << ','
       << format_decimal(r.regret) << ',' << format_decimal(r.total_reward) << ',';
    if (r.lower_bound) os << *r.lower_bound;
    os << ',' << r.epochs << ',';
    if (r.wall_ms) os << format_decimal(*r.wall_ms);
    os << '\n';
  }
}

std::string to_csv(std::span<const ResultRow> rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

template <class T>
T parse_field(const std::string& s, const std::string& where) {
  std::istringstream is(s);
  T v{};
  if (!(is >> v) || !is.eof()) throw ConfigError(where, "cannot parse '" + s + "'");
  return v;
}

}  // namespace

std::vector<ResultRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw ConfigError("line 1", "expected header '" + std::string(kCsvHeader) + "'");
  }
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    const auto f = split(line, ',');
    if (f.size() != 8) throw ConfigError(where, "expected 8 fields");
    ResultRow r;
    auto alg = parse_algorithm(f[0]);
    if (!alg) throw ConfigError(where, "unknown algorithm '" + f[0] + "'");
    r.algorithm = *alg;
    r.horizon = parse_field<std::uint64_t>(f[1], where);
    r.seed = parse_field<std::uint64_t>(f[2], where);
    r.regret = parse_field<double>(f[3], where);
    r.total_reward = parse_field<double>(f[4], where);
    if (!f[5].empty()) r.lower_bound = parse_field<std::uint64_t>(f[5], where);
    r.epochs = parse_field<std::uint32_t>(f[6], where);
    if (!f[7].empty()) r.wall_ms = parse_field<double>(f[7], where);
    rows.push_back(r);
  }
  return rows;
}

std::vector<SummaryRow> summarize(std::span<const ResultRow> rows) {
  if (rows.empty()) throw ParameterError("nothing to summarize");
  std::map<std::pair<Algorithm, std::uint64_t>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.algorithm, r.horizon}].push_back(r.regret);

  std::vector<SummaryRow> out;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    SummaryRow s;
    s.algorithm = key.first;
    s.horizon = key.second;
    s.runs = values.size();
    s.mean_regret = mean;
    s.std_regret = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.push_back(s);
  }
  return out;
}

void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows) {
  os << "algorithm,T,runs,mean_regret,std_regret\n";
  for (const auto& s : rows) {
    os << to_string(s.algorithm) << ',' << s.horizon << ',' << s.runs << ','
       << format_decimal(s.mean_regret) << ',' << format_decimal(s.std_regret) << '\n';
  }
}

}  // namespace bees
