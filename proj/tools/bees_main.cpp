// bees: run experiment configs and summarize result CSVs.
//
//   bees run <config> [--out path] [--anytime bool] [--threads n] [--wall-time] [--trace-dir dir]
//   bees summarize <csv> [--out path]
//
// Exit codes: 0 success, 2 config or usage error, 3 runtime error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "bees/error.hpp"
#include "bees/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

unsigned default_threads() {
  if (const char* env = std::getenv("BEES_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "bees: ignoring invalid BEES_THREADS='" << env << "'\n";
  }
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw bees::ConfigError(path, "cannot open file");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Writes to `path`, or stdout when it is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw bees::ResourceError("cannot write " + path);
  write(os);
  if (!os) throw bees::ResourceError("write failed for " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BEES bandit experiments"};
  app.require_subcommand(1);

  std::string config_path, run_out, trace_dir;
  std::string anytime;
  unsigned threads = default_threads();
  bool wall_time = false;
  auto* run = app.add_subcommand("run", "Run an experiment config and write result rows as CSV");
  run->add_option("config", config_path, "Config file (JSON)")->required();
  run->add_option("--out", run_out, "Output CSV (default: config 'output', else stdout)");
  run->add_option("--anytime", anytime, "Override the anytime flag (true/false)")
      ->check(CLI::IsMember({"true", "false"}));
  run->add_option("--threads", threads, "Parallel (T, seed) cells (default: $BEES_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  run->add_flag("--wall-time", wall_time, "Fill the wall_ms column (output is then not reproducible)");
  run->add_option("--trace-dir", trace_dir, "Write one trace file per run into this directory");

  std::string csv_path, summary_out;
  auto* summarize = app.add_subcommand("summarize", "Mean and sample std of regret per (algorithm, T)");
  summarize->add_option("csv", csv_path, "Result CSV from 'bees run'")->required();
  summarize->add_option("--out", summary_out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) {
      auto config = bees::parse_config(read_file(config_path));
      if (!anytime.empty()) config.anytime = anytime == "true";
      bees::RunSettings settings;
      settings.threads = threads;
      settings.wall_time = wall_time;
      settings.trace_dir = trace_dir;
      const std::string out = run_out.empty() ? config.output : run_out;
      try {
        const auto rows = bees::run_experiment(config, settings);
        emit(out, [&](std::ostream& os) { bees::write_csv(os, rows); });
      } catch (const bees::ExperimentError& e) {
        // Flush what finished before reporting the failure.
        emit(out, [&](std::ostream& os) { bees::write_csv(os, e.partial_rows()); });
        throw;
      }
    } else if (*summarize) {
      std::ifstream is(csv_path, std::ios::binary);
      if (!is) throw bees::ConfigError(csv_path, "cannot open file");
      const auto rows = bees::read_csv(is);
      const auto summary = bees::summarize(rows);
      emit(summary_out, [&](std::ostream& os) { bees::write_summary_csv(os, summary); });
    }
  } catch (const bees::ConfigError& e) {
    std::cerr << "bees: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "bees: error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
