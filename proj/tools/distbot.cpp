// Command-line front end: run, replay, batch, validate.
//
// Exit codes: 0 success, 2 validation failure (bad scenario or arguments),
// 3 runtime error.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <regex>
#include <thread>
#include <vector>

#include "distbot/engine.hpp"
#include "distbot/metrics.hpp"
#include "distbot/replay.hpp"
#include "distbot/scenario.hpp"

namespace fs = std::filesystem;
using namespace distbot::engine;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kRuntime = 3;

struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Scenario load(const std::string& path, std::optional<std::uint64_t> seed,
              std::optional<std::uint64_t> ticks) {
  Scenario s = load_scenario_file(path);
  if (seed) s.seed = *seed;
  if (ticks) s.duration = *ticks;
  return s;
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
  static const std::regex re(R"((\d+)\.\.(\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, re)) {
    throw ValidationFailure("--seeds expects a..b, got '" + text + "'");
  }
  const auto a = std::stoull(m[1]), b = std::stoull(m[2]);
  if (a > b) throw ValidationFailure("--seeds: empty range " + text);
  return {a, b};
}

int cmd_run(const std::string& scenario, const std::string& out_dir,
            std::optional<std::uint64_t> seed, std::optional<std::uint64_t> ticks) {
  const Scenario s = load(scenario, seed, ticks);
  fs::create_directories(out_dir);
  const auto metrics = run_to_file(s, (fs::path(out_dir) / "replay.jsonl").string());
  const auto j = to_json(metrics);
  std::ofstream(fs::path(out_dir) / "metrics.json") << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_replay(const std::string& log_path, bool metrics) {
  const auto log = read_replay_file(log_path);
  if (metrics) {
    std::cout << to_json(compute_metrics(log)).dump(2) << '\n';
  } else {
    std::cout << log.header.at("scenario").value("name", "?") << ": "
              << log.records.size() << " ticks\n";
  }
  return kOk;
}

int cmd_batch(const std::string& scenario, const std::string& seeds,
              std::optional<std::uint64_t> ticks, const std::string& out_dir,
              unsigned jobs) {
  const auto [first, last] = parse_range(seeds);
  const Scenario base = load(scenario, std::nullopt, ticks);
  const std::size_t n = last - first + 1;
  std::vector<MetricsSummary> results(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};

  // Each run owns its engine, RNG and log file.
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      Scenario s = base;
      s.seed = first + i;
      try {
        if (out_dir.empty()) {
          results[i] = run(s, nullptr);
        } else {
          const auto dir = fs::path(out_dir) / ("seed_" + std::to_string(s.seed));
          fs::create_directories(dir);
          results[i] = run_to_file(s, (dir / "replay.jsonl").string());
        }
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    nlohmann::json line = {{"seed", first + i}};
    if (errors[i].empty()) {
      line["metrics"] = to_json(results[i]);
    } else {
      line["error"] = errors[i];
      ++failed;
    }
    std::cout << line.dump() << '\n';
  }
  return failed ? kRuntime : kOk;
}

int cmd_validate(const std::string& scenario, bool echo) {
  const Scenario s = load_scenario_file(scenario);
  if (echo) {
    std::cout << to_json(s).dump(2) << '\n';
  } else {
    std::cout << "ok: " << s.name << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social-distancing surveillance robot simulator"};
  app.require_subcommand(1);

  std::string scenario, out_dir, log_path, seeds;
  std::optional<std::uint64_t> seed, ticks;
  bool metrics = false, echo = false;
  unsigned jobs = 0;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write its replay");
  run_cmd->add_option("scenario", scenario, "Scenario file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--ticks", ticks, "Override the scenario duration");

  auto* replay_cmd = app.add_subcommand("replay", "Read a replay log");
  replay_cmd->add_option("log", log_path, "Replay file")->required();
  replay_cmd->add_flag("--metrics", metrics, "Recompute metrics from the log");

  auto* batch_cmd = app.add_subcommand("batch", "Run a seed range");
  batch_cmd->add_option("scenario", scenario, "Scenario file")->required();
  batch_cmd->add_option("--seeds", seeds, "Seed range a..b")->required();
  batch_cmd->add_option("--ticks", ticks, "Override the scenario duration");
  batch_cmd->add_option("--out", out_dir, "Write one replay per seed here");
  batch_cmd->add_option("--jobs", jobs, "Parallel runs (default: all cores)");

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("scenario", scenario, "Scenario file")->required();
  validate_cmd->add_flag("--echo", echo, "Print the scenario with defaults filled");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*run_cmd) return cmd_run(scenario, out_dir, seed, ticks);
    if (*replay_cmd) return cmd_replay(log_path, metrics);
    if (*batch_cmd) return cmd_batch(scenario, seeds, ticks, out_dir, jobs);
    if (*validate_cmd) return cmd_validate(scenario, echo);
  } catch (const ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << '\n';
    return kInvalid;
  } catch (const ValidationFailure& e) {
    std::cerr << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
