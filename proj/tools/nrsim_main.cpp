// nrsim command-line front end: validate, run, report.
//
// Exit codes: 0 ok, 1 configuration error, 2 runtime error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "nrsim/batch.hpp"
#include "nrsim/errors.hpp"
#include "nrsim/events.hpp"
#include "nrsim/metrics.hpp"
#include "nrsim/scenario.hpp"

namespace fs = std::filesystem;

namespace {

enum class Verbosity { Quiet, Info, Debug };

Verbosity verbosity() {
  const char* v = std::getenv("NRSIM_LOG");
  if (!v) return Verbosity::Info;
  const std::string s(v);
  if (s == "debug") return Verbosity::Debug;
  if (s == "info") return Verbosity::Info;
  return Verbosity::Quiet;
}

template <typename... Args>
void debug(fmt::format_string<Args...> f, Args&&... args) {
  if (verbosity() == Verbosity::Debug) fmt::print(stderr, "debug: {}\n", fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
  if (verbosity() != Verbosity::Quiet) fmt::print(stderr, "{}\n", fmt::format(f, std::forward<Args>(args)...));
}

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(fmt::format("{}: cannot open for reading", p.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("{}: cannot open for writing", p.string()));
  out << content;
  if (!out) throw IoError(fmt::format("{}: write failed", p.string()));
}

// Config errors are reported here with the file name, then rethrown as
// ConfigReported so main only maps them to the exit code.
struct ConfigReported : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nrsim::Scenario load(const fs::path& p) {
  try {
    return nrsim::parse_scenario(read_file(p));
  } catch (const nrsim::ConfigInvalid& e) {
    fmt::print(stderr, "config error: {}: {}\n", p.string(), e.what());
    throw ConfigReported(e.what());
  }
}

std::string fmt_ttr(const nrsim::Metrics& m) {
  return m.meanTimeToRlfMs ? fmt::format("{:.1f} ms", *m.meanTimeToRlfMs) : std::string("n/a");
}

int cmd_validate(const std::string& path) {
  const auto s = load(path);
  fmt::print("ok: {} ({} cells, {} ues, {} ms)\n", s.name, s.cells.size(), s.ues.size(), s.duration.count());
  return 0;
}

int cmd_run(const std::vector<std::string>& paths, const std::string& outDir, std::optional<std::uint64_t> seed,
            int jobs) {
  std::vector<nrsim::Scenario> scenarios;
  for (const auto& p : paths) {
    auto s = load(p);
    if (seed) s.seed = *seed;
    scenarios.push_back(std::move(s));
  }

  const auto t0 = std::chrono::steady_clock::now();
  const auto results = scenarios.size() > 1 && jobs != 1 ? nrsim::run_batch_parallel(scenarios, jobs)
                                                         : nrsim::run_batch_serial(scenarios);
  debug("simulated {} scenario(s) in {} ms", scenarios.size(),
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count());

  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& s = scenarios[i];
    const auto& r = results[i];
    fs::path dir = outDir;
    if (results.size() > 1) dir /= s.name;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("{}: {}", dir.string(), ec.message()));
    write_file(dir / "events.log", nrsim::serialize(r.log));
    write_file(dir / "metrics.csv", nrsim::metrics_csv(r.metrics));
    debug("{}: {} events written to {}", s.name, r.log.events.size(), dir.string());

    const auto& m = r.metrics;
    fmt::print("{} (seed {}, {} ms)\n", s.name, s.seed, s.duration.count());
    fmt::print("  rlfCount          {}\n", m.rlfCount);
    fmt::print("  siReacquisitions  {}\n", m.siReacquisitions);
    fmt::print("  dutyCycle         {:.4f} %\n", 100.0 * m.dutyCycle);
    fmt::print("  meanTimeToRlf     {}\n", fmt_ttr(m));
    fmt::print("  output            {}\n", dir.string());
  }
  return 0;
}

bool same_csv(const std::string& a, const std::string& b) {
  auto norm = [](std::string s) {
    std::erase(s, '\r');
    while (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
  };
  return norm(a) == norm(b);
}

int cmd_report(const std::string& path, std::optional<std::string> csvOut) {
  const fs::path logPath = path;
  const auto log = nrsim::parse_event_log(read_file(logPath));
  const auto m = nrsim::compute_metrics(log);
  const auto timelines = nrsim::reconstruct_timelines(log);

  fmt::print("scenario {} (seed {}, {} ms, {} events)\n\n", log.header.scenario, log.header.seed,
             log.header.duration.count(), log.events.size());
  fmt::print("{:<28}{}\n", "metric", "value");
  fmt::print("{:<28}{}\n", "rlf_count", m.rlfCount);
  fmt::print("{:<28}{}\n", "reestablish_attempts", m.reestablishAttempts);
  fmt::print("{:<28}{}\n", "si_reacquisitions", m.siReacquisitions);
  fmt::print("{:<28}{}\n", "registration_requests", m.registrationRequests);
  fmt::print("{:<28}{}\n", "missed_si_windows", m.missedSiWindows);
  fmt::print("{:<28}{}\n", "tac_mismatches", m.tacMismatches);
  fmt::print("{:<28}{}\n", "detector_alerts", m.detectorAlerts);
  fmt::print("{:<28}{}\n", "mean_time_to_rlf", fmt_ttr(m));
  fmt::print("{:<28}{:.4f} %\n", "duty_cycle", 100.0 * m.dutyCycle);
  fmt::print("{:<28}{:.4f}\n", "connected_uptime_fraction", m.connectedUptimeFraction);

  std::string csv = "table,ue,index,time_ms,value_ms\n";
  for (const auto& t : timelines) {
    const auto ue = nrsim::to_underlying(t.id);
    fmt::print("\nue{}: RLF timestamps ({})\n", ue, t.rlfTimes.size());
    if (!t.rlfTimes.empty()) fmt::print("  {:>5}  {:>10}  {:>14}\n", "#", "time_ms", "time_to_rlf_ms");
    for (std::size_t k = 0; k < t.rlfTimes.size(); ++k) {
      const auto ttr = k < t.timeToRlf.size() ? t.timeToRlf[k].count() : -1;
      fmt::print("  {:>5}  {:>10}  {:>14}\n", k + 1, t.rlfTimes[k].count(), ttr);
      csv += fmt::format("rlf,{},{},{},{}\n", ue, k + 1, t.rlfTimes[k].count(), ttr);
    }
    fmt::print("\nue{}: SI reacquisitions ({})\n", ue, t.reacquisitionTimes.size());
    if (!t.reacquisitionTimes.empty()) fmt::print("  {:>5}  {:>10}  {:>11}\n", "#", "time_ms", "interval_ms");
    for (std::size_t k = 0; k < t.reacquisitionTimes.size(); ++k) {
      const auto at = t.reacquisitionTimes[k].count();
      const std::string interval = k > 0 ? std::to_string(at - t.reacquisitionTimes[k - 1].count()) : "";
      fmt::print("  {:>5}  {:>10}  {:>11}\n", k + 1, at, interval);
      csv += fmt::format("reacquisition,{},{},{},{}\n", ue, k + 1, at, interval);
    }
  }

  std::map<std::string, std::pair<std::size_t, nrsim::SimTime>> alerts;
  for (const auto& e : log.events) {
    if (e.kind != nrsim::EventKind::DetectorAlert) continue;
    auto [it, inserted] = alerts.try_emplace(std::string(e.get("detector")), 0, e.time);
    ++it->second.first;
  }
  fmt::print("\ndetector alerts\n");
  for (const auto& [name, v] : alerts) fmt::print("  {:<16} count={} first_ms={}\n", name, v.first, v.second.count());

  const fs::path csvPath = csvOut ? fs::path(*csvOut) : logPath.parent_path() / "report.csv";
  write_file(csvPath, csv);
  debug("report table written to {}", csvPath.string());

  const fs::path sibling = logPath.parent_path() / "metrics.csv";
  if (fs::exists(sibling)) {
    if (!same_csv(read_file(sibling), nrsim::metrics_csv(m))) {
      fmt::print(stderr, "error: metrics recomputed from {} differ from {}\n", logPath.string(), sibling.string());
      return 2;
    }
    fmt::print("\nmetrics match {}\n", sibling.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nrsim: 5G NR rogue-cell attack simulator"};
  app.require_subcommand(1);

  std::string validatePath;
  auto* validate = app.add_subcommand("validate", "Check a scenario file without running it");
  validate->add_option("file", validatePath, "Scenario file")->required();

  std::vector<std::string> runPaths;
  std::string outDir = ".";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "Run scenarios and write events.log and metrics.csv");
  run->add_option("files", runPaths, "Scenario file(s)")->required();
  run->add_option("--out", outDir, "Output directory (one subdirectory per scenario when several)");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--jobs", jobs, "Scenarios to run in parallel (0 = all cores)")->check(CLI::NonNegativeNumber);

  std::string reportPath;
  std::optional<std::string> csvOut;
  auto* report = app.add_subcommand("report", "Recompute metrics and tables from an events.log");
  report->add_option("events", reportPath, "events.log path")->required();
  report->add_option("--csv", csvOut, "Where to write the table CSV (default: report.csv next to the log)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(validatePath);
    if (*run) return cmd_run(runPaths, outDir, seed, jobs);
    if (*report) return cmd_report(reportPath, csvOut);
  } catch (const ConfigReported&) {
    return 1;
  } catch (const nrsim::ConfigInvalid& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 1;
  } catch (const nrsim::LogFormatError& e) {
    fmt::print(stderr, "error: {}: {}\n", reportPath, e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
