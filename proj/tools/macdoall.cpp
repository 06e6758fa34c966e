// Command-line front end: single runs, sweeps, bound fits, the statistical
// checks and poset analysis.
//
// Exit codes: 0 on success, 1 when a run violates reliability or a check
// fails, 2 when the configuration or the command line is invalid.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "macdoall/config.hpp"
#include "macdoall/engine.hpp"
#include "macdoall/harness.hpp"
#include "macdoall/poset.hpp"
#include "macdoall/verify.hpp"

namespace fs = std::filesystem;
using namespace macdoall;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigInvalid("cannot write " + path.string());
  out << body;
}

fs::path prepare_out(const std::string& dir) {
  fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigInvalid("cannot create " + dir + ": " + ec.message());
  return out;
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out) {
  auto rc = parse_run_config(load_json_file(config));
  if (seed) rc.setup.seed = *seed;
  auto strategy = make_strategy(rc.strategy);
  const auto result = run(rc.setup, rc.adversary, *strategy);
  const auto report = verify_reliability(result.trace, rc.setup.t);

  auto summary = summary_json(result.trace);
  summary["metrics"] = to_json(result.metrics);
  summary["reliable"] = report.ok;
  summary["violations"] = report.violations;
  std::cout << summary.dump(2) << '\n';
  if (!out.empty()) {
    const auto dir = prepare_out(out);
    write_file(dir / "trace.jsonl", trace_to_jsonl(result.trace));
    write_file(dir / "summary.json", summary.dump(2) + "\n");
  }
  return result.trace.outcome.ok() && report.ok ? kOk : kFailed;
}

int cmd_sweep(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out) {
  auto cfg = parse_sweep_config(load_json_file(config));
  if (seed) cfg.master_seed = *seed;
  const auto rows = sweep(cfg);
  const auto report = report_json(rows);
  std::size_t failures = 0;
  for (const auto& r : rows) failures += r.failures;
  if (!out.empty()) {
    const auto dir = prepare_out(out);
    write_file(dir / "sweep.csv", to_csv(rows));
    write_file(dir / "report.json", report.dump(2) + "\n");
  } else {
    std::cout << to_csv(rows);
  }
  std::cerr << rows.size() << " cells, " << failures << " unreliable runs\n";
  return failures == 0 ? kOk : kFailed;
}

/// Fits either a saved sweep report or a sweep config (which is run first).
int cmd_fit(const std::string& input, double threshold, std::optional<std::uint64_t> seed) {
  const auto j = load_json_file(input);
  std::vector<double> ratios;
  if (j.contains("rows")) {
    for (const auto& r : j.at("rows")) ratios.push_back(r.at("ratio").get<double>());
  } else {
    auto cfg = parse_sweep_config(j);
    if (seed) cfg.master_seed = *seed;
    for (const auto& r : sweep(cfg)) ratios.push_back(r.ratio);
  }
  const auto fit = fit_ratio(ratios);
  auto report = to_json(fit);
  report["threshold"] = threshold;
  report["holds"] = fit.holds(threshold);
  std::cout << report.dump(2) << '\n';
  return fit.holds(threshold) ? kOk : kFailed;
}

int cmd_verify(std::uint64_t seed, const std::string& out) {
  const auto checks = run_verify_suite(seed);
  nlohmann::ordered_json report;
  report["seed"] = seed;
  auto arr = nlohmann::ordered_json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back(to_json(c));
    all = all && c.pass;
  }
  report["checks"] = std::move(arr);
  report["pass"] = all;
  std::cout << report.dump(2) << '\n';
  if (!out.empty()) write_file(prepare_out(out) / "verify.json", report.dump(2) + "\n");
  return all ? kOk : kFailed;
}

int cmd_poset_check(const std::string& file) {
  const auto poset = config_guard([&] { return parse_poset(load_json_file(file)); });
  constexpr std::size_t cap = 4096;
  const auto chains = min_chain_cover(poset, cap);
  const auto antichain = max_antichain(poset, cap);
  nlohmann::ordered_json j;
  j["elements"] = poset.size();
  j["thickness"] = antichain.size();
  j["chains"] = chains.size();
  j["max_antichain"] = antichain;
  j["chain_cover"] = chains;
  std::cout << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Do-All on a shared channel: simulate, sweep and check"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config, "JSON config file");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "override the config seed");

  auto* run_cmd = app.add_subcommand("run", "one simulation; prints summary and metrics");
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep; writes sweep.csv and report.json");

  auto* fit_cmd = app.add_subcommand("fit", "ratio fit of a sweep report or config");
  std::string fit_input;
  double threshold = 10.0;
  fit_cmd->add_option("input", fit_input, "report.json or sweep config");
  fit_cmd->add_option("--threshold", threshold, "spread below which the bound holds");

  auto* verify_cmd = app.add_subcommand("verify", "statistical checks of the probability lemmas");

  auto* poset_cmd = app.add_subcommand("poset-check", "thickness and chain cover of a poset file");
  std::string poset_file;
  poset_cmd->add_option("file", poset_file, "poset JSON");

  for (auto* sub : {run_cmd, sweep_cmd, fit_cmd, verify_cmd, poset_cmd}) {
    sub->add_option("--config", config, "JSON config file");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "override the config seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    auto need = [](const std::string& value, const char* what) -> const std::string& {
      if (value.empty()) throw ConfigInvalid(std::string("missing ") + what);
      return value;
    };
    if (*run_cmd) return cmd_run(need(config, "--config"), seed, out);
    if (*sweep_cmd) return cmd_sweep(need(config, "--config"), seed, out);
    if (*fit_cmd) return cmd_fit(need(fit_input.empty() ? config : fit_input, "input"), threshold, seed);
    if (*verify_cmd) return cmd_verify(seed.value_or(1), out);
    if (*poset_cmd) return cmd_poset_check(need(poset_file.empty() ? config : poset_file, "poset file"));
  } catch (const Error& e) {
    // Anything the library rejects up front (bad config, unknown names, an
    // order with a cycle, a protocol on the wrong channel).
    std::cerr << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
