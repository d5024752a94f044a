// mecsim: run, sweep, calibrate and verify the edge pricing simulator.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mecprice/harness.hpp"
#include "mecprice/scenario.hpp"
#include "mecprice/verification.hpp"

using namespace mecprice;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ScenarioConfig load(const Common& c) {
  ScenarioConfig config = c.config_path.empty() ? ScenarioConfig{} : load_config(c.config_path);
  if (c.seed) config.seed = *c.seed;
  return config;
}

std::vector<Strategy> strategies_from(const std::vector<std::string>& names) {
  if (names.empty()) return {std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::vector<Strategy> out;
  for (const auto& n : names) {
    if (n == "all") return {std::begin(kAllStrategies), std::end(kAllStrategies)};
    const auto s = parse_strategy(n);
    if (!s) throw ConfigError("unknown strategy '" + n + "' (proposed, UP, NR, NPPI, all)");
    out.push_back(*s);
  }
  return out;
}

std::size_t parse_count(std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError("bad count '" + std::string(text) + "'");
  return v;
}

// "100,120,140" or "100..160:10".
std::vector<std::size_t> parse_values(const std::string& text) {
  std::vector<std::size_t> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto colon = text.find(':', dots);
    const std::size_t lo = parse_count(std::string_view(text).substr(0, dots));
    const std::size_t hi = parse_count(std::string_view(text).substr(
        dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
    const std::size_t step =
        colon == std::string::npos ? 1 : parse_count(std::string_view(text).substr(colon + 1));
    if (step == 0 || lo > hi) throw ConfigError("bad value range '" + text + "'");
    for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
    return out;
  }
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    out.push_back(parse_count(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("--values is empty");
  return out;
}

void write_rows(const std::vector<ExperimentResult>& rows, const std::string& out) {
  if (out.empty() || out == "-")
    write_csv(std::cout, rows);
  else
    emit_csv(rows, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg pricing and AD recruitment for single-cell edge computing"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> strategy_names;
  bool timing = false;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config_path, "key = value scenario file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", common.seed, "base seed (overrides the config)");
  };

  auto* run = app.add_subcommand("run", "one scenario, one row per strategy");
  add_common(run);
  run->add_option("--strategy", strategy_names, "proposed, UP, NR, NPPI or all (repeatable)");
  run->add_option("--out", common.out, "CSV path (default stdout)");
  run->add_flag("--timing", timing, "record wall time (output is then not reproducible)");

  auto* sw = app.add_subcommand("sweep", "values x seeds x strategies");
  add_common(sw);
  std::string axis_name = "n_tds";
  std::string values_text;
  std::size_t seed_count = 1;
  sw->add_option("--axis", axis_name, "n_tds or n_ads")->capture_default_str();
  sw->add_option("--values", values_text, "comma list or lo..hi:step")->required();
  sw->add_option("--seeds", seed_count, "number of consecutive seeds from the base seed")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sw->add_option("--strategy", strategy_names, "proposed, UP, NR, NPPI or all (repeatable)");
  sw->add_option("--out", common.out, "CSV path (default stdout)");
  sw->add_option("--threads", threads, "worker threads (0 = all cores)");
  sw->add_flag("--timing", timing, "record wall time (output is then not reproducible)");

  auto* cal = app.add_subcommand("calibrate", "rescale satisfaction so demand meets capacity");
  add_common(cal);
  std::size_t target = 100;
  cal->add_option("--target", target, "TD count at which demand should equal capacity")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cal->add_option("--out", common.out, "config path (default stdout)");

  auto* ver = app.add_subcommand("verify", "run the acceptance checks");
  bool quick = false;
  ver->add_flag("--quick", quick, "fewer draws and seeds");
  ver->add_option("--threads", threads, "worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto config = load(common);
      std::vector<ExperimentResult> rows;
      for (const auto s : strategies_from(strategy_names)) rows.push_back(run_one(config, s, {timing}));
      write_rows(rows, common.out);
    } else if (*sw) {
      const auto config = load(common);
      const auto axis = parse_axis(axis_name);
      if (!axis) throw ConfigError("unknown axis '" + axis_name + "' (n_tds or n_ads)");
      std::vector<std::uint64_t> seeds;
      for (std::size_t k = 0; k < seed_count; ++k) seeds.push_back(config.seed + k);
      const auto rows = sweep(config, *axis, parse_values(values_text), seeds,
                              strategies_from(strategy_names), {{timing}, threads});
      write_rows(rows, common.out);
    } else if (*cal) {
      const auto tuned = calibrate(load(common), target);
      std::fprintf(stderr, "demand ratio at N=%zu: %.4f\n", target, demand_ratio(tuned, target));
      if (common.out.empty() || common.out == "-")
        write_config(std::cout, tuned);
      else
        save_config(common.out, tuned);
    } else if (*ver) {
      AcceptanceOptions options;
      options.quick = quick;
      options.threads = threads;
      options.on_result = [](const CriterionResult& r) {
        std::printf("%s\n", format_result(r).c_str());
        std::fflush(stdout);
      };
      int failed = 0;
      for (const auto& r : run_acceptance(options)) failed += !r.passed;
      std::printf("%d/%d criteria passed\n", kCriterionCount - failed, kCriterionCount);
      return failed == 0 ? 0 : 1;
    }
  } catch (const CalibrationError& e) {
    std::cerr << "mecsim: " << e.what() << " (best demand ratio " << e.ratio << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mecsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
