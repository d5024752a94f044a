#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string_view>

#include "mecprice/scenario.hpp"

namespace mecprice {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError(where + ": cannot parse '" + std::string(text) + "'");
  return value;
}

Range parse_range(std::string_view text, const std::string& where) {
  const auto sep = text.find("..");
  if (sep == std::string_view::npos)
    throw ConfigError(where + ": expected a range 'lo..hi'");
  return {parse_number<double>(trim(text.substr(0, sep)), where),
          parse_number<double>(trim(text.substr(sep + 2)), where)};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view, const std::string&)>;

Setter range_field(Range ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, std::string_view v, const std::string& w) {
    c.*field = parse_range(v, w);
  };
}

Setter double_field(double ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, std::string_view v, const std::string& w) {
    c.*field = parse_number<double>(v, w);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"n_tds", [](ScenarioConfig& c, std::string_view v,
                   const std::string& w) { c.n_tds = parse_number<std::size_t>(v, w); }},
      {"n_ads", [](ScenarioConfig& c, std::string_view v,
                   const std::string& w) { c.n_ads = parse_number<std::size_t>(v, w); }},
      {"seed", [](ScenarioConfig& c, std::string_view v,
                  const std::string& w) { c.seed = parse_number<std::uint64_t>(v, w); }},
      {"deadline", range_field(&ScenarioConfig::deadline)},
      {"task_size", range_field(&ScenarioConfig::task_size)},
      {"task_size_unit",
       [](ScenarioConfig& c, std::string_view v, const std::string& w) {
         if (v == "megabit")
           c.task_size_unit = TaskSizeUnit::Megabit;
         else if (v == "megabyte")
           c.task_size_unit = TaskSizeUnit::Megabyte;
         else
           throw ConfigError(w + ": task_size_unit must be megabit or megabyte");
       }},
      {"ad_capacity", range_field(&ScenarioConfig::ad_capacity)},
      {"td_distance", range_field(&ScenarioConfig::td_distance)},
      {"ad_distance", range_field(&ScenarioConfig::ad_distance)},
      {"satisfaction", range_field(&ScenarioConfig::satisfaction)},
      {"complexity", range_field(&ScenarioConfig::complexity)},
      {"local_energy", range_field(&ScenarioConfig::local_energy)},
      {"bid_fraction", range_field(&ScenarioConfig::bid_fraction)},
      {"td_power", double_field(&ScenarioConfig::td_power)},
      {"fading", double_field(&ScenarioConfig::fading)},
      {"noise", double_field(&ScenarioConfig::noise)},
      {"energy_cost", double_field(&ScenarioConfig::energy_cost)},
      {"es_capacity", double_field(&ScenarioConfig::es_capacity)},
      {"es_energy", double_field(&ScenarioConfig::es_energy)},
      {"bs_power", double_field(&ScenarioConfig::bs_power)},
      {"bandwidth", double_field(&ScenarioConfig::bandwidth)},
      {"pathloss_exponent", double_field(&ScenarioConfig::pathloss_exponent)},
      {"pathloss_convention",
       [](ScenarioConfig& c, std::string_view v, const std::string& w) {
         if (v == "decaying")
           c.pathloss_convention = PathLossConvention::Decaying;
         else if (v == "literal")
           c.pathloss_convention = PathLossConvention::Literal;
         else
           throw ConfigError(w + ": pathloss_convention must be decaying or literal");
       }},
      {"completion_value_factor", double_field(&ScenarioConfig::completion_value_factor)},
      {"increment_steps", [](ScenarioConfig& c, std::string_view v,
                             const std::string& w) { c.increment_steps = parse_number<int>(v, w); }},
      {"price_tolerance", double_field(&ScenarioConfig::price_tolerance)},
  };
  return table;
}

}  // namespace

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;

    const std::string where = "line " + std::to_string(line_no);
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + ": unknown key '" + std::string(key) + "'");
    it->second(config, value, where + " (" + std::string(key) + ")");
  }
  config.validate();
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_config(std::ostream& out, const ScenarioConfig& c) {
  auto range = [](const Range& r) { return format_double(r.lo) + ".." + format_double(r.hi); };
  out << "# device-assisted edge pricing scenario\n";
  out << "n_tds = " << c.n_tds << "\n";
  out << "n_ads = " << c.n_ads << "\n";
  out << "seed = " << c.seed << "\n";
  out << "deadline = " << range(c.deadline) << "\n";
  out << "task_size = " << range(c.task_size) << "\n";
  out << "task_size_unit = "
      << (c.task_size_unit == TaskSizeUnit::Megabit ? "megabit" : "megabyte") << "\n";
  out << "ad_capacity = " << range(c.ad_capacity) << "\n";
  out << "td_distance = " << range(c.td_distance) << "\n";
  out << "ad_distance = " << range(c.ad_distance) << "\n";
  out << "satisfaction = " << range(c.satisfaction) << "\n";
  out << "complexity = " << range(c.complexity) << "\n";
  out << "local_energy = " << range(c.local_energy) << "\n";
  out << "bid_fraction = " << range(c.bid_fraction) << "\n";
  out << "td_power = " << format_double(c.td_power) << "\n";
  out << "fading = " << format_double(c.fading) << "\n";
  out << "noise = " << format_double(c.noise) << "\n";
  out << "energy_cost = " << format_double(c.energy_cost) << "\n";
  out << "es_capacity = " << format_double(c.es_capacity) << "\n";
  out << "es_energy = " << format_double(c.es_energy) << "\n";
  out << "bs_power = " << format_double(c.bs_power) << "\n";
  out << "bandwidth = " << format_double(c.bandwidth) << "\n";
  out << "pathloss_exponent = " << format_double(c.pathloss_exponent) << "\n";
  out << "pathloss_convention = "
      << (c.pathloss_convention == PathLossConvention::Decaying ? "decaying" : "literal") << "\n";
  out << "completion_value_factor = " << format_double(c.completion_value_factor) << "\n";
  out << "increment_steps = " << c.increment_steps << "\n";
  out << "price_tolerance = " << format_double(c.price_tolerance) << "\n";
}

void save_config(const std::filesystem::path& path, const ScenarioConfig& config) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  write_config(out, config);
}

}  // namespace mecprice
