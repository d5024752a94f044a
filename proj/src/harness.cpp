#include "mecprice/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "mecprice/auction.hpp"
#include "mecprice/baselines.hpp"

namespace mecprice {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_field(std::string_view text, int line) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad field '" +
                             std::string(text) + "'");
  return value;
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Proposed: return "proposed";
    case Strategy::UniformPricing: return "UP";
    case Strategy::NoRecruitment: return "NR";
    case Strategy::NoPriority: return "NPPI";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (const Strategy s : kAllStrategies)
    if (iequals(name, strategy_name(s))) return s;
  return std::nullopt;
}

std::optional<SweepAxis> parse_axis(std::string_view name) {
  if (iequals(name, "n_tds") || iequals(name, "tds")) return SweepAxis::Tds;
  if (iequals(name, "n_ads") || iequals(name, "ads")) return SweepAxis::Ads;
  return std::nullopt;
}

AllocationOutcome solve(const Scenario& scenario, Strategy strategy) {
  const auto& market = scenario.market;
  const IncrementPolicy policy{scenario.config.increment_steps};
  const auto recruited = vickrey_rewards(market.ads);
  if (strategy == Strategy::UniformPricing) return allocate_uniform_pricing(market, recruited);

  const auto leader = solve_stackelberg(market, scenario.config.price_tolerance);
  switch (strategy) {
    case Strategy::Proposed: return allocate(market, leader, recruited, policy);
    case Strategy::NoRecruitment: return allocate_no_recruitment(market, leader, policy);
    case Strategy::NoPriority: return allocate_no_priority(market, leader, recruited);
    case Strategy::UniformPricing: break;
  }
  throw std::logic_error("unhandled strategy");
}

ExperimentResult summarize(const Scenario& scenario, Strategy strategy,
                           const AllocationOutcome& outcome) {
  const auto& c = scenario.config;
  ExperimentResult r;
  r.strategy = strategy;
  r.n_tds = c.n_tds;
  r.n_ads = c.n_ads;
  r.seed = c.seed;
  r.es_utility = outcome.es_utility;
  r.mean_td_utility = mean(outcome.td_utilities);
  r.mean_ad_utility = mean(outcome.ad_utilities);
  r.rejections = outcome.rejections();
  r.increments = outcome.total_increments();
  const double cap = scenario.market.es.capacity;
  r.utilization = std::clamp((cap - outcome.ledger.es_remaining) / cap, 0.0, 1.0);
  return r;
}

ExperimentResult run_one(const ScenarioConfig& config, Strategy strategy,
                         const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto scenario = generate(config);
  const auto outcome = solve(scenario, strategy);
  auto result = summarize(scenario, strategy, outcome);
  if (options.record_wall_time)
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<ExperimentResult> sweep(const ScenarioConfig& config_template, SweepAxis axis,
                                    const std::vector<std::size_t>& values,
                                    const std::vector<std::uint64_t>& seeds,
                                    const std::vector<Strategy>& strategies,
                                    const SweepOptions& options) {
  if (values.empty() || seeds.empty() || strategies.empty())
    throw ConfigError("sweep needs at least one value, seed and strategy");

  struct Cell {
    ScenarioConfig config;
    Strategy strategy;
  };
  std::vector<Cell> cells;
  cells.reserve(values.size() * seeds.size() * strategies.size());
  for (const auto v : values) {
    for (const auto seed : seeds) {
      ScenarioConfig c = config_template;
      (axis == SweepAxis::Tds ? c.n_tds : c.n_ads) = v;
      c.seed = seed;
      for (const auto s : strategies) cells.push_back({c, s});
    }
  }

  std::vector<ExperimentResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      try {
        results[k] = run_one(cells[k].config, cells[k].strategy, options.run);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cells.size();
      }
    }
  };

  unsigned n_threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(cells.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

void write_csv(std::ostream& out, const std::vector<ExperimentResult>& results) {
  out << kCsvHeader << '\n';
  for (const auto& r : results) {
    out << strategy_name(r.strategy) << ',' << r.n_tds << ',' << r.n_ads << ',' << r.seed << ','
        << format_double(r.es_utility) << ',' << format_double(r.mean_td_utility) << ','
        << format_double(r.mean_ad_utility) << ',' << r.rejections << ',' << r.increments << ','
        << format_double(r.utilization) << ',' << format_double(r.wall_time_s) << '\n';
  }
}

void emit_csv(const std::vector<ExperimentResult>& results, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, results);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<ExperimentResult> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("csv header mismatch");
  std::vector<ExperimentResult> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    for (auto comma = rest.find(','); comma != std::string_view::npos; comma = rest.find(',')) {
      f.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    f.push_back(rest);
    if (f.size() != 11)
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected 11 fields");
    ExperimentResult r;
    const auto s = parse_strategy(f[0]);
    if (!s) throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad strategy");
    r.strategy = *s;
    r.n_tds = parse_field<std::size_t>(f[1], line_no);
    r.n_ads = parse_field<std::size_t>(f[2], line_no);
    r.seed = parse_field<std::uint64_t>(f[3], line_no);
    r.es_utility = parse_field<double>(f[4], line_no);
    r.mean_td_utility = parse_field<double>(f[5], line_no);
    r.mean_ad_utility = parse_field<double>(f[6], line_no);
    r.rejections = parse_field<std::size_t>(f[7], line_no);
    r.increments = parse_field<long>(f[8], line_no);
    r.utilization = parse_field<double>(f[9], line_no);
    r.wall_time_s = parse_field<double>(f[10], line_no);
    out.push_back(r);
  }
  return out;
}

}  // namespace mecprice
