#include "mecprice/scenario.hpp"

#include <cmath>
#include <random>

#include "mecprice/allocator.hpp"

namespace mecprice {

namespace {

// Distinct stream tags keep TD draws independent of the AD count.
constexpr std::uint32_t kTdStream = 0x7d5eed01u;
constexpr std::uint32_t kAdStream = 0xad5eed02u;

class Sampler {
 public:
  Sampler(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      stream};
    engine_.seed(seq);
  }

  // Uniform on [0, 1) from the top 53 bits; identical on every platform.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double draw(const Range& r) { return r.at(unit()); }

 private:
  std::mt19937_64 engine_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void require_range(const Range& r, const std::string& name) {
  require(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo > 0.0 && r.lo <= r.hi,
          name + " must be a positive range with lo <= hi");
}

}  // namespace

double ScenarioConfig::bits_per_size_unit() const {
  return task_size_unit == TaskSizeUnit::Megabit ? 1e6 : 8e6;
}

void ScenarioConfig::validate() const {
  require_range(deadline, "deadline");
  require_range(task_size, "task_size");
  require_range(ad_capacity, "ad_capacity");
  require_range(td_distance, "td_distance");
  require_range(ad_distance, "ad_distance");
  require_range(satisfaction, "satisfaction");
  require_range(complexity, "complexity");
  require_range(local_energy, "local_energy");
  require_range(bid_fraction, "bid_fraction");
  require(td_power > 0.0, "td_power must be positive");
  require(fading > 0.0, "fading must be positive");
  require(noise > 0.0, "noise must be positive");
  require(energy_cost > 0.0, "energy_cost must be positive");
  require(es_capacity > 0.0, "es_capacity must be positive");
  require(es_energy > local_energy.hi, "es_energy must exceed the whole local_energy range");
  require(bs_power > 0.0, "bs_power must be positive");
  require(bandwidth > 0.0, "bandwidth must be positive");
  require(pathloss_exponent > 0.0, "pathloss_exponent must be positive");
  require(completion_value_factor >= 1.0, "completion_value_factor must be >= 1");
  require(increment_steps >= 1, "increment_steps must be >= 1");
  require(price_tolerance > 0.0, "price_tolerance must be positive");
}

Scenario generate(const ScenarioConfig& config) {
  config.validate();
  Scenario s;
  s.config = config;
  auto& m = s.market;
  m.channel = {config.bandwidth, config.noise, config.fading, config.pathloss_exponent,
               config.bs_power, config.pathloss_convention};
  m.econ = {config.energy_cost};
  m.es = {config.es_capacity, config.es_energy};

  Sampler td_rng(config.seed, kTdStream);
  m.tds.reserve(config.n_tds);
  for (std::size_t i = 0; i < config.n_tds; ++i) {
    TdProfile td;
    td.id = i;
    td.distance = td_rng.draw(config.td_distance);
    td.task.deadline = td_rng.draw(config.deadline);
    td.task.size = td_rng.draw(config.task_size) * config.bits_per_size_unit();
    td.task.complexity = td_rng.draw(config.complexity);
    td.local_energy = td_rng.draw(config.local_energy);
    td.satisfaction = td_rng.draw(config.satisfaction);
    td.tx_power = config.td_power;
    td.completion_value = config.completion_value_factor * td.local_processing_cost(m.econ);
    m.tds.push_back(td);
  }

  Sampler ad_rng(config.seed, kAdStream);
  const double floor = config.energy_cost * config.es_energy;
  m.ads.reserve(config.n_ads);
  for (std::size_t j = 0; j < config.n_ads; ++j) {
    AdProfile ad;
    ad.id = j + 1;
    ad.capacity = ad_rng.draw(config.ad_capacity);
    ad.distance = ad_rng.draw(config.ad_distance);
    ad.bid = ad_rng.draw(config.bid_fraction) * floor;
    m.ads.push_back(ad);
  }

  m.validate();
  return s;
}

double demand_ratio(const ScenarioConfig& config, std::size_t n_tds, std::size_t seeds) {
  ScenarioConfig c = config;
  c.n_tds = n_tds;
  c.n_ads = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < seeds; ++k) {
    c.seed = config.seed + k;
    const auto s = generate(c);
    const auto solutions = solve_stackelberg(s.market, c.price_tolerance);
    sum += total_es_demand(s.market, solutions) / c.es_capacity;
  }
  return sum / static_cast<double>(seeds);
}

ScenarioConfig calibrate(const ScenarioConfig& config, std::size_t target_n,
                         const CalibrationOptions& options) {
  if (target_n < 1) throw ConfigError("calibration target must be at least one TD");
  config.validate();

  auto scaled = [&](double factor) {
    ScenarioConfig c = config;
    c.satisfaction = {config.satisfaction.lo * factor, config.satisfaction.hi * factor};
    return c;
  };
  auto ratio_at = [&](double log_factor) {
    return demand_ratio(scaled(std::exp(log_factor)), target_n, options.seeds);
  };

  const double base_ratio = ratio_at(0.0);
  if (std::abs(base_ratio - 1.0) <= options.band) return config;

  double best_log = 0.0;
  double best_ratio = base_ratio;
  auto consider = [&](double log_factor, double r) {
    if (std::abs(r - 1.0) < std::abs(best_ratio - 1.0)) {
      best_log = log_factor;
      best_ratio = r;
    }
  };

  // Demand grows with the satisfaction scale; bracket the crossing first.
  double lo = 0.0;
  double hi = 0.0;
  const double stride = std::log(4.0);
  int iterations = 0;
  if (base_ratio < 1.0) {
    double r = base_ratio;
    while (r < 1.0 && iterations++ < options.max_iterations) {
      lo = hi;
      hi += stride;
      r = ratio_at(hi);
      consider(hi, r);
    }
  } else {
    double r = base_ratio;
    while (r > 1.0 && iterations++ < options.max_iterations) {
      hi = lo;
      lo -= stride;
      r = ratio_at(lo);
      consider(lo, r);
    }
  }

  while (std::abs(best_ratio - 1.0) > options.target && iterations++ < options.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    const double r = ratio_at(mid);
    consider(mid, r);
    if (r < 1.0)
      lo = mid;
    else
      hi = mid;
  }

  if (std::abs(best_ratio - 1.0) > options.band)
    throw CalibrationError("calibration did not reach the demand band", scaled(std::exp(best_log)),
                           best_ratio);
  return scaled(std::exp(best_log));
}

}  // namespace mecprice
