#include "appca/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <thread>
#include <tuple>

#include "appca/anchor_pca.hpp"
#include "appca/baselines.hpp"
#include "appca/chain.hpp"
#include "appca/error.hpp"
#include "appca/metrics.hpp"

namespace appca {

Embedding fit_simulated(const SimInstance& sim, Method method, Index r, std::uint64_t fold_seed) {
  switch (method) {
    case Method::appca: return appca_fit(sim.x, r);
    case Method::appca_crossfit: return appca_crossfit(sim.x, r, fold_seed);
    case Method::chain: {
      const ChainDiscovery found = discover_chain(sim.layout);
      if (!found.plan) throw FeasibilityError(found.reason);
      return chain_fit(sim.x, *found.plan, r);
    }
    case Method::shared_pca: return shared_pca_fit(sim.x, r);
    case Method::two_step: return two_step_fit(sim.x, r, 0);
    case Method::oracle: return oracle_fit(sim.x_full, r);
  }
  throw DomainError("unknown method");
}

namespace {

RunRecord blank_record(const SimConfig& cfg, Method m, std::uint64_t seed, std::size_t config_index,
                       int rep) {
  RunRecord rec;
  rec.method = std::string(method_name(m));
  rec.scenario = cfg.scenario;
  rec.n = cfg.n;
  rec.p = cfg.p;
  rec.alpha = cfg.alpha;
  rec.beta = cfg.beta;
  rec.seed = seed;
  rec.config_index = config_index;
  rec.rep = rep;
  return rec;
}

std::vector<RunRecord> run_cell(const ExperimentSpec& spec, std::size_t config_index, int rep) {
  SimConfig cfg = spec.configs[config_index];
  cfg.seed = spec.base_seed + static_cast<std::uint64_t>(rep);
  std::vector<RunRecord> out;
  out.reserve(spec.methods.size());

  std::optional<SimInstance> sim;
  std::string gen_error;
  try {
    sim.emplace(generate(cfg));
  } catch (const std::exception& e) {
    gen_error = std::string("generate: ") + e.what();
  }

  for (Method m : spec.methods) {
    RunRecord rec = blank_record(cfg, m, cfg.seed, config_index, rep);
    if (!sim) {
      rec.error = gen_error;
      out.push_back(std::move(rec));
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      const Embedding e = fit_simulated(*sim, m, cfg.r, cfg.seed);
      const ErrorReport report = alignment_error(e, sim->theta_true);
      rec.normalized_error = report.normalized;
      rec.raw_error = report.raw_error;
      rec.projector_form = report.projector_form;
      rec.theta_norm = sim->theta_true.norm();
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec) {
  if (spec.reps < 1) throw ConfigError("reps must be at least 1");
  if (spec.methods.empty()) throw ConfigError("no methods requested");
  const std::size_t cells = spec.configs.size() * static_cast<std::size_t>(spec.reps);
  std::vector<std::vector<RunRecord>> results(cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next.fetch_add(1); c < cells; c = next.fetch_add(1)) {
      const std::size_t config_index = c / static_cast<std::size_t>(spec.reps);
      const int rep = static_cast<int>(c % static_cast<std::size_t>(spec.reps));
      results[c] = run_cell(spec, config_index, rep);
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(spec.workers, 1)), std::max<std::size_t>(cells, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<RunRecord> flat;
  flat.reserve(cells * spec.methods.size());
  for (auto& cell : results)
    for (auto& rec : cell) flat.push_back(std::move(rec));
  return flat;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  using Key = std::tuple<std::string, int, Index, Index, double, double>;
  std::map<Key, std::size_t> slot;
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> values;
  for (const auto& rec : records) {
    const Key key{rec.method, static_cast<int>(rec.scenario), rec.n, rec.p, rec.alpha, rec.beta};
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, rows.size()).first;
      SummaryRow row;
      row.method = rec.method;
      row.scenario = rec.scenario;
      row.n = rec.n;
      row.p = rec.p;
      row.alpha = rec.alpha;
      row.beta = rec.beta;
      rows.push_back(row);
      values.emplace_back();
    }
    if (rec.ok()) {
      values[it->second].push_back(*rec.normalized_error);
    } else {
      ++rows[it->second].failed;
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& v = values[i];
    rows[i].count = v.size();
    if (v.empty()) {
      rows[i].mean_error = std::numeric_limits<double>::quiet_NaN();
      rows[i].sd_error = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    rows[i].mean_error = mean;
    rows[i].sd_error = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return rows;
}

std::vector<SlopeRow> fit_slopes(const std::vector<SummaryRow>& summary) {
  using SeriesKey = std::tuple<std::string, int, double, double, std::string, std::string>;
  std::map<SeriesKey, std::vector<std::pair<double, double>>> series;
  std::vector<SeriesKey> order;
  auto add = [&](const SummaryRow& row, std::string regime, std::string scale, double x) {
    SeriesKey key{row.method, static_cast<int>(row.scenario), row.alpha, row.beta,
                  std::move(regime), std::move(scale)};
    auto [it, inserted] = series.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.emplace_back(x, row.mean_error);
  };
  for (const auto& row : summary) {
    if (row.count == 0 || !(row.mean_error > 0.0)) continue;
    if (row.n == row.p) add(row, "n=p", "p", static_cast<double>(row.p));
    add(row, "n=" + std::to_string(row.n), "p", static_cast<double>(row.p));
    add(row, "p=" + std::to_string(row.p), "n", static_cast<double>(row.n));
  }
  std::vector<SlopeRow> out;
  for (const auto& key : order) {
    const auto& pts = series[key];
    std::set<double> scales;
    for (const auto& pt : pts) scales.insert(pt.first);
    if (scales.size() < 3) continue;
    const LogLogFit fit = fit_loglog_slope(pts);
    SlopeRow row;
    row.method = std::get<0>(key);
    row.scenario = static_cast<Scenario>(std::get<1>(key));
    row.alpha = std::get<2>(key);
    row.beta = std::get<3>(key);
    row.regime = std::get<4>(key);
    row.scale = std::get<5>(key);
    row.points = pts.size();
    row.slope = fit.slope;
    row.intercept = fit.intercept;
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace appca
