#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "appca/embedding.hpp"
#include "appca/simgen.hpp"

namespace appca {

/// One (config, replicate, method) cell of a sweep.
struct RunRecord {
  std::string method;
  Scenario scenario = Scenario::two_by_three;
  Index n = 0;
  Index p = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> normalized_error;  // empty for failed cells
  std::string error;                       // failure message, empty on success
  double wall_time = 0.0;                  // seconds spent fitting

  // In-memory diagnostics, not part of the serialized record.
  std::size_t config_index = 0;
  int rep = 0;
  double raw_error = 0.0;
  double theta_norm = 0.0;
  std::optional<double> projector_form;

  bool ok() const noexcept { return normalized_error.has_value(); }
};

struct ExperimentSpec {
  std::vector<SimConfig> configs;
  std::vector<Method> methods;
  int reps = 1;
  std::uint64_t base_seed = 0;
  int workers = 1;
};

/// Fits `method` on a simulated instance. Chain plans come from
/// discover_chain, two-step aligns to group 1 and cross-fit folds are seeded
/// with `fold_seed`.
Embedding fit_simulated(const SimInstance& sim, Method method, Index r, std::uint64_t fold_seed);

/// Runs every (config, rep) cell with seed = base_seed + rep, fitting and
/// scoring each method against the true factors. Cells run on `workers`
/// threads; each cell is computed single-threaded from its own seed, so the
/// output (ordered by config, rep, method) does not depend on the worker
/// count. Failures become error records.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec);

struct SummaryRow {
  std::string method;
  Scenario scenario = Scenario::two_by_three;
  Index n = 0;
  Index p = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t count = 0;   // successful cells
  std::size_t failed = 0;
  double mean_error = 0.0;
  double sd_error = 0.0;   // sample standard deviation (0 when count < 2)
};

/// Mean and sd per (method, scenario, n, p, alpha, beta), in first-seen order.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

struct SlopeRow {
  std::string method;
  Scenario scenario = Scenario::two_by_three;
  double alpha = 0.0;
  double beta = 0.0;
  std::string regime;   // "n=p", "n=<value>" or "p=<value>"
  std::string scale;    // "p" or "n"
  std::size_t points = 0;
  double slope = 0.0;
  double intercept = 0.0;
};

/// Log-log slopes of mean error for every series with >= 3 distinct scales:
/// the diagonal n = p, fixed n with varying p, and fixed p with varying n.
std::vector<SlopeRow> fit_slopes(const std::vector<SummaryRow>& summary);

}  // namespace appca
