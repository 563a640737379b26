#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "appca/block_model.hpp"
#include "appca/embedding.hpp"

namespace appca {

enum class Scenario { two_by_three, three_by_three, custom };

/// "2x3", "3x3", "custom".
std::string_view scenario_name(Scenario s) noexcept;
std::optional<Scenario> parse_scenario(std::string_view name) noexcept;

/// Synthetic design: G groups of n subjects, B blocks of p features, rank r.
/// Coordinate j of group g's subject factors is multiplied by
/// s = n^((alpha-1)/2) when subject_weak[g][j] is set; likewise coordinate j of
/// block b's feature factors by t = p^((beta-1)/2) when feature_weak[b][j] is
/// set. The named scenarios fix these patterns (and r = 6); `custom` takes
/// them from the config.
struct SimConfig {
  Scenario scenario = Scenario::two_by_three;
  Index n = 500;
  Index p = 500;
  Index r = 6;
  double alpha = 0.5;
  double beta = 0.5;
  std::uint64_t seed = 0;
  double noise_sd = 1.0;

  std::vector<std::vector<bool>> indicator;     // custom only, G x B
  std::vector<std::vector<bool>> subject_weak;  // custom only, G x r
  std::vector<std::vector<bool>> feature_weak;  // custom only, B x r
};

struct ScenarioPattern {
  std::vector<std::vector<bool>> indicator;
  std::vector<std::vector<bool>> subject_weak;
  std::vector<std::vector<bool>> feature_weak;
};

/// Throws ConfigError describing the first violated constraint.
void validate_config(const SimConfig& cfg);

/// Observation and scaling pattern of the config's scenario.
ScenarioPattern scenario_pattern(const SimConfig& cfg);

struct SimInstance {
  MaskedMatrix x;
  Eigen::MatrixXd x_full;
  Eigen::MatrixXd theta_true;
  BlockLayout layout;
};

/// Draws Theta^dagger, Phi^dagger and E with independent standard normal
/// entries from counter-based streams 1, 2 and 3 of `seed` (column-major
/// fill), applies the diagonal rescalings, forms X_full = Theta Phi^T +
/// noise_sd E and masks the unobserved blocks.
SimInstance generate(const SimConfig& cfg);

/// s = n^((alpha - 1) / 2).
double subject_scale(Index n, double alpha);
/// t = p^((beta - 1) / 2).
double feature_scale(Index p, double beta);

}  // namespace appca
