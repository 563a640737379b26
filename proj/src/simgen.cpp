#include "appca/simgen.hpp"

#include <cmath>
#include <sstream>

#include "appca/error.hpp"
#include "appca/random.hpp"

namespace appca {

namespace {

constexpr std::uint64_t kThetaStream = 1;
constexpr std::uint64_t kPhiStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

std::vector<bool> flags(std::initializer_list<int> bits) {
  std::vector<bool> out;
  for (int b : bits) out.push_back(b != 0);
  return out;
}

}  // namespace

std::string_view scenario_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::two_by_three: return "2x3";
    case Scenario::three_by_three: return "3x3";
    case Scenario::custom: return "custom";
  }
  return "unknown";
}

std::optional<Scenario> parse_scenario(std::string_view name) noexcept {
  if (name == "2x3" || name == "two_by_three") return Scenario::two_by_three;
  if (name == "3x3" || name == "three_by_three") return Scenario::three_by_three;
  if (name == "custom") return Scenario::custom;
  return std::nullopt;
}

double subject_scale(Index n, double alpha) {
  return std::pow(static_cast<double>(n), (alpha - 1.0) / 2.0);
}

double feature_scale(Index p, double beta) {
  return std::pow(static_cast<double>(p), (beta - 1.0) / 2.0);
}

ScenarioPattern scenario_pattern(const SimConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::two_by_three:
      // Block 1 is shared and weak in every coordinate; the groups are weak
      // in complementary halves of the coordinates.
      return {{flags({1, 1, 0}), flags({1, 0, 1})},
              {flags({1, 1, 1, 0, 0, 0}), flags({0, 0, 0, 1, 1, 1})},
              {flags({1, 1, 1, 1, 1, 1}), flags({0, 0, 0, 0, 0, 0}), flags({0, 0, 0, 0, 0, 0})}};
    case Scenario::three_by_three:
      // Cyclic observation: each pair of groups shares exactly one block and
      // no block is observed by all three.
      return {{flags({1, 1, 0}), flags({0, 1, 1}), flags({1, 0, 1})},
              {flags({1, 1, 0, 0, 0, 0}), flags({0, 0, 1, 1, 0, 0}), flags({0, 0, 0, 0, 1, 1})},
              {flags({1, 1, 0, 0, 0, 0}), flags({0, 0, 1, 1, 0, 0}), flags({0, 0, 0, 0, 1, 1})}};
    case Scenario::custom:
      return {cfg.indicator, cfg.subject_weak, cfg.feature_weak};
  }
  return {};
}

void validate_config(const SimConfig& cfg) {
  std::ostringstream msg;
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    msg << "alpha must lie in (0, 1]; got " << cfg.alpha;
  } else if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) {
    msg << "beta must lie in (0, 1]; got " << cfg.beta;
  } else if (cfg.r < 1) {
    msg << "rank must be positive; got " << cfg.r;
  } else if (cfg.n < cfg.r || cfg.p < cfg.r) {
    msg << "n and p must be at least the rank " << cfg.r << "; got n = " << cfg.n
        << ", p = " << cfg.p;
  } else if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) {
    msg << "noise_sd must be finite and nonnegative; got " << cfg.noise_sd;
  } else if (cfg.scenario != Scenario::custom && cfg.r != 6) {
    msg << "scenario " << scenario_name(cfg.scenario)
        << " rescales 6 coordinates and requires r = 6; got r = " << cfg.r;
  }
  if (!msg.str().empty()) throw ConfigError(msg.str());

  if (cfg.scenario == Scenario::custom) {
    const std::size_t G = cfg.indicator.size();
    const std::size_t B = G ? cfg.indicator.front().size() : 0;
    bool ok = G > 0 && B > 0 && cfg.subject_weak.size() == G && cfg.feature_weak.size() == B;
    for (const auto& row : cfg.indicator) ok = ok && row.size() == B;
    for (const auto& row : cfg.subject_weak) ok = ok && row.size() == static_cast<std::size_t>(cfg.r);
    for (const auto& row : cfg.feature_weak) ok = ok && row.size() == static_cast<std::size_t>(cfg.r);
    if (!ok) {
      throw ConfigError("custom scenario needs a G x B indicator, G x r subject_weak and B x r "
                        "feature_weak patterns");
    }
    try {
      require_valid_layout(contiguous_layout(cfg.n, cfg.p, cfg.indicator));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
}

SimInstance generate(const SimConfig& cfg) {
  validate_config(cfg);
  const ScenarioPattern pattern = scenario_pattern(cfg);
  const std::size_t G = pattern.indicator.size();
  const std::size_t B = pattern.indicator.front().size();
  const Index total_n = cfg.n * static_cast<Index>(G);
  const Index total_p = cfg.p * static_cast<Index>(B);
  const double s = subject_scale(cfg.n, cfg.alpha);
  const double t = feature_scale(cfg.p, cfg.beta);

  Eigen::MatrixXd theta(total_n, cfg.r);
  CounterRng(cfg.seed, kThetaStream).fill_normal(theta);
  for (std::size_t g = 0; g < G; ++g)
    for (Index j = 0; j < cfg.r; ++j)
      if (pattern.subject_weak[g][static_cast<std::size_t>(j)])
        theta.col(j).segment(static_cast<Index>(g) * cfg.n, cfg.n) *= s;

  Eigen::MatrixXd phi(total_p, cfg.r);
  CounterRng(cfg.seed, kPhiStream).fill_normal(phi);
  for (std::size_t b = 0; b < B; ++b)
    for (Index j = 0; j < cfg.r; ++j)
      if (pattern.feature_weak[b][static_cast<std::size_t>(j)])
        phi.col(j).segment(static_cast<Index>(b) * cfg.p, cfg.p) *= t;

  Eigen::MatrixXd x_full(total_n, total_p);
  if (cfg.noise_sd > 0.0) {
    CounterRng(cfg.seed, kNoiseStream).fill_normal(x_full);
    if (cfg.noise_sd != 1.0) x_full *= cfg.noise_sd;
    x_full.noalias() += theta * phi.transpose();
  } else {
    x_full.noalias() = theta * phi.transpose();
  }

  BlockLayout layout = contiguous_layout(cfg.n, cfg.p, pattern.indicator);
  MaskedMatrix masked(x_full, layout);
  return SimInstance{std::move(masked), std::move(x_full), std::move(theta), std::move(layout)};
}

}  // namespace appca
