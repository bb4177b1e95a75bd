#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pift/dataset.hpp"
#include "pift/geometry.hpp"

namespace pift {

/// Command-line overrides applied while resolving a config.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  /// Swap in the full_* step counts where a section provides them.
  bool full = false;
};

/// Experiment kinds, matching `experiment.kind`.
inline constexpr const char* kAnalyticKg = "analytic-kg";
inline constexpr const char* kForwardSgld = "forward-sgld";
inline constexpr const char* kInverseSgld = "inverse-sgld";
inline constexpr const char* kForwardHmc = "forward-hmc";

/// Validates a raw config tree and fills every default. The result is
/// complete: resolving it again yields the same tree. Throws ConfigError
/// naming the offending key.
nlohmann::json resolve_config(const nlohmann::json& raw, const RunOptions& options = {});

/// Outcome of one experiment run.
struct RunReport {
  /// 0 on success, 3 when the sampler aborted (partial chain written).
  int exit_code = 0;
  std::string message;
  nlohmann::json diagnostics;
};

/// Runs a resolved config and writes resolved-config.json, chain.csv (or
/// posterior-grid.csv), summary.csv and diagnostics.json into `out_dir`.
RunReport run_experiment(const nlohmann::json& resolved, const std::string& out_dir);

/// Runs every (variant, value, seed) job of the config's [sweep] table, each
/// into its own subdirectory, then writes sweep-summary.csv and sweep.json.
/// Returns the sweep.json content. Throws ConfigError when [sweep] is absent.
nlohmann::json run_sweep(const nlohmann::json& raw, const std::string& out_dir,
                         const RunOptions& options = {});

/// Measurement layout for synthetic data.
struct SyntheticDesign {
  /// "equidistant_interior" (1D) or "boundary_uniform" (2D box).
  std::string layout = "equidistant_interior";
  int num_points = 40;
  /// Sides for boundary_uniform, from {bottom, right, top, left}.
  std::vector<std::string> boundaries = {"bottom", "right", "top"};
  int per_boundary = 15;
  /// Noise standard deviation; 0 gives exact values.
  double sigma = 0.01;
};

/// d_j = truth(x_j) + sigma * standard normal. Random locations are drawn
/// first, then the noise, from one engine seeded with `seed`.
Dataset generate_synthetic(const SyntheticDesign& design,
                           const std::function<double(const Point&)>& truth,
                           const Domain& domain, std::uint64_t seed);

}  // namespace pift
