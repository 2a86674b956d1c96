#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "barylab/heatreg.hpp"
#include "barylab/parallel.hpp"
#include "barylab/report.hpp"

namespace barylab::cli {

struct RunContext {
  const Executor* exec = nullptr;
  // Directory relative paths in the config resolve against.
  std::string base_dir = ".";
  // Kernel cache directory; empty disables caching.
  std::string cache_dir;
  // Set when a cache lookup hit.
  bool cache_hit = false;
};

// Heat semigroup for the space, read from or written to the cache when enabled.
HeatSemigroup cached_heat(const DiscreteSpace& space, const HeatParams& params, RunContext& ctx);

// Dispatches an effective config to its lab driver. The returned report carries
// the config, its hash and the seed.
ScanReport run_experiment(const nlohmann::json& cfg, RunContext& ctx);

}  // namespace barylab::cli
