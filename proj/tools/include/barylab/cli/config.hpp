#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "barylab/heatreg.hpp"
#include "barylab/measure.hpp"
#include "barylab/space.hpp"

namespace barylab::cli {

using nlohmann::json;

// Space spec: {"file": path} or {"kind", "n", "length" | "circumference" | "radius" | "angle" | "path", "label"}.
DiscreteSpace space_from_spec(const json& spec, const std::string& base_dir = ".");

// Measure spec: {"file"} | {"kind": "uniform"} | {"kind": "dirac", "index"} |
// {"kind": "bump", "center" | "at", "width", "floor"} | {"kind": "weights", "weights"} |
// {"kind": "good", "params", "seed"}.
Measure measure_from_spec(const json& spec, const DiscreteSpace& space, std::uint64_t seed,
                          const std::string& base_dir = ".");

// Law spec: {"file"} | {"atoms": [{"measure", "weight", "good"}]} |
// {"kind": "jittered", "base", "variants", "amplitude"}.
SecondOrderLaw law_from_spec(const json& spec, const DiscreteSpace& space, std::uint64_t seed,
                             const std::string& base_dir = ".");

HeatParams heat_params_from_spec(const json& spec);

const std::vector<std::string>& experiment_kinds();

// Default config of one experiment; throws InvalidArgument for unknown kinds.
json experiment_defaults(const std::string& kind);

// Defaults merged with the user config (objects merge recursively, everything
// else is replaced), then checked: known kind, seed present, positive tolerances.
json effective_config(const json& user);

// Markdown listing of every experiment with its defaults.
std::string defaults_reference();

}  // namespace barylab::cli
