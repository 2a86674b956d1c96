#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "barylab/barycenter.hpp"
#include "barylab/heatreg.hpp"
#include "barylab/measure.hpp"
#include "barylab/nets.hpp"
#include "barylab/space.hpp"
#include "barylab/transport.hpp"

namespace barylab {

using nlohmann::json;

// Provenance written into every output file.
struct RunStamp {
  std::string config_hash;
  std::uint64_t seed = 0;
};

// Adds "config_hash" and "seed" to an object.
json stamped(json j, const RunStamp& stamp);

json read_json_file(const std::string& path);
// Writes through a temporary file and a rename.
void write_text_file(const std::string& path, const std::string& text);

// {label, kind, dim_n, curv_k, period, n, points, dist (row-major), ref_measure}
json space_to_json(const DiscreteSpace& space);
DiscreteSpace space_from_json(const json& j);

// {space_label, weights}
json measure_to_json(const Measure& mu);
Measure measure_from_json(const json& j, const DiscreteSpace& space);

json good_params_to_json(const GoodMeasureParams& p);
GoodMeasureParams good_params_from_json(const json& j);

// {space_label, atoms: [{weight, weights, good?}]}
json law_to_json(const SecondOrderLaw& P);
SecondOrderLaw law_from_json(const json& j, const DiscreteSpace& space);

// {value, w2, coupling: [[x, y, mass]], phi, psi, gap, normalization}
json w2_to_json(const W2Result& r);
W2Result w2_from_json(const json& j);

// {t, bandwidth, knn, n, kernel (row-major)}
json heat_kernel_to_json(const HeatKernel& k);

json heat_semigroup_to_json(const HeatSemigroup& h);
HeatSemigroup heat_semigroup_from_json(const json& j, const DiscreteSpace& space);

// {weights, variance, per_atom: [{gap, phi, psi}], flags}
json barycenter_to_json(const BarycenterResult& r);
json balance_to_json(const BalanceResult& r);
json net_to_json(const NetResult& r, bool with_measures = true);

}  // namespace barylab
