#include "barylab/cli/config.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "barylab/error.hpp"
#include "barylab/io.hpp"
#include "barylab/lab.hpp"

namespace barylab::cli {

namespace {

std::string resolve(const std::string& path, const std::string& base_dir) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

std::string parent_dir(const std::string& path) {
  auto p = std::filesystem::path(path).parent_path();
  return p.empty() ? std::string(".") : p.string();
}

json bump(double center, double width) { return {{"kind", "bump"}, {"center", center}, {"width", width}}; }

json law_atom(json measure, double weight) { return {{"measure", std::move(measure)}, {"weight", weight}}; }

const json kGood = {{"m_lower", 0.5}, {"M_upper", 2.0}, {"john_eta", 1.0}, {"perimeter_bound", 1.0}, {"alpha", 1.0}};

json defaults_for(const std::string& kind) {
  json base{{"experiment", kind}, {"seed", 1}, {"tol", 1e-8}, {"sigma", 0.5}, {"runtime_cap", 0.0},
            {"plot", {{"svg", true}}}};
  json extra;
  if (kind == "deficit_scan") {
    extra = {{"space", {{"kind", "interval"}, {"n", 40}, {"length", 1.0}}},
             {"rho", {{"kind", "uniform"}}},
             {"good", kGood},
             {"mu0", bump(0.4, 0.15)},
             {"families",
              {{{"family", "mass_shift"}, {"scales", {1.0, 0.8, 0.6, 0.4, 0.3}}},
               {{"family", "translate"}, {"scales", {3.0, 2.0, 1.0, 0.5}}},
               {{"family", "tilt"}, {"scales", {1.0, 0.5, 0.25}}}}}};
  } else if (kind == "g_probe") {
    extra = {{"space", {{"kind", "interval"}, {"n", 40}, {"length", 1.0}}},
             {"rho", {{"kind", "uniform"}}},
             {"mu0", bump(0.3, 0.1)},
             {"mu1", bump(0.6, 0.15)},
             {"cells", 200}};
  } else if (kind == "potential_stability") {
    extra = {{"space", {{"kind", "circle"}, {"n", 60}, {"circumference", 1.0}}},
             {"rho", {{"kind", "uniform"}}},
             {"pairs", 30}};
  } else if (kind == "map_stability") {
    extra = {{"space", {{"kind", "interval"}, {"n", 60}, {"length", 1.0}}},
             {"rho", {{"kind", "uniform"}}},
             {"pairs", 10}};
  } else if (kind == "barycenter_stability") {
    json good_atom = law_atom({{"kind", "uniform"}}, 0.3);
    good_atom["good"] = kGood;
    extra = {{"space", {{"kind", "interval"}, {"n", 30}, {"length", 1.0}}},
             {"law", {{"atoms", {good_atom, law_atom(bump(0.5, 0.1), 0.4), law_atom(bump(0.8, 0.1), 0.3)}}}},
             {"extra", bump(0.5, 0.3)},
             {"families",
              {{{"kind", "atom_jitter"}, {"scales", {0.8, 0.4, 0.2, 0.1, 0.05}}},
               {{"kind", "weight_jitter"}, {"scales", {0.2, 0.1, 0.05}}},
               {{"kind", "atom_addition"}, {"scales", {0.2, 0.1, 0.05}}}}}};
  } else if (kind == "empirical_rate") {
    extra = {{"space", {{"kind", "interval"}, {"n", 25}, {"length", 1.0}}},
             {"law",
              {{"atoms",
                {law_atom(bump(0.1, 0.08), 0.2), law_atom(bump(0.4, 0.08), 0.3), law_atom(bump(0.6, 0.08), 0.25),
                 law_atom(bump(0.9, 0.08), 0.25)}}}},
             {"N_list", {8, 16, 32, 64, 128, 256, 512}},
             {"trials", 20}};
  } else if (kind == "net") {
    extra = {{"space", {{"kind", "circle"}, {"n", 16}, {"circumference", 1.0}}},
             {"epsilons", {0.5, 0.4, 0.3}},
             {"probes", 500},
             {"cap", 5000000}};
  } else if (kind == "heat_limit") {
    extra = {{"space", {{"kind", "interval"}, {"n", 50}, {"length", 1.0}}},
             {"heat", {{"knn", 8}, {"bandwidth_factor", 2.0}}},
             {"instances", 20},
             {"amplitude", 0.5},
             {"t_list", {0.1, 0.05, 0.025, 0.0125}}};
  } else if (kind == "derivative_check") {
    extra = {{"space", {{"kind", "interval"}, {"n", 20}, {"length", 1.0}}},
             {"heat", {{"knn", 8}, {"bandwidth_factor", 2.0}}},
             {"instances", 50},
             {"t_list", {0.2, 0.05, 0.01}}};
  } else if (kind == "kappa_scan") {
    extra = {{"space", {{"kind", "interval"}, {"n", 30}, {"length", 1.0}}},
             {"heat", {{"knn", 8}, {"bandwidth_factor", 2.0}}},
             {"rho", {{"kind", "uniform"}}},
             {"amplitude", 0.1},
             {"s", 0.5},
             {"t_list", {0.2, 0.1, 0.05}}};
  } else {
    throw InvalidArgument("unknown experiment \"" + kind + "\"");
  }
  base.update(extra);
  return base;
}

}  // namespace

DiscreteSpace space_from_spec(const json& spec, const std::string& base_dir) {
  if (!spec.is_object()) throw InvalidArgument("space spec must be an object");
  if (spec.contains("file")) {
    auto path = resolve(spec["file"].get<std::string>(), base_dir);
    return space_from_json(read_json_file(path));
  }
  if (!spec.contains("kind")) throw InvalidArgument("space spec needs \"kind\" or \"file\"");
  const auto kind = space_kind_from_string(spec["kind"].get<std::string>());
  ModelSpaceParams p;
  p.length = spec.value("length", p.length);
  p.circumference = spec.value("circumference", p.circumference);
  p.radius = spec.value("radius", p.radius);
  p.angle = spec.value("angle", p.angle);
  p.label = spec.value("label", std::string());
  if (spec.contains("path")) p.mesh_path = resolve(spec["path"].get<std::string>(), base_dir);
  const auto n = spec.value("n", std::size_t{0});
  if (kind != SpaceKind::mesh && n < 2) throw InvalidArgument("space resolution \"n\" must be at least 2");
  return build_model_space(kind, n, p);
}

Measure measure_from_spec(const json& spec, const DiscreteSpace& space, std::uint64_t seed,
                          const std::string& base_dir) {
  if (!spec.is_object()) throw InvalidArgument("measure spec must be an object");
  if (spec.contains("file")) {
    auto path = resolve(spec["file"].get<std::string>(), base_dir);
    return measure_from_json(read_json_file(path), space);
  }
  const auto kind = spec.value("kind", std::string("uniform"));
  const auto n = static_cast<Eigen::Index>(space.size());
  if (kind == "uniform") return uniform_measure(space);
  if (kind == "dirac") return dirac(space, spec.value("index", std::size_t{0}));
  if (kind == "weights") return make_measure(space, spec.at("weights").get<std::vector<double>>());
  if (kind == "good") {
    auto params = good_params_from_json(spec.value("params", json::object()));
    return sample_good_measure(space, params, all_points(space), spec.value("seed", seed));
  }
  if (kind == "bump") {
    Eigen::Index c = 0;
    if (spec.contains("at")) {
      c = spec["at"].get<Eigen::Index>();
      if (c < 0 || c >= n) throw InvalidArgument("bump center index out of range");
    } else {
      if (space.coords().cols() < 1) throw InvalidArgument("bump \"center\" needs coordinates; use \"at\"");
      const double center = spec.value("center", 0.5);
      (space.coords().col(0).array() - center).abs().minCoeff(&c);
    }
    const double width = spec.value("width", 0.1);
    const double floor = spec.value("floor", 1e-3);
    if (!(width > 0.0) || floor < 0.0) throw InvalidArgument("bump width must be positive and floor nonnegative");
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = space.dist()(i, c);
      w[i] = std::exp(-d * d / (2 * width * width)) + floor;
    }
    return make_measure(space, w);
  }
  throw InvalidArgument("unknown measure kind \"" + kind + "\"");
}

SecondOrderLaw law_from_spec(const json& spec, const DiscreteSpace& space, std::uint64_t seed,
                             const std::string& base_dir) {
  if (!spec.is_object()) throw InvalidArgument("law spec must be an object");
  if (spec.contains("file")) {
    auto path = resolve(spec["file"].get<std::string>(), base_dir);
    return law_from_spec(read_json_file(path), space, seed, parent_dir(path));
  }
  if (spec.value("kind", std::string()) == "jittered") {
    auto base = law_from_spec(spec.at("base"), space, seed, base_dir);
    return jittered_law(base, spec.value("variants", std::size_t{3}), spec.value("amplitude", 0.2),
                        spec.value("seed", seed));
  }
  const auto& arr = spec.at("atoms");
  if (!arr.is_array() || arr.empty()) throw InvalidArgument("law needs a nonempty \"atoms\" array");
  std::vector<LawAtom> atoms;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& a = arr[i];
    Measure m = a.contains("measure") ? measure_from_spec(a["measure"], space, seed + i, base_dir)
                : a.contains("weights") ? measure_from_json(a, space)
                                        : measure_from_spec(a, space, seed + i, base_dir);
    LawAtom atom{m, a.at("weight").get<double>(), std::nullopt};
    if (a.contains("good")) atom.good = good_params_from_json(a["good"]);
    atoms.push_back(std::move(atom));
  }
  return SecondOrderLaw(std::move(atoms));
}

HeatParams heat_params_from_spec(const json& spec) {
  HeatParams p;
  if (!spec.is_object()) return p;
  p.knn = spec.value("knn", p.knn);
  p.bandwidth_factor = spec.value("bandwidth_factor", p.bandwidth_factor);
  if (spec.contains("bandwidth")) p.bandwidth = spec["bandwidth"].get<double>();
  return p;
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"deficit_scan",         "g_probe",       "potential_stability",
                                              "map_stability",        "barycenter_stability",
                                              "empirical_rate",       "net",           "heat_limit",
                                              "derivative_check",     "kappa_scan"};
  return kinds;
}

json experiment_defaults(const std::string& kind) { return defaults_for(kind); }

json effective_config(const json& user) {
  if (!user.is_object()) throw InvalidArgument("config must be a JSON object");
  if (!user.contains("experiment") || !user["experiment"].is_string())
    throw InvalidArgument("config needs an \"experiment\" name");
  json cfg = defaults_for(user["experiment"].get<std::string>());
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (it.value().is_object() && cfg.contains(it.key()) && cfg[it.key()].is_object() && it.key() != "space" &&
        it.key() != "law" && it.key() != "rho" && it.key() != "mu0" && it.key() != "mu1" && it.key() != "extra")
      cfg[it.key()].merge_patch(it.value());
    else
      cfg[it.key()] = it.value();
  }
  if (!cfg["seed"].is_number_integer() || cfg["seed"].get<std::int64_t>() < 0)
    throw InvalidArgument("seed must be a nonnegative integer");
  for (const char* key : {"tol", "sigma"})
    if (!cfg[key].is_number() || !(cfg[key].get<double>() > 0.0))
      throw InvalidArgument(std::string(key) + " must be positive");
  if (!cfg["runtime_cap"].is_number() || cfg["runtime_cap"].get<double>() < 0.0)
    throw InvalidArgument("runtime_cap must be nonnegative");
  return cfg;
}

std::string defaults_reference() {
  std::ostringstream out;
  out << "# Experiment defaults\n\n"
         "Every key may be overridden in the config file. Objects such as `plot`, `good` and `heat` merge\n"
         "key by key; `space`, `law` and measure specs are replaced whole. `--seed`, `--sigma` and `--tol`\n"
         "override the config when given on the command line.\n";
  for (const auto& k : experiment_kinds()) out << "\n## " << k << "\n\n```json\n" << defaults_for(k).dump(2) << "\n```\n";
  return out.str();
}

}  // namespace barylab::cli
