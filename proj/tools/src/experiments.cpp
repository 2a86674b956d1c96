#include "barylab/cli/experiments.hpp"

#include <cmath>
#include <filesystem>

#include "barylab/cli/config.hpp"
#include "barylab/error.hpp"
#include "barylab/hash.hpp"
#include "barylab/io.hpp"
#include "barylab/lab.hpp"
#include "barylab/nets.hpp"
#include "barylab/rng.hpp"

namespace barylab::cli {

namespace {

std::vector<double> doubles(const json& j, const char* key) { return j.at(key).get<std::vector<double>>(); }

ScanReport net_scan(const DiscreteSpace& space, const json& cfg, std::uint64_t seed, const Executor* exec) {
  ScanReport rep;
  rep.experiment = "net";
  rep.space_label = space.label();
  rep.seed = seed;
  rep.columns = {"epsilon", "r", "delta", "m", "cardinality", "log_cardinality", "max_distance", "mean_distance"};
  std::vector<double> eps, lc;
  bool verified = true;
  for (double e : doubles(cfg, "epsilons")) {
    NetParams p;
    p.epsilon = e;
    p.probes = cfg.at("probes").get<std::size_t>();
    p.cap = cfg.at("cap").get<std::uint64_t>();
    p.seed = seed;
    NetResult r;
    try {
      r = wasserstein_net(space, p, exec);
    } catch (const CapExceeded& ex) {
      rep.partial = true;
      rep.notes.push_back(std::string("stopped at epsilon ") + format_double(e) + ": " + ex.what());
      break;
    }
    const double l = std::log(static_cast<double>(r.cardinality));
    rep.add_row("epsilon", {e, r.r, r.delta, static_cast<double>(r.m), static_cast<double>(r.cardinality), l,
                            r.max_probe_distance, r.mean_probe_distance});
    verified = verified && r.verified && r.max_probe_distance <= e;
    eps.push_back(e);
    lc.push_back(l);
  }
  rep.add_check("verified", verified && !eps.empty(), "every probe within epsilon of the net");
  if (!eps.empty()) {
    const double C = fit_entropy_constant(eps, lc, space.dim_n());
    bool ok = std::isfinite(C);
    for (std::size_t i = 0; i < eps.size(); ++i)
      ok = ok && lc[i] <= C * std::pow(eps[i], -space.dim_n()) * std::log(C / eps[i]) + 1e-12;
    rep.add_fit("C_entropy", C);
    rep.add_check("entropy_bound", ok, "log N <= C eps^-n log(C / eps) with C = " + format_double(C));
  }
  return rep;
}

}  // namespace

HeatSemigroup cached_heat(const DiscreteSpace& space, const HeatParams& params, RunContext& ctx) {
  if (ctx.cache_dir.empty()) return HeatSemigroup(space, params);
  Fnv1a h;
  h.value(space.fingerprint());
  h.value(static_cast<std::uint64_t>(params.knn));
  h.value(params.bandwidth_factor);
  h.value(params.bandwidth.value_or(-1.0));
  const auto path = (std::filesystem::path(ctx.cache_dir) / ("heat-" + hex64(h.digest()) + ".json")).string();
  if (std::filesystem::exists(path)) {
    try {
      auto heat = heat_semigroup_from_json(read_json_file(path), space);
      ctx.cache_hit = true;
      return heat;
    } catch (const InvalidArgument&) {
    }
  }
  HeatSemigroup heat(space, params);
  write_text_file(path, heat_semigroup_to_json(heat).dump());
  return heat;
}

ScanReport run_experiment(const json& cfg, RunContext& ctx) {
  const auto kind = cfg.at("experiment").get<std::string>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto space = space_from_spec(cfg.at("space"), ctx.base_dir);
  require_valid(space);
  const auto* exec = ctx.exec;
  auto measure = [&](const char* key, std::uint64_t salt) {
    return measure_from_spec(cfg.at(key), space, seed + salt, ctx.base_dir);
  };
  ScanReport rep;
  if (kind == "deficit_scan") {
    std::vector<FamilyScan> fams;
    for (const auto& f : cfg.at("families")) {
      FamilyScan fs;
      fs.spec.family = perturb_family_from_string(f.at("family").get<std::string>());
      if (f.contains("from")) fs.spec.from = f["from"].get<std::size_t>();
      if (f.contains("to")) fs.spec.to = f["to"].get<std::size_t>();
      fs.scales = doubles(f, "scales");
      fams.push_back(std::move(fs));
    }
    rep = deficit_scan(measure("rho", 0), measure("mu0", 1), good_params_from_json(cfg.at("good")), fams, seed, exec);
  } else if (kind == "g_probe") {
    auto rho = measure("rho", 0), mu0 = measure("mu0", 1), mu1 = measure("mu1", 2);
    W2Options opt;
    opt.gap_tol = cfg.at("tol").get<double>();
    auto p0 = solve_w2(mu0, rho, opt).potentials, p1 = solve_w2(mu1, rho, opt).potentials;
    rep = g_probe(rho, mu0, p0, mu1, p1, cfg.at("cells").get<std::size_t>(), exec);
  } else if (kind == "potential_stability" || kind == "map_stability") {
    auto pairs = random_measure_pairs(space, cfg.at("pairs").get<std::size_t>(), seed);
    auto rho = measure("rho", 0);
    rep = kind == "potential_stability" ? potential_stability_probe(rho, pairs, seed, exec)
                                        : map_stability_probe(rho, pairs, seed, exec);
  } else if (kind == "barycenter_stability") {
    auto P = law_from_spec(cfg.at("law"), space, seed, ctx.base_dir);
    std::vector<LawFamilyScan> fams;
    for (const auto& f : cfg.at("families"))
      fams.push_back({law_perturbation_from_string(f.at("kind").get<std::string>()), doubles(f, "scales")});
    std::optional<Measure> extra;
    if (cfg.contains("extra") && !cfg["extra"].is_null()) extra = measure("extra", 3);
    rep = barycenter_stability_scan(P, fams, extra ? &*extra : nullptr, cfg.at("sigma").get<double>(), seed, exec);
  } else if (kind == "empirical_rate") {
    auto P = law_from_spec(cfg.at("law"), space, seed, ctx.base_dir);
    RateOptions opt;
    opt.N_list = cfg.at("N_list").get<std::vector<std::size_t>>();
    opt.trials = cfg.at("trials").get<std::size_t>();
    opt.sigma = cfg.at("sigma").get<double>();
    opt.runtime_cap = cfg.at("runtime_cap").get<double>();
    rep = empirical_rate_experiment(P, opt, seed, exec);
  } else if (kind == "net") {
    rep = net_scan(space, cfg, seed, exec);
  } else if (kind == "heat_limit" || kind == "derivative_check" || kind == "kappa_scan") {
    auto heat = cached_heat(space, heat_params_from_spec(cfg.value("heat", json::object())), ctx);
    auto t_list = doubles(cfg, "t_list");
    if (kind == "heat_limit") {
      rep = heat_limit_probe(heat, cfg.at("instances").get<std::size_t>(), t_list, cfg.at("amplitude").get<double>(),
                             seed, exec);
    } else if (kind == "derivative_check") {
      rep = derivative_check(heat, cfg.at("instances").get<std::size_t>(), t_list, seed, exec);
    } else {
      Rng rng(seed);
      const double a = cfg.at("amplitude").get<double>();
      const auto n = static_cast<Eigen::Index>(space.size());
      Eigen::VectorXd p0(n), p1(n);
      for (auto& x : p0) x = rng.uniform(-a, a);
      for (auto& x : p1) x = rng.uniform(-a, a);
      rep = kappa_scan(heat, measure("rho", 0), p0, p1, cfg.at("s").get<double>(), t_list);
    }
  } else {
    throw InvalidArgument("unknown experiment \"" + kind + "\"");
  }
  rep.seed = seed;
  rep.attach_config(cfg);
  return rep;
}

}  // namespace barylab::cli
