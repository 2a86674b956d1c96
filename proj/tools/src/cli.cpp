#include "barylab/cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "barylab/cli/config.hpp"
#include "barylab/cli/experiments.hpp"
#include "barylab/cli/plot.hpp"
#include "barylab/error.hpp"
#include "barylab/hash.hpp"
#include "barylab/io.hpp"
#include "barylab/lab.hpp"
#include "barylab/nets.hpp"
#include "barylab/parallel.hpp"

namespace barylab::cli {

namespace {

struct Globals {
  std::uint64_t seed = 1;
  bool seed_set = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string out = ".";
  double tol = 1e-8;
  bool tol_set = false;
  double sigma = 0.5;
  bool sigma_set = false;
  std::string format = "json";
};

struct Failure {
  int code;
  std::string message;
  json extra;
};

std::string cache_dir() {
  const char* c = std::getenv("BARYLAB_CACHE");
  return c && *c ? std::string(c) : std::string();
}

std::string out_file(const Globals& g, const std::string& name) {
  return (std::filesystem::path(g.out) / name).string();
}

std::string csv_table(const RunStamp& st, const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream o;
  o << "config_hash,seed," << header << '\n';
  for (const auto& r : rows) {
    o << st.config_hash << ',' << st.seed;
    for (double v : r) o << ',' << format_double(v);
    o << '\n';
  }
  return o.str();
}

std::vector<std::vector<double>> weight_rows(const Eigen::VectorXd& w) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < w.size(); ++i) rows.push_back({static_cast<double>(i), w[i]});
  return rows;
}

// Writes the JSON artifact and, with --format csv, a CSV table next to it.
std::vector<std::string> emit(const Globals& g, const std::string& stem, const json& doc, const RunStamp& st,
                              const std::string& header = {}, const std::vector<std::vector<double>>& rows = {}) {
  std::vector<std::string> files{out_file(g, stem + ".json")};
  write_text_file(files[0], stamped(doc, st).dump(1) + "\n");
  if (g.format == "csv" && !header.empty()) {
    files.push_back(out_file(g, stem + ".csv"));
    write_text_file(files[1], csv_table(st, header, rows));
  }
  return files;
}

RunStamp stamp_for(const json& args, const Globals& g) {
  json keyed = args;
  keyed["seed"] = g.seed;
  return {config_hash(keyed), g.seed};
}

std::string dir_of(const std::string& path) {
  auto p = std::filesystem::path(path).parent_path();
  return p.empty() ? "." : p.string();
}

json check_map(const ScanReport& r) {
  json j = json::object();
  for (const auto& c : r.checks) j[c.name] = c.passed;
  return j;
}

json fit_map(const ScanReport& r) {
  json j = json::object();
  for (const auto& [k, v] : r.fits) j[k] = std::isfinite(v) ? json(v) : json(format_double(v));
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"barylab: discrete optimal transport lab for Wasserstein barycenter stability", "barylab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(
      "Exit codes: 0 ok, 2 bad input, 3 validation failure, 4 solver failure, 5 balance non-convergence,\n"
      "6 cap exhausted (partial output written with \"partial\": true).\n"
      "Every command prints one JSON line on stdout. BARYLAB_CACHE names a directory for cached heat\n"
      "factorizations and W2 results.\nExperiments for `run`: deficit_scan, g_probe, potential_stability, "
      "map_stability,\nbarycenter_stability, empirical_rate, net, heat_limit, derivative_check, kappa_scan.\n"
      "`run --reference FILE` writes every experiment's defaults.");

  Globals g;
  app.add_option("--seed", g.seed, "Master RNG seed (default 1)")
      ->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--jobs", g.jobs, "Worker threads (default: available parallelism)")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory (default .)");
  app.add_option("--tol", g.tol, "Solver tolerance (default 1e-8)")
      ->check(CLI::PositiveNumber)
      ->each([&](const std::string&) { g.tol_set = true; });
  app.add_option("--sigma", g.sigma, "Exponent slack sigma (default 0.5)")
      ->check(CLI::PositiveNumber)
      ->each([&](const std::string&) { g.sigma_set = true; });
  app.add_option("--format", g.format, "Tabular output format (default json)")->check(CLI::IsMember({"csv", "json"}));

  std::string command;
  std::function<json()> action;
  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->callback([&command, name] { command = name; });
    return s;
  };

  // space
  std::string kind, mesh, label, name = "space";
  std::size_t n = 0;
  double length = 1.0, circumference = 1.0, radius = 1.0, angle = 3.141592653589793;
  auto* sp = sub("space", "Build a model space and write its JSON file");
  sp->add_option("--kind", kind, "interval | circle | sphere | cone | mesh")->required();
  sp->add_option("--n", n, "Resolution (points)");
  sp->add_option("--length", length, "Interval length");
  sp->add_option("--circumference", circumference, "Circle circumference");
  sp->add_option("--radius", radius, "Sphere radius or cone slant radius");
  sp->add_option("--angle", angle, "Cone total angle in (0, 2 pi)");
  sp->add_option("--mesh", mesh, "Mesh file (vertex/edge list)");
  sp->add_option("--label", label, "Label override");
  sp->add_option("--name", name, "Output file stem");

  // measure
  std::string space_file, mkind = "uniform", mname = "measure";
  std::size_t index = 0;
  double center = 0.5, width = 0.1;
  std::vector<double> weights;
  auto* me = sub("measure", "Build a measure on a space file");
  me->add_option("--space", space_file, "Space JSON file")->required();
  me->add_option("--kind", mkind, "uniform | dirac | bump | good | weights");
  me->add_option("--index", index, "Dirac point or bump center index");
  me->add_option("--center", center, "Bump center coordinate");
  me->add_option("--width", width, "Bump width");
  me->add_option("--weights", weights, "Raw weights (normalized)")->delimiter(',');
  me->add_option("--name", mname, "Output file stem");

  // w2
  std::string mu_file, rho_file;
  auto* w2 = sub("w2", "Exact W2 between two measure files");
  w2->add_option("--space", space_file, "Space JSON file")->required();
  w2->add_option("--mu", mu_file, "Measure on the psi side")->required();
  w2->add_option("--rho", rho_file, "Measure on the phi side")->required();

  // barycenter / balance
  std::string law_file, bary_file;
  std::size_t max_iters = 500;
  auto* ba = sub("barycenter", "Barycenter of a law file");
  ba->add_option("--space", space_file, "Space JSON file")->required();
  ba->add_option("--law", law_file, "Law JSON file")->required();
  auto* bl = sub("balance", "Balanced potentials for a law and its barycenter");
  bl->add_option("--space", space_file, "Space JSON file")->required();
  bl->add_option("--law", law_file, "Law JSON file")->required();
  bl->add_option("--barycenter", bary_file, "Barycenter JSON file (solved when omitted)");
  bl->add_option("--max-iters", max_iters, "Iteration budget (default 500)");

  // run
  std::string config_file, reference_file;
  bool strict = false;
  auto* ru = sub("run", "Run an experiment config and write its report");
  ru->add_option("config", config_file, "Experiment config (JSON)");
  ru->add_option("--reference", reference_file, "Write the defaults reference page to FILE and exit");
  ru->add_flag("--strict", strict, "Exit 3 when any report check fails");

  // net
  double epsilon = 0.5;
  std::size_t probes = 500;
  std::uint64_t cap = 5'000'000;
  auto* ne = sub("net", "Wasserstein epsilon-net with Monte-Carlo verification");
  ne->add_option("--space", space_file, "Space JSON file")->required();
  ne->add_option("--epsilon", epsilon, "Net radius")->check(CLI::PositiveNumber);
  ne->add_option("--probes", probes, "Verification probes (default 500)");
  ne->add_option("--cap", cap, "Cardinality cap (default 5000000)");

  // validate
  std::vector<std::string> measure_files;
  auto* va = sub("validate", "Validate a space file and optional measure or law files");
  va->add_option("--space", space_file, "Space JSON file")->required();
  va->add_option("--measure", measure_files, "Measure JSON files");
  va->add_option("--law", law_file, "Law JSON file");

  std::vector<const char*> argv{"barylab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    out << json{{"command", "help"}, {"status", "ok"}}.dump() << '\n';
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    out << json{{"command", "help"}, {"status", "ok"}}.dump() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "barylab: " << e.what() << '\n';
    out << json{{"command", command.empty() ? "parse" : command}, {"status", "error"}, {"exit_code", int(kBadInput)},
                {"error", e.what()}}
               .dump()
        << '\n';
    return kBadInput;
  }

  Executor exec(g.jobs);
  const std::string cache = cache_dir();
  int code = kOk;
  json summary{{"command", command}};

  auto finish = [&](json body) {
    summary.update(body);
    if (!summary.contains("status")) summary["status"] = "ok";
  };

  try {
    if (command == "space") {
      ModelSpaceParams p;
      p.length = length;
      p.circumference = circumference;
      p.radius = radius;
      p.angle = angle;
      p.mesh_path = mesh;
      p.label = label;
      auto k = space_kind_from_string(kind);
      if (k != SpaceKind::mesh && n < 2) throw InvalidArgument("--n must be at least 2");
      auto space = build_model_space(k, n, p);
      auto report = validate_metric(space);
      json a{{"command", "space"}, {"kind", kind}, {"n", n}, {"length", length}, {"circumference", circumference},
             {"radius", radius}, {"angle", angle}, {"mesh", mesh}, {"label", label}};
      auto st = stamp_for(a, g);
      if (!report.ok()) {
        throw Failure{kValidationFailure, "metric validation failed: " + report.worst_kind,
                      {{"worst_violation", report.worst_violation}}};
      }
      std::vector<std::vector<double>> rows;
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(space.size()); ++i) {
        std::vector<double> r{static_cast<double>(i), space.ref_measure()[i]};
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(space.size()); ++j) r.push_back(space.dist()(i, j));
        rows.push_back(std::move(r));
      }
      auto files = emit(g, name, space_to_json(space), st, "point,ref_measure,dist...", rows);
      finish({{"files", files}, {"label", space.label()}, {"n", space.size()}, {"diameter", space.diameter()},
              {"valid", true}, {"config_hash", st.config_hash}, {"seed", st.seed}});
    } else if (command == "measure") {
      auto space = space_from_json(read_json_file(space_file));
      json spec{{"kind", mkind}};
      if (mkind == "dirac") spec["index"] = index;
      if (mkind == "bump") {
        if (me->count("--index")) spec["at"] = index;
        else spec["center"] = center;
        spec["width"] = width;
      }
      if (mkind == "weights") spec["weights"] = weights;
      json a{{"command", "measure"}, {"space", space.fingerprint()}, {"spec", spec}};
      auto st = stamp_for(a, g);
      auto mu = measure_from_spec(spec, space, g.seed);
      auto files = emit(g, mname, measure_to_json(mu), st, "point,weight", weight_rows(mu.weights()));
      finish({{"files", files}, {"support", mu.support().size()}, {"config_hash", st.config_hash}, {"seed", st.seed}});
    } else if (command == "w2") {
      auto space = space_from_json(read_json_file(space_file));
      auto mu = measure_from_json(read_json_file(mu_file), space);
      auto rho = measure_from_json(read_json_file(rho_file), space);
      Fnv1a h;
      h.value(space.fingerprint());
      for (auto v : mu.weights()) h.value(v);
      for (auto v : rho.weights()) h.value(v);
      h.value(g.tol);
      json a{{"command", "w2"}, {"key", hex64(h.digest())}};
      auto st = stamp_for(a, g);
      W2Result r;
      bool hit = false;
      std::string cpath;
      if (!cache.empty()) {
        cpath = (std::filesystem::path(cache) / ("w2-" + hex64(h.digest()) + ".json")).string();
        if (std::filesystem::exists(cpath)) {
          r = w2_from_json(read_json_file(cpath));
          hit = true;
        }
      }
      if (!hit) {
        W2Options opt;
        opt.gap_tol = g.tol;
        r = solve_w2(mu, rho, opt);
        if (!cpath.empty()) write_text_file(cpath, w2_to_json(r).dump());
      }
      std::vector<std::vector<double>> rows;
      for (const auto& e : r.plan.entries)
        rows.push_back({static_cast<double>(e.x), static_cast<double>(e.y), e.mass});
      auto files = emit(g, "w2", w2_to_json(r), st, "x,y,mass", rows);
      finish({{"files", files}, {"value", r.value}, {"w2", r.w2}, {"gap", r.gap}, {"cache", hit ? "hit" : "miss"},
              {"config_hash", st.config_hash}, {"seed", st.seed}});
    } else if (command == "barycenter") {
      auto space = space_from_json(read_json_file(space_file));
      auto P = law_from_spec(read_json_file(law_file), space, g.seed, dir_of(law_file));
      json a{{"command", "barycenter"}, {"law", law_to_json(P)}};
      auto st = stamp_for(a, g);
      auto r = solve_barycenter(P, {true}, &exec);
      double worst = 0.0;
      for (double gap : r.per_atom_gaps) worst = std::max(worst, gap);
      if (worst > g.tol) throw Failure{kSolverFailure, "per-atom duality gap " + format_double(worst) + " exceeds tol", {}};
      auto files = emit(g, "barycenter", barycenter_to_json(r), st, "point,weight", weight_rows(r.measure.weights()));
      finish({{"files", files}, {"variance", r.variance_value}, {"non_unique", r.non_unique}, {"max_gap", worst},
              {"config_hash", st.config_hash}, {"seed", st.seed}});
    } else if (command == "balance") {
      auto space = space_from_json(read_json_file(space_file));
      auto P = law_from_spec(read_json_file(law_file), space, g.seed, dir_of(law_file));
      Measure mu = bary_file.empty() ? solve_barycenter(P, {false}, &exec).measure
                                     : measure_from_json(read_json_file(bary_file), space);
      json a{{"command", "balance"}, {"law", law_to_json(P)}, {"barycenter", measure_to_json(mu)},
             {"tol", g.tol}, {"max_iters", max_iters}};
      auto st = stamp_for(a, g);
      BalanceOptions opt;
      opt.tol = g.tol;
      opt.max_iters = max_iters;
      BalanceResult r;
      try {
        r = balance_potentials(P, mu, opt, &exec);
      } catch (const BalanceError& e) {
        json partial{{"residual_trace", e.residual_trace}, {"partial", true}};
        auto files = emit(g, "balance", partial, st);
        throw Failure{kBalanceNonConvergence, e.what(), {{"files", files}, {"iterations", e.residual_trace.size()}}};
      }
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < r.potentials.size(); ++i)
        for (Eigen::Index x = 0; x < r.potentials[i].psi.size(); ++x)
          rows.push_back({static_cast<double>(i), static_cast<double>(x), r.potentials[i].phi[x], r.potentials[i].psi[x]});
      auto files = emit(g, "balance", balance_to_json(r), st, "atom,point,phi,psi", rows);
      double psi_max = 0.0;
      for (const auto& p : r.potentials) psi_max = std::max(psi_max, p.psi.cwiseAbs().maxCoeff());
      finish({{"files", files}, {"residual", r.residual}, {"iterations", r.iterations}, {"max_abs_psi", psi_max},
              {"config_hash", st.config_hash}, {"seed", st.seed}});
    } else if (command == "run") {
      if (!reference_file.empty()) {
        write_text_file(reference_file, defaults_reference());
        finish({{"files", {reference_file}}});
      } else {
        if (config_file.empty()) throw InvalidArgument("run needs a config file");
        json user = read_json_file(config_file);
        if (g.seed_set) user["seed"] = g.seed;
        if (g.sigma_set) user["sigma"] = g.sigma;
        if (g.tol_set) user["tol"] = g.tol;
        json cfg = effective_config(user);
        RunContext ctx;
        ctx.exec = &exec;
        ctx.base_dir = dir_of(config_file);
        ctx.cache_dir = cache;
        auto rep = run_experiment(cfg, ctx);
        RunStamp st{rep.config_hash, rep.seed};
        const std::string stem = cfg["experiment"].get<std::string>();
        std::vector<std::string> files{out_file(g, stem + ".csv"), out_file(g, stem + ".json")};
        write_text_file(files[0], rep.csv());
        write_text_file(files[1], rep.to_json(g.format == "json").dump(1) + "\n");
        try {
          auto fig = figure_for(rep);
          files.push_back(out_file(g, stem + "_plot.csv"));
          write_text_file(files.back(), plot_csv(fig, st));
          if (cfg.value("plot", json::object()).value("svg", true)) {
            files.push_back(out_file(g, stem + ".svg"));
            write_text_file(files.back(), plot_svg(fig, st));
          }
        } catch (const InvalidArgument& e) {
          err << "barylab: no plot: " << e.what() << '\n';
        }
        finish({{"experiment", stem}, {"files", files}, {"rows", rep.rows.size()}, {"partial", rep.partial},
                {"all_passed", rep.all_passed()}, {"checks", check_map(rep)}, {"fits", fit_map(rep)},
                {"cache", ctx.cache_hit ? "hit" : "miss"}, {"config_hash", st.config_hash}, {"seed", st.seed}});
        if (rep.partial) {
          summary["status"] = "partial";
          code = kPartial;
        } else if (strict && !rep.all_passed()) {
          summary["status"] = "checks_failed";
          code = kValidationFailure;
        }
      }
    } else if (command == "net") {
      auto space = space_from_json(read_json_file(space_file));
      json a{{"command", "net"}, {"space", space.fingerprint()}, {"epsilon", epsilon}, {"probes", probes}, {"cap", cap}};
      auto st = stamp_for(a, g);
      NetParams p;
      p.epsilon = epsilon;
      p.probes = probes;
      p.cap = cap;
      p.seed = g.seed;
      NetResult r;
      try {
        r = wasserstein_net(space, p, &exec);
      } catch (const CapExceeded& e) {
        auto files = emit(g, "net", json{{"epsilon", epsilon}, {"cap", cap}, {"partial", true}, {"error", e.what()}}, st);
        throw Failure{kPartial, e.what(), {{"files", files}, {"cap", cap}}};
      }
      std::vector<std::vector<double>> rows;
      for (std::size_t k = 0; k < r.net.size(); ++k)
        for (auto x : r.net[k].support()) rows.push_back({static_cast<double>(k), static_cast<double>(x), r.net[k][x]});
      auto files = emit(g, "net", net_to_json(r), st, "element,point,weight", rows);
      finish({{"files", files}, {"cardinality", r.cardinality}, {"max_probe_distance", r.max_probe_distance},
              {"verified", r.verified}, {"config_hash", st.config_hash}, {"seed", st.seed}});
      if (!r.verified) {
        summary["status"] = "verification_failed";
        code = kValidationFailure;
      }
    } else if (command == "validate") {
      auto space = space_from_json(read_json_file(space_file));
      auto rep = validate_metric(space);
      json details{{"metric_ok", rep.ok()}, {"worst_violation", rep.worst_violation}, {"worst_kind", rep.worst_kind}};
      bool ok = rep.ok();
      for (const auto& f : measure_files) {
        try {
          measure_from_json(read_json_file(f), space);
        } catch (const InvalidArgument& e) {
          ok = false;
          details["measure_errors"].push_back(f + ": " + e.what());
        }
      }
      if (!law_file.empty()) {
        try {
          law_from_spec(read_json_file(law_file), space, g.seed, dir_of(law_file));
        } catch (const InvalidArgument& e) {
          ok = false;
          details["law_error"] = e.what();
        }
      }
      details["valid"] = ok;
      finish(details);
      if (!ok) {
        summary["status"] = "invalid";
        code = kValidationFailure;
      }
    }
  } catch (const Failure& f) {
    code = f.code;
    summary.update(f.extra);
    summary["status"] = f.code == kPartial ? "partial" : "error";
    summary["error"] = f.message;
  } catch (const BalanceError& e) {
    code = kBalanceNonConvergence;
    summary["status"] = "error";
    summary["error"] = e.what();
  } catch (const ConvergenceError& e) {
    code = kBalanceNonConvergence;
    summary["status"] = "error";
    summary["error"] = e.what();
  } catch (const CapExceeded& e) {
    code = kPartial;
    summary["status"] = "partial";
    summary["error"] = e.what();
  } catch (const ValidationError& e) {
    code = kValidationFailure;
    summary["status"] = "error";
    summary["error"] = e.what();
  } catch (const SolverError& e) {
    code = kSolverFailure;
    summary["status"] = "error";
    summary["error"] = e.what();
  } catch (const InvalidArgument& e) {
    code = kBadInput;
    summary["status"] = "error";
    summary["error"] = e.what();
  } catch (const json::exception& e) {
    code = kBadInput;
    summary["status"] = "error";
    summary["error"] = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    code = kBadInput;
    summary["status"] = "error";
    summary["error"] = e.what();
  } catch (const std::exception& e) {
    code = kSolverFailure;
    summary["status"] = "error";
    summary["error"] = e.what();
  }
  if (code != kOk) {
    summary["exit_code"] = code;
    if (summary.contains("error")) err << "barylab " << command << ": " << summary["error"].get<std::string>() << '\n';
  }
  out << summary.dump() << '\n';
  return code;
}

}  // namespace barylab::cli
