#include "barylab/lab.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "barylab/error.hpp"
#include "barylab/fit.hpp"
#include "barylab/parallel.hpp"
#include "barylab/rng.hpp"

namespace barylab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
void run_jobs(std::size_t n, const Executor* exec, F&& body) {
  if (exec)
    exec->parallel_for(n, body);
  else
    for (std::size_t i = 0; i < n; ++i) body(i);
}

std::string fmt(double v) { return format_double(v); }

void require_same_space(const Measure& a, const Measure& b, const char* what) {
  if (!a.space().same_as(b.space())) throw InvalidArgument(std::string(what) + ": measures live on different spaces");
}

}  // namespace

ScanReport deficit_scan(const Measure& rho, const Measure& mu0, const GoodMeasureParams& good,
                        const std::vector<FamilyScan>& families, std::uint64_t seed, const Executor* exec) {
  require_same_space(rho, mu0, "deficit_scan");
  const auto& space = rho.space();
  auto dc = check_density_bounds(rho, good, all_points(space));
  if (!dc.ok)
    throw InvalidArgument("deficit_scan: rho violates the density bounds (min " + fmt(dc.min_density) + ", max " +
                          fmt(dc.max_density) + ")");
  struct Job {
    std::size_t family;
    double scale;
  };
  std::vector<Job> jobs;
  for (std::size_t f = 0; f < families.size(); ++f) {
    const auto& sc = families[f].scales;
    for (std::size_t i = 0; i < sc.size(); ++i) {
      if (sc[i] < 0.0) throw InvalidArgument("deficit_scan: scales must be nonnegative");
      if (i > 0 && sc[i] > sc[i - 1]) throw InvalidArgument("deficit_scan: scales must be nonincreasing");
      jobs.push_back({f, sc[i]});
    }
  }
  if (jobs.empty()) throw InvalidArgument("deficit_scan: no scales given");

  const Eigen::VectorXd psi0 = solve_w2(mu0, rho).potentials.psi;
  std::vector<double> R(jobs.size()), D(jobs.size());
  run_jobs(jobs.size(), exec, [&](std::size_t j) {
    auto mu1 = perturb_measure(mu0, families[jobs[j].family].spec, jobs[j].scale);
    R[j] = w2_distance(mu0, mu1);
    D[j] = deficit(rho, mu0, mu1, psi0);
  });

  const double DW = space.wasserstein_diameter();
  double A1 = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (jobs[j].scale > 0.0 && R[j] == 0.0)
      throw InvalidArgument(std::string("deficit_scan: family ") + to_string(families[jobs[j].family].spec.family) +
                            " is degenerate at scale " + fmt(jobs[j].scale));
    R[j] = std::min(R[j], DW);
    if (R[j] > 0.0) {
      any = true;
      A1 = std::min(A1, D[j] * (1.0 + std::abs(std::log(R[j] / DW))) / std::pow(R[j], 12.0));
    }
  }
  if (!any) A1 = kNaN;

  ScanReport rep;
  rep.experiment = "deficit_scan";
  rep.space_label = space.label();
  rep.seed = seed;
  rep.columns = {"scale", "R", "D", "modulus"};
  const bool a1_ok = any && A1 > 0.0 && std::isfinite(A1);
  double minD = std::numeric_limits<double>::infinity();
  bool bounded = a1_ok;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    double m = a1_ok ? modulus(R[j], {A1, 1.0, 1.0, DW, 0.5}) : kNaN;
    if (a1_ok && D[j] < m * (1.0 - 1e-12)) bounded = false;
    minD = std::min(minD, D[j]);
    rep.add_row(to_string(families[jobs[j].family].spec.family), {jobs[j].scale, R[j], D[j], m});
  }
  rep.add_fit("A1", A1);
  rep.add_fit("D_W", DW);
  rep.add_fit("min_D", minD);
  try {
    auto f = fit_loglog(R, D);
    rep.add_fit("exponent", f.slope);
    rep.add_fit("exponent_residual", f.residual);
    rep.add_fit("exponent_rows", static_cast<double>(f.used));
  } catch (const InvalidArgument&) {
    rep.notes.push_back("too few rows above 1e-6 for the exponent fit");
  }
  rep.add_check("deficit_nonnegative", minD >= -1e-8, "min D = " + fmt(minD));
  rep.add_check("A1_positive", a1_ok, "A1 = " + fmt(A1));
  rep.add_check("modulus_bound", bounded, "D >= A1 R^12 / (1 + |log(R / D_W)|) on every row");
  return rep;
}

ScanReport g_probe(const Measure& rho, const Measure& mu0, const PotentialPair& pot0, const Measure& mu1,
                   const PotentialPair& pot1, std::size_t cells, const Executor* exec) {
  require_same_space(rho, mu0, "g_probe");
  require_same_space(rho, mu1, "g_probe");
  if (pot0.tag != Normalization::zero_mean_phi || pot1.tag != Normalization::zero_mean_phi)
    throw InvalidArgument("g_probe needs potentials normalized with zero_mean_phi");
  if (cells < 1) throw InvalidArgument("g_probe needs at least one cell");
  const auto& space = rho.space();
  const Eigen::VectorXd v = pot1.psi - pot0.psi;
  const auto n = static_cast<Eigen::Index>(space.size());

  auto centered = [&](double s, double* g) {
    auto im = interpolation_map(space, pot0.psi, pot1.psi, s);
    Eigen::VectorXd vt(n);
    for (Eigen::Index x = 0; x < n; ++x) vt[x] = v[static_cast<Eigen::Index>(im.T[static_cast<std::size_t>(x)])];
    const double m = rho.weights().dot(vt);
    vt.array() -= m;
    if (g) *g = rho.weights().dot(vt.cwiseAbs());
    return vt;
  };

  std::vector<double> gs(cells + 1);
  run_jobs(cells + 1, exec, [&](std::size_t k) {
    centered(static_cast<double>(k) / static_cast<double>(cells), &gs[k]);
  });
  double integral = 0.0;
  for (std::size_t k = 0; k < cells; ++k) integral += 0.5 * (gs[k] + gs[k + 1]);
  integral /= static_cast<double>(cells);

  const Eigen::VectorXd target = pot0.phi - pot1.phi;
  auto identity_error = [&](std::size_t N) {
    std::vector<Eigen::VectorXd> parts(N);
    run_jobs(N, exec, [&](std::size_t k) {
      parts[k] = centered((static_cast<double>(k) + 0.5) / static_cast<double>(N), nullptr);
    });
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (const auto& p : parts) acc += p;
    acc /= static_cast<double>(N);
    double err = 0.0;
    for (auto x : rho.support()) {
      auto X = static_cast<Eigen::Index>(x);
      err = std::max(err, std::abs(acc[X] - target[X]));
    }
    return err;
  };
  const double e1 = identity_error(cells), e2 = identity_error(2 * cells);
  const double w2 = w2_distance(mu0, mu1);
  const double w6 = std::pow(w2, 6.0);

  ScanReport rep;
  rep.experiment = "g_probe";
  rep.space_label = space.label();
  rep.columns = {"s", "g"};
  for (std::size_t k = 0; k <= cells; ++k) rep.add_row("node", {static_cast<double>(k) / static_cast<double>(cells), gs[k]});
  rep.add_fit("integral_g", integral);
  rep.add_fit("w2", w2);
  rep.add_fit("w2_pow6", w6);
  rep.add_fit("C2_hat", w6 > 0.0 ? integral / w6 : kNaN);
  rep.add_fit("identity_error", e1);
  rep.add_fit("identity_error_refined", e2);
  rep.add_fit("refinement_ratio", e1 > 0.0 ? e2 / e1 : 0.0);
  rep.add_check("identity_error", e1 <= 1e-3, "max |int (v o T_s - mean) ds - (phi0 - phi1)| = " + fmt(e1));
  rep.add_check("identity_refines", e1 <= 1e-12 || e2 <= 0.6 * e1,
                "error " + fmt(e1) + " -> " + fmt(e2) + " when the grid doubles");
  if (w2 > 0.0)
    rep.add_check("C2_positive", integral > 0.0, "C2_hat = " + fmt(integral / w6));
  else
    rep.add_check("g_vanishes", integral == 0.0, "integral of g = " + fmt(integral));
  return rep;
}

Eigen::VectorXd discrete_gradient(const DiscreteSpace& space, const Eigen::VectorXd& f) {
  const auto n = static_cast<Eigen::Index>(space.size());
  if (f.size() != n) throw InvalidArgument("discrete_gradient: length mismatch");
  Eigen::VectorXd g(n);
  if (space.kind() == SpaceKind::interval) {
    const auto& x = space.coords();
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index a = std::max<Eigen::Index>(0, i - 1), b = std::min(n - 1, i + 1);
      g[i] = (f[b] - f[a]) / (x(b, 0) - x(a, 0));
    }
  } else if (space.kind() == SpaceKind::circle) {
    const double h = space.period() / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) g[i] = (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * h);
  } else {
    throw InvalidArgument(std::string("no gradient stencil on ") + to_string(space.kind()) + " spaces");
  }
  return g;
}

PotentialRow potential_stability_row(const Measure& rho, const Eigen::VectorXd& phi0, const Eigen::VectorXd& phi1) {
  for (const auto* phi : {&phi0, &phi1}) {
    double m = rho.weights().dot(*phi);
    if (std::abs(m) > 1e-9 * std::max(1.0, phi->cwiseAbs().maxCoeff()))
      throw InvalidArgument("potential violates the zero_mean_phi normalization (rho-mean " + fmt(m) + ")");
  }
  const auto& space = rho.space();
  Eigen::VectorXd dg = discrete_gradient(space, phi1) - discrete_gradient(space, phi0);
  Eigen::VectorXd dp = phi1 - phi0;
  PotentialRow r;
  double q = 0.0;
  for (auto x : rho.support()) {
    auto X = static_cast<Eigen::Index>(x);
    r.L += rho[x] * dg[X] * dg[X];
    q += rho[x] * dp[X] * dp[X];
  }
  r.Rq = std::cbrt(q);
  return r;
}

MeasurePairs random_measure_pairs(const DiscreteSpace& space, std::size_t count, std::uint64_t seed) {
  MeasurePairs out;
  const auto n = static_cast<Eigen::Index>(space.size());
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::split(seed, i);
    Eigen::VectorXd a(n), b(n);
    for (Eigen::Index x = 0; x < n; ++x) a[x] = rng.uniform(0.2, 1.0);
    for (Eigen::Index x = 0; x < n; ++x) b[x] = rng.uniform(0.2, 1.0);
    out.emplace_back(make_measure(space, a), make_measure(space, b));
  }
  return out;
}

ScanReport potential_stability_probe(const Measure& rho, const MeasurePairs& pairs, std::uint64_t seed,
                                     const Executor* exec) {
  const auto& space = rho.space();
  discrete_gradient(space, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size())));
  std::vector<PotentialRow> rows(pairs.size());
  run_jobs(pairs.size(), exec, [&](std::size_t i) {
    require_same_space(rho, pairs[i].first, "potential_stability_probe");
    auto p0 = solve_w2(pairs[i].first, rho).potentials.phi;
    auto p1 = solve_w2(pairs[i].second, rho).potentials.phi;
    rows[i] = potential_stability_row(rho, p0, p1);
  });
  ScanReport rep;
  rep.experiment = "potential_stability_probe";
  rep.space_label = space.label();
  rep.seed = seed;
  rep.columns = {"pair", "L", "Rq", "C"};
  std::vector<double> cs;
  bool finite = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].L == 0.0 && rows[i].Rq == 0.0) continue;
    double c = rows[i].Rq > 0.0 ? rows[i].L / rows[i].Rq : std::numeric_limits<double>::infinity();
    finite = finite && std::isfinite(c);
    cs.push_back(c);
    rep.add_row("pair", {static_cast<double>(i), rows[i].L, rows[i].Rq, c});
  }
  if (!cs.empty()) {
    rep.add_fit("C_hat_max", *std::max_element(cs.begin(), cs.end()));
    rep.add_fit("C_hat_median", median(cs));
  }
  rep.add_check("C_finite", finite, std::to_string(cs.size()) + " rows");
  return rep;
}

ScanReport map_stability_probe(const Measure& rho, const MeasurePairs& pairs, std::uint64_t seed,
                               const Executor* exec) {
  const auto& space = rho.space();
  const auto n = static_cast<Eigen::Index>(space.size());
  discrete_gradient(space, Eigen::VectorXd::Zero(n));
  struct PairOut {
    std::vector<double> dT, dg;
    std::vector<std::size_t> x;
  };
  std::vector<PairOut> outs(pairs.size());
  run_jobs(pairs.size(), exec, [&](std::size_t i) {
    auto a = solve_w2(pairs[i].first, rho).potentials;
    auto b = solve_w2(pairs[i].second, rho).potentials;
    auto T0 = c_transform(space, a.psi).argmin;
    auto T1 = c_transform(space, b.psi).argmin;
    Eigen::VectorXd g = discrete_gradient(space, b.phi) - discrete_gradient(space, a.phi);
    for (auto x : rho.support()) {
      double dT = space.dist()(static_cast<Eigen::Index>(T1[x]), static_cast<Eigen::Index>(T0[x]));
      double dg = std::abs(g[static_cast<Eigen::Index>(x)]);
      if (dT == 0.0 && dg == 0.0) continue;
      outs[i].dT.push_back(dT);
      outs[i].dg.push_back(dg);
      outs[i].x.push_back(x);
    }
  });
  ScanReport rep;
  rep.experiment = "map_stability_probe";
  rep.space_label = space.label();
  rep.seed = seed;
  rep.columns = {"pair", "x", "dT", "dgrad"};
  double h = 0.0;
  for (Eigen::Index x = 0; x < n; ++x) {
    double nn = std::numeric_limits<double>::infinity();
    for (Eigen::Index y = 0; y < n; ++y)
      if (y != x) nn = std::min(nn, space.dist()(x, y));
    h = std::max(h, nn);
  }
  const double grid_tol = 2.0 * h;
  std::vector<double> all_dT, all_dg;
  double worst = 0.0;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    for (std::size_t k = 0; k < outs[i].dT.size(); ++k) {
      double dT = outs[i].dT[k], dg = outs[i].dg[k];
      rep.add_row("pair", {static_cast<double>(i), static_cast<double>(outs[i].x[k]), dT, dg});
      all_dT.push_back(dT);
      all_dg.push_back(dg);
      if (dg > h) worst = std::max(worst, dT / dg);
    }
  }
  double C = all_dg.empty() ? 0.0 : fit_through_origin(all_dg, all_dT);
  bool bounded = std::isfinite(C);
  for (std::size_t j = 0; j < all_dT.size(); ++j)
    if (all_dT[j] > C * all_dg[j] + grid_tol) bounded = false;
  rep.add_fit("C_exp_hat", C);
  rep.add_fit("C_exp_max_ratio", worst);
  rep.add_fit("grid_tol", grid_tol);
  rep.add_check("C_exp_finite", bounded,
                "d(T1 x, T0 x) <= " + fmt(C) + " |grad phi1 - grad phi0| + " + fmt(grid_tol) + " on every row");
  if (space.kind() == SpaceKind::interval)
    rep.add_check("flat_isometry", std::abs(C - 1.0) <= 0.05, "C_exp_hat = " + fmt(C) + ", expected 1 +- 0.05");
  return rep;
}

ScanReport barycenter_stability_scan(const SecondOrderLaw& P, const std::vector<LawFamilyScan>& families,
                                     const Measure* extra, double sigma, std::uint64_t seed,
                                     const Executor* exec) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  bool has_good = false;
  for (const auto& a : P.atoms())
    if (a.good && a.good->alpha > 0.0 && check_density_bounds(a.measure, *a.good, a.measure.support()).ok)
      has_good = true;
  if (!has_good) throw InvalidArgument("barycenter_stability_scan: no atom is flagged good with alpha > 0");

  struct Job {
    std::size_t family;
    double scale;
  };
  std::vector<Job> jobs;
  for (std::size_t f = 0; f < families.size(); ++f)
    for (double s : families[f].scales) jobs.push_back({f, s});
  if (jobs.empty()) throw InvalidArgument("barycenter_stability_scan: no scales given");

  auto base = solve_barycenter(P, {true}, exec);
  std::vector<double> x(jobs.size()), y(jobs.size());
  std::vector<char> flagged(jobs.size(), 0);
  run_jobs(jobs.size(), exec, [&](std::size_t j) {
    auto Q = perturb_law(P, families[jobs[j].family].kind, jobs[j].scale, extra);
    auto bq = solve_barycenter(Q, {false});
    x[j] = w1_between_laws(P, Q);
    y[j] = w2_distance(base.measure, bq.measure);
  });

  ScanReport rep;
  rep.experiment = "barycenter_stability_scan";
  rep.space_label = P.space().label();
  rep.seed = seed;
  rep.columns = {"scale", "W1", "W2"};
  const double p = 12.0 + sigma;
  double C = 0.0;
  bool finite = true;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    rep.add_row(to_string(families[jobs[j].family].kind), {jobs[j].scale, x[j], y[j]});
    if (x[j] > 0.0)
      C = std::max(C, std::pow(y[j], p) / x[j]);
    else if (y[j] > 0.0)
      finite = false;
  }
  bool bounded = finite;
  for (std::size_t j = 0; j < jobs.size(); ++j)
    if (std::pow(y[j], p) > C * x[j] * (1.0 + 1e-12)) bounded = false;
  const double bound = 1.0 / p;
  rep.add_fit("C_hat", finite ? C : std::numeric_limits<double>::infinity());
  rep.add_fit("alpha_bound", bound);
  double alpha = kNaN;
  try {
    auto f = fit_loglog(x, y);
    alpha = f.slope;
    rep.add_fit("alpha", f.slope);
    rep.add_fit("alpha_residual", f.residual);
    rep.add_fit("alpha_rows", static_cast<double>(f.used));
  } catch (const InvalidArgument&) {
    rep.notes.push_back("too few rows above 1e-6 for the slope fit");
  }
  if (base.non_unique) rep.notes.push_back("the barycenter of P is not unique; the solver's vertex was used");
  rep.add_check("slope_bound", alpha >= bound - 0.05, "alpha = " + fmt(alpha) + ", bound " + fmt(bound - 0.05));
  rep.add_check("C_finite", finite, "C_hat = " + fmt(C));
  rep.add_check("stability_estimate", bounded, "W2^(12+sigma) <= C_hat W1 on every row");
  return rep;
}

ScanReport empirical_rate_experiment(const SecondOrderLaw& P, const RateOptions& options, std::uint64_t seed,
                                     const Executor* exec) {
  const auto& N_list = options.N_list;
  if (N_list.empty() || options.trials < 1) throw InvalidArgument("empirical_rate_experiment needs N values and trials");
  for (std::size_t i = 1; i < N_list.size(); ++i)
    if (N_list[i] <= N_list[i - 1]) throw InvalidArgument("N_list must be increasing");
  const auto start = std::chrono::steady_clock::now();
  const auto K = P.size();
  std::vector<double> lam = P.weights();
  const Eigen::MatrixXd G = law_ground_distances(P, P);
  const auto muP = solve_barycenter(P, {false}, exec).measure;

  const std::size_t jobs = N_list.size() * options.trials;
  std::vector<double> w1(jobs, 0.0), w2(jobs, 0.0);
  std::vector<char> done(jobs, 0);
  run_jobs(jobs, exec, [&](std::size_t j) {
    if (options.runtime_cap > 0.0) {
      std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
      if (el.count() > options.runtime_cap) return;
    }
    const std::size_t N = N_list[j / options.trials];
    Rng rng = Rng::split(seed, j);
    auto counts = rng.multinomial(N, lam);
    std::vector<double> q(K);
    std::vector<Measure> atoms;
    std::vector<double> weights;
    for (std::size_t k = 0; k < K; ++k) {
      q[k] = static_cast<double>(counts[k]) / static_cast<double>(N);
      if (counts[k] > 0) {
        atoms.push_back(P[k].measure);
        weights.push_back(q[k]);
      }
    }
    w1[j] = discrete_w1(q, lam, G);
    auto muN = solve_barycenter(SecondOrderLaw(atoms, weights), {false}).measure;
    w2[j] = w2_distance(muN, muP);
    done[j] = 1;
  });

  ScanReport rep;
  rep.experiment = "empirical_rate_experiment";
  rep.space_label = P.space().label();
  rep.seed = seed;
  rep.columns = {"N", "trial", "W1", "W2"};
  std::vector<double> Ns, means, medians;
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    std::vector<double> a, b;
    for (std::size_t t = 0; t < options.trials; ++t) {
      std::size_t j = i * options.trials + t;
      if (!done[j]) {
        rep.partial = true;
        continue;
      }
      rep.add_row("sample", {static_cast<double>(N_list[i]), static_cast<double>(t), w1[j], w2[j]});
      a.push_back(w1[j]);
      b.push_back(w2[j]);
    }
    if (a.empty()) continue;
    const std::string tag = "@" + std::to_string(N_list[i]);
    rep.add_fit("mean_W1" + tag, mean(a));
    rep.add_fit("median_W2" + tag, median(b));
    Ns.push_back(static_cast<double>(N_list[i]));
    means.push_back(mean(a));
    medians.push_back(median(b));
  }
  if (rep.partial) rep.notes.push_back("runtime cap reached; unfinished trials were dropped");
  rep.add_fit("rate_target", -0.5);
  try {
    auto f = fit_loglog(Ns, means, 0.0);
    rep.add_fit("W1_rate", f.slope);
    rep.add_fit("W1_rate_residual", f.residual);
    rep.add_check("rate_exponent", std::abs(f.slope + 0.5) <= 0.15, "slope " + fmt(f.slope) + " vs -0.5 +- 0.15");
  } catch (const InvalidArgument&) {
    rep.notes.push_back("W1 errors vanish or too few N values; rate fit skipped");
  }
  if (!medians.empty())
    rep.add_check("consistency", medians.back() <= medians.front(),
                  "median W2 error " + fmt(medians.front()) + " at N=" + fmt(Ns.front()) + " -> " +
                      fmt(medians.back()) + " at N=" + fmt(Ns.back()));
  return rep;
}

SecondOrderLaw jittered_law(const SecondOrderLaw& base, std::size_t variants, double amplitude, std::uint64_t seed) {
  if (variants < 1) throw InvalidArgument("jittered_law needs at least one variant");
  std::vector<LawAtom> atoms;
  const auto n = static_cast<Eigen::Index>(base.space().size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t v = 0; v < variants; ++v) {
      Rng rng = Rng::split(seed, i * variants + v);
      Eigen::VectorXd w = base[i].measure.weights();
      for (Eigen::Index x = 0; x < n; ++x) w[x] *= std::exp(amplitude * rng.normal());
      atoms.push_back({make_measure(base.space(), w), base[i].weight / static_cast<double>(variants), base[i].good});
    }
  }
  return SecondOrderLaw(std::move(atoms));
}

ScanReport heat_limit_probe(const HeatSemigroup& heat, std::size_t instances, const std::vector<double>& t_list,
                            double amplitude, std::uint64_t seed, const Executor* exec) {
  if (t_list.size() < 2) throw InvalidArgument("heat_limit_probe needs at least two times");
  const auto& space = heat.space();
  const auto n = static_cast<Eigen::Index>(space.size());
  std::vector<HeatKernel> kernels;
  for (double t : t_list) kernels.push_back(heat.kernel(t / 2));
  const double scale = amplitude * space.diameter() * space.diameter();
  std::vector<std::vector<double>> err(instances, std::vector<double>(t_list.size()));
  run_jobs(instances, exec, [&](std::size_t i) {
    Rng rng = Rng::split(seed, i);
    Eigen::VectorXd psi(n);
    for (auto& p : psi) p = rng.uniform(-scale, scale);
    auto hard = c_transform(space, psi).phi;
    for (std::size_t k = 0; k < t_list.size(); ++k)
      err[i][k] = (soft_c_transform(kernels[k], psi, t_list[k]) - hard).cwiseAbs().maxCoeff();
  });
  ScanReport rep;
  rep.experiment = "heat_limit_probe";
  rep.space_label = space.label();
  rep.seed = seed;
  rep.columns = {"instance", "t", "error"};
  bool monotone = true;
  double worst = 0.0, total = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    for (std::size_t k = 0; k < t_list.size(); ++k) {
      rep.add_row("instance", {static_cast<double>(i), t_list[k], err[i][k]});
      if (k > 0 && err[i][k] > err[i][k - 1] + 1e-9) monotone = false;
    }
    double r = err[i].back() / err[i].front();
    worst = std::max(worst, r);
    total += r;
  }
  rep.add_fit("worst_ratio", worst);
  rep.add_fit("mean_ratio", instances ? total / static_cast<double>(instances) : kNaN);
  rep.add_fit("bandwidth", heat.bandwidth());
  rep.add_check("monotone", monotone, "sup-norm error nonincreasing along t with 1e-9 slack");
  rep.add_check("ratio", worst <= 0.1, "worst smallest-t / largest-t error ratio " + fmt(worst));
  return rep;
}

ScanReport derivative_check(const HeatSemigroup& heat, std::size_t instances, const std::vector<double>& t_list,
                            std::uint64_t seed, const Executor* exec) {
  const auto& space = heat.space();
  const auto n = static_cast<Eigen::Index>(space.size());
  std::vector<HeatKernel> kernels;
  for (double t : t_list) kernels.push_back(heat.kernel(t / 2));
  const std::size_t jobs = instances * t_list.size();
  std::vector<std::array<double, 7>> out(jobs);
  run_jobs(jobs, exec, [&](std::size_t j) {
    const std::size_t i = j / t_list.size(), k = j % t_list.size();
    Rng rng = Rng::split(seed, i);
    Eigen::VectorXd w(n), p0(n), p1(n);
    for (auto& x : w) x = rng.exponential();
    for (auto& x : p0) x = rng.uniform(-0.1, 0.1);
    for (auto& x : p1) x = rng.uniform(-0.1, 0.1);
    const double s = rng.uniform(0.2, 0.8);
    auto rho = make_measure(space, w);
    const double t = t_list[k];
    auto d = k_derivatives(rho, kernels[k], p0, p1, s, t);
    auto K = [&](double u) { return k_along(rho, kernels[k], p0, p1, u, t); };
    const double h1 = 1e-5, h2 = 1e-3;
    double fd1 = (K(s + h1) - K(s - h1)) / (2 * h1);
    double fd2 = (K(s + h2) - 2 * K(s) + K(s - h2)) / (h2 * h2);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    out[j] = {t, d.dK_ds, fd1, rel(fd1, d.dK_ds), d.d2K_ds2, fd2, rel(fd2, d.d2K_ds2)};
  });
  ScanReport rep;
  rep.experiment = "derivative_check";
  rep.space_label = space.label();
  rep.seed = seed;
  rep.columns = {"instance", "t", "dK", "fd1", "rel1", "d2K", "fd2", "rel2"};
  double worst1 = 0.0, worst2 = 0.0;
  for (std::size_t j = 0; j < jobs; ++j) {
    const auto& o = out[j];
    rep.add_row("instance", {static_cast<double>(j / t_list.size()), o[0], o[1], o[2], o[3], o[4], o[5], o[6]});
    worst1 = std::max(worst1, o[3]);
    worst2 = std::max(worst2, o[6]);
  }
  rep.add_fit("worst_rel1", worst1);
  rep.add_fit("worst_rel2", worst2);
  rep.add_check("first_derivative", worst1 <= 1e-5, "worst relative error " + fmt(worst1));
  rep.add_check("second_derivative", worst2 <= 1e-4, "worst relative error " + fmt(worst2));
  return rep;
}

ScanReport kappa_scan(const HeatSemigroup& heat, const Measure& rho, const Eigen::VectorXd& psi0,
                      const Eigen::VectorXd& psi1, double s, const std::vector<double>& t_list) {
  ScanReport rep;
  rep.experiment = "kappa_scan";
  rep.space_label = heat.space().label();
  rep.columns = {"t", "lhs", "rhs_core", "kappa_hat"};
  for (double t : t_list) {
    auto r = concentration_ratio(rho, heat.kernel(t / 2), psi0, psi1, s, t);
    rep.add_row("t", {t, r.lhs, r.rhs_core, r.kappa_hat.value_or(kNaN)});
  }
  rep.notes.push_back("kappa_hat is the per-instance ratio lhs / rhs_core, not a universal constant");
  return rep;
}

}  // namespace barylab
