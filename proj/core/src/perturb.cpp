#include "barylab/perturb.hpp"

#include <cmath>
#include <numbers>

#include "barylab/error.hpp"

namespace barylab {

const char* to_string(PerturbFamily f) {
  switch (f) {
    case PerturbFamily::mass_shift: return "mass_shift";
    case PerturbFamily::translate: return "translate";
    case PerturbFamily::tilt: return "tilt";
  }
  return "?";
}

PerturbFamily perturb_family_from_string(const std::string& s) {
  if (s == "mass_shift") return PerturbFamily::mass_shift;
  if (s == "translate") return PerturbFamily::translate;
  if (s == "tilt") return PerturbFamily::tilt;
  throw InvalidArgument("unknown perturbation family '" + s + "'");
}

const char* to_string(LawPerturbation p) {
  switch (p) {
    case LawPerturbation::atom_jitter: return "atom_jitter";
    case LawPerturbation::weight_jitter: return "weight_jitter";
    case LawPerturbation::atom_addition: return "atom_addition";
  }
  return "?";
}

LawPerturbation law_perturbation_from_string(const std::string& s) {
  if (s == "atom_jitter") return LawPerturbation::atom_jitter;
  if (s == "weight_jitter") return LawPerturbation::weight_jitter;
  if (s == "atom_addition") return LawPerturbation::atom_addition;
  throw InvalidArgument("unknown law perturbation '" + s + "'");
}

Eigen::VectorXd tilt_profile(const DiscreteSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.size());
  Eigen::VectorXd g(n);
  const bool line = (space.kind() == SpaceKind::interval || space.kind() == SpaceKind::circle) &&
                    space.coords().cols() >= 1 && space.period() > 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (line)
      g[i] = std::cos(2.0 * std::numbers::pi * space.coords()(i, 0) / space.period());
    else
      g[i] = 2.0 * space.dist()(0, i) / space.diameter() - 1.0;
  }
  return g;
}

namespace {

Measure mass_shift(const Measure& mu0, const PerturbSpec& spec, double scale) {
  if (scale < 0.0 || scale > 1.0) throw InvalidArgument("mass_shift fraction must lie in [0, 1]");
  const auto& s = mu0.space();
  Eigen::Index a = 0;
  if (spec.from) {
    a = static_cast<Eigen::Index>(*spec.from);
  } else {
    mu0.weights().maxCoeff(&a);
  }
  Eigen::Index b = 0;
  if (spec.to) {
    b = static_cast<Eigen::Index>(*spec.to);
  } else {
    s.dist().row(a).maxCoeff(&b);
  }
  if (a >= static_cast<Eigen::Index>(s.size()) || b >= static_cast<Eigen::Index>(s.size()))
    throw InvalidArgument("mass_shift site out of range");
  if (a == b) throw InvalidArgument("mass_shift needs two distinct sites");
  if (scale == 0.0) return mu0;
  Eigen::VectorXd w = mu0.weights();
  const double moved = scale * w[a];
  w[a] -= moved;
  w[b] += moved;
  return make_measure(s, w);
}

Measure translate(const Measure& mu0, double cells) {
  const auto& s = mu0.space();
  const bool circle = s.kind() == SpaceKind::circle;
  if (!circle && s.kind() != SpaceKind::interval)
    throw InvalidArgument("translate is defined on interval and circle spaces only");
  if (cells == 0.0) return mu0;
  const auto n = static_cast<long>(s.size());
  const double fl = std::floor(cells);
  const double frac = cells - fl;
  const auto whole = static_cast<long>(fl);
  auto target = [&](long i) {
    if (circle) return ((i % n) + n) % n;
    return std::clamp(i, 0L, n - 1);
  };
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (long i = 0; i < n; ++i) {
    const double m = mu0.weights()[i];
    if (m == 0.0) continue;
    w[target(i + whole)] += (1.0 - frac) * m;
    if (frac > 0.0) w[target(i + whole + 1)] += frac * m;
  }
  return make_measure(s, w);
}

Measure tilt(const Measure& mu0, double amplitude) {
  if (amplitude == 0.0) return mu0;
  Eigen::VectorXd g = tilt_profile(mu0.space());
  Eigen::VectorXd w = mu0.weights().array() * (amplitude * g.array()).exp();
  return make_measure(mu0.space(), w);
}

}  // namespace

Measure perturb_measure(const Measure& mu0, const PerturbSpec& spec, double scale) {
  switch (spec.family) {
    case PerturbFamily::mass_shift: return mass_shift(mu0, spec, scale);
    case PerturbFamily::translate: return translate(mu0, scale);
    case PerturbFamily::tilt: return tilt(mu0, scale);
  }
  throw InvalidArgument("unknown perturbation family");
}

SecondOrderLaw perturb_law(const SecondOrderLaw& P, LawPerturbation kind, double scale,
                           const Measure* extra) {
  std::vector<LawAtom> atoms = P.atoms();
  switch (kind) {
    case LawPerturbation::atom_jitter: {
      if (scale == 0.0) return P;
      auto& a = atoms[atoms.size() > 1 ? 1 : 0];
      a.measure = perturb_measure(a.measure, {PerturbFamily::tilt, {}, {}}, scale);
      break;
    }
    case LawPerturbation::weight_jitter: {
      if (atoms.size() < 2) throw InvalidArgument("weight_jitter needs at least two atoms");
      if (scale < 0.0 || scale > atoms[1].weight)
        throw InvalidArgument("weight_jitter scale exceeds the weight of atom 1");
      if (scale == 0.0) return P;
      atoms[0].weight += scale;
      atoms[1].weight -= scale;
      break;
    }
    case LawPerturbation::atom_addition: {
      if (!extra) throw InvalidArgument("atom_addition needs an extra measure");
      if (scale < 0.0 || scale > 1.0) throw InvalidArgument("atom_addition weight must lie in [0, 1]");
      if (scale == 0.0) return P;
      for (auto& a : atoms) a.weight *= 1.0 - scale;
      atoms.push_back({*extra, scale, std::nullopt});
      break;
    }
  }
  return SecondOrderLaw(std::move(atoms));
}

}  // namespace barylab
