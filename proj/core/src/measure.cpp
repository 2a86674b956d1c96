#include "barylab/measure.hpp"

#include <algorithm>
#include <cmath>

#include "barylab/error.hpp"
#include "barylab/rng.hpp"

namespace barylab {

Measure::Measure(DiscreteSpace space, Eigen::VectorXd weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (!space_.valid()) throw InvalidArgument("measure needs a space");
  if (weights_.size() != static_cast<Eigen::Index>(space_.size()))
    throw InvalidArgument("weight vector length " + std::to_string(weights_.size()) +
                          " does not match point count " + std::to_string(space_.size()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] < 0.0)
      throw InvalidArgument("measure weights must be finite and nonnegative");
    total += weights_[i];
    if (weights_[i] > 0.0) support_.push_back(static_cast<std::size_t>(i));
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument("measure weights sum to " + std::to_string(total) + ", not 1");
}

Eigen::VectorXd Measure::density() const {
  return weights_.cwiseQuotient(space_.ref_measure());
}

bool Measure::same_weights(const Measure& other) const {
  return space_.same_as(other.space_) && weights_ == other.weights_;
}

Measure make_measure(const DiscreteSpace& space, const Eigen::VectorXd& raw) {
  if (raw.size() != static_cast<Eigen::Index>(space.size()))
    throw InvalidArgument("weight vector length " + std::to_string(raw.size()) +
                          " does not match point count " + std::to_string(space.size()));
  double total = 0.0;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) throw InvalidArgument("weights must be finite");
    if (raw[i] < 0.0) throw InvalidArgument("negative weight at index " + std::to_string(i));
    total += raw[i];
  }
  if (!(total > 0.0)) throw InvalidArgument("weights are all zero");
  Eigen::VectorXd w = raw / total;
  // Push the residual roundoff onto the largest entry so the sum is exact to 1e-15.
  double drift = 1.0 - w.sum();
  Eigen::Index imax;
  w.maxCoeff(&imax);
  w[imax] += drift;
  return Measure(space, std::move(w));
}

Measure make_measure(const DiscreteSpace& space, std::span<const double> raw) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) v[static_cast<Eigen::Index>(i)] = raw[i];
  return make_measure(space, v);
}

Measure dirac(const DiscreteSpace& space, std::size_t index) {
  if (index >= space.size()) throw InvalidArgument("dirac index out of range");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  w[static_cast<Eigen::Index>(index)] = 1.0;
  return Measure(space, std::move(w));
}

Measure uniform_measure(const DiscreteSpace& space) { return make_measure(space, space.ref_measure()); }

std::vector<std::size_t> all_points(const DiscreteSpace& space) {
  std::vector<std::size_t> v(space.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

void GoodMeasureParams::validate() const {
  if (!(m_lower > 0.0) || !(M_upper > 0.0)) throw InvalidArgument("density bounds must be positive");
  if (m_lower > M_upper) throw InvalidArgument("m_lower exceeds M_upper");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  if (!(john_eta > 0.0) || !(perimeter_bound > 0.0))
    throw InvalidArgument("john_eta and perimeter_bound must be positive");
}

Measure sample_good_measure(const DiscreteSpace& space, const GoodMeasureParams& params,
                            const std::vector<std::size_t>& domain, std::uint64_t seed) {
  params.validate();
  if (domain.empty()) throw InvalidArgument("good measure domain is empty");
  for (auto i : domain)
    if (i >= space.size()) throw InvalidArgument("domain index out of range");
  Rng rng(seed);
  const auto& d = space.dist();
  const auto& ref = space.ref_measure();
  const double ell = std::max(space.diameter() / 4.0, 1e-12);
  constexpr int bumps = 4;
  std::size_t centers[bumps];
  double amp[bumps];
  for (int j = 0; j < bumps; ++j) {
    centers[j] = domain[rng.index(domain.size())];
    amp[j] = rng.uniform();
  }
  std::vector<double> g(domain.size(), 0.0);
  double gmin = INFINITY, gmax = -INFINITY, volume = 0.0;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    auto i = static_cast<Eigen::Index>(domain[k]);
    for (int j = 0; j < bumps; ++j) {
      double r = d(i, static_cast<Eigen::Index>(centers[j]));
      g[k] += amp[j] * std::exp(-r * r / (2.0 * ell * ell));
    }
    gmin = std::min(gmin, g[k]);
    gmax = std::max(gmax, g[k]);
    volume += ref[i];
  }
  const double ratio = params.M_upper / params.m_lower;
  std::vector<double> shape(domain.size());
  for (std::size_t k = 0; k < domain.size(); ++k) {
    double u = gmax > gmin ? (g[k] - gmin) / (gmax - gmin) : 0.0;
    shape[k] = std::pow(ratio, u);
  }
  // Rescale the bounds only when no density in [m, M] can carry unit mass on the domain.
  double lo = params.m_lower, hi = params.M_upper;
  if (!(lo * volume <= 1.0 && 1.0 <= hi * volume)) {
    double s = 1.0 / (volume * std::sqrt(lo * hi));
    lo *= s;
    hi *= s;
  }
  auto mass = [&](double c) {
    double total = 0.0;
    for (std::size_t k = 0; k < domain.size(); ++k)
      total += std::clamp(c * shape[k], lo, hi) * ref[static_cast<Eigen::Index>(domain[k])];
    return total;
  };
  double a = std::log(lo / ratio), b = std::log(hi);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (a + b);
    (mass(std::exp(mid)) < 1.0 ? a : b) = mid;
  }
  const double c = std::exp(0.5 * (a + b));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  for (std::size_t k = 0; k < domain.size(); ++k) {
    auto i = static_cast<Eigen::Index>(domain[k]);
    w[i] = std::clamp(c * shape[k], lo, hi) * ref[i];
  }
  return make_measure(space, w);
}

DensityCheck check_density_bounds(const Measure& measure, const GoodMeasureParams& params,
                                  const std::vector<std::size_t>& domain) {
  DensityCheck r;
  std::vector<char> in_domain(measure.size(), 0);
  for (auto i : domain)
    if (i < in_domain.size()) in_domain[i] = 1;
  r.support_in_domain = true;
  r.min_density = INFINITY;
  r.max_density = 0.0;
  const auto& ref = measure.space().ref_measure();
  for (auto i : measure.support()) {
    if (!in_domain[i]) r.support_in_domain = false;
    double dens = measure[i] / ref[static_cast<Eigen::Index>(i)];
    r.min_density = std::min(r.min_density, dens);
    r.max_density = std::max(r.max_density, dens);
  }
  r.ratio = r.max_density / r.min_density;
  constexpr double slack = 1e-9;
  r.ok = r.support_in_domain && r.min_density >= params.m_lower * (1.0 - slack) &&
         r.max_density <= params.M_upper * (1.0 + slack);
  return r;
}

SecondOrderLaw::SecondOrderLaw(std::vector<LawAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InvalidArgument("law has no atoms");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (!a.measure.space().valid()) throw InvalidArgument("law atom without a space");
    if (!a.measure.space().same_as(atoms_.front().measure.space()))
      throw InvalidArgument("law atoms live on different spaces");
    if (!std::isfinite(a.weight) || a.weight < 0.0)
      throw InvalidArgument("law weights must be finite and nonnegative");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidArgument("law weights sum to " + std::to_string(total) + ", not 1");
  for (auto& a : atoms_) a.weight /= total;
}

SecondOrderLaw::SecondOrderLaw(const std::vector<Measure>& measures, const std::vector<double>& weights)
    : SecondOrderLaw([&] {
        if (measures.size() != weights.size())
          throw InvalidArgument("law needs one weight per measure");
        std::vector<LawAtom> atoms;
        for (std::size_t i = 0; i < measures.size(); ++i) atoms.push_back({measures[i], weights[i], {}});
        return atoms;
      }()) {}

std::vector<double> SecondOrderLaw::weights() const {
  std::vector<double> w;
  for (const auto& a : atoms_) w.push_back(a.weight);
  return w;
}

SecondOrderLaw SecondOrderLaw::compacted() const {
  std::vector<LawAtom> out;
  for (const auto& a : atoms_) {
    if (a.weight <= 0.0) continue;
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const LawAtom& b) { return b.measure.same_weights(a.measure); });
    if (it != out.end())
      it->weight += a.weight;
    else
      out.push_back(a);
  }
  return SecondOrderLaw(std::move(out));
}

}  // namespace barylab
