#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "barylab/space.hpp"

namespace barylab {

// Probability vector over the points of a DiscreteSpace.
class Measure {
 public:
  Measure() = default;
  Measure(DiscreteSpace space, Eigen::VectorXd weights);

  const DiscreteSpace& space() const { return space_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  const std::vector<std::size_t>& support() const { return support_; }

  // Weight divided by the reference measure of each point.
  Eigen::VectorXd density() const;

  bool same_weights(const Measure& other) const;

 private:
  DiscreteSpace space_;
  Eigen::VectorXd weights_;
  std::vector<std::size_t> support_;
};

Measure make_measure(const DiscreteSpace& space, const Eigen::VectorXd& raw_weights);
Measure make_measure(const DiscreteSpace& space, std::span<const double> raw_weights);
Measure dirac(const DiscreteSpace& space, std::size_t index);
// Normalized reference measure.
Measure uniform_measure(const DiscreteSpace& space);

struct GoodMeasureParams {
  double m_lower = 0.5;
  double M_upper = 2.0;
  double john_eta = 1.0;
  double perimeter_bound = 1.0;
  double alpha = 1.0;

  void validate() const;
};

Measure sample_good_measure(const DiscreteSpace& space, const GoodMeasureParams& params,
                            const std::vector<std::size_t>& domain, std::uint64_t seed);

struct DensityCheck {
  bool ok = false;
  bool support_in_domain = false;
  double min_density = 0.0;
  double max_density = 0.0;
  // max / min density over the support.
  double ratio = 0.0;
};

DensityCheck check_density_bounds(const Measure& measure, const GoodMeasureParams& params,
                                  const std::vector<std::size_t>& domain);

std::vector<std::size_t> all_points(const DiscreteSpace& space);

struct LawAtom {
  Measure measure;
  double weight = 0.0;
  std::optional<GoodMeasureParams> good;
};

// Finitely supported law on measures over one space.
class SecondOrderLaw {
 public:
  SecondOrderLaw() = default;
  explicit SecondOrderLaw(std::vector<LawAtom> atoms);
  SecondOrderLaw(const std::vector<Measure>& measures, const std::vector<double>& weights);

  std::size_t size() const { return atoms_.size(); }
  const LawAtom& operator[](std::size_t i) const { return atoms_[i]; }
  const std::vector<LawAtom>& atoms() const { return atoms_; }
  const DiscreteSpace& space() const { return atoms_.front().measure.space(); }
  std::vector<double> weights() const;

  // Drops zero-weight atoms and merges atoms with identical measures.
  SecondOrderLaw compacted() const;

 private:
  std::vector<LawAtom> atoms_;
};

}  // namespace barylab
