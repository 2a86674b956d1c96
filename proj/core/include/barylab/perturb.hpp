#pragma once

#include <optional>
#include <string>

#include "barylab/measure.hpp"

namespace barylab {

enum class PerturbFamily { mass_shift, translate, tilt };

const char* to_string(PerturbFamily f);
PerturbFamily perturb_family_from_string(const std::string& s);

struct PerturbSpec {
  PerturbFamily family = PerturbFamily::mass_shift;
  // mass_shift endpoints; default to the heaviest site and the site farthest from it.
  std::optional<std::size_t> from;
  std::optional<std::size_t> to;
};

// scale is the moved fraction for mass_shift (in [0, 1]), the shift in grid
// cells for translate (interval and circle only) and the amplitude of the
// multiplier exp(scale * g) for tilt.
Measure perturb_measure(const Measure& mu0, const PerturbSpec& spec, double scale);

// Bounded profile in [-1, 1] used by tilt.
Eigen::VectorXd tilt_profile(const DiscreteSpace& space);

enum class LawPerturbation { atom_jitter, weight_jitter, atom_addition };

const char* to_string(LawPerturbation p);
LawPerturbation law_perturbation_from_string(const std::string& s);

// atom_jitter tilts one atom, weight_jitter moves weight `scale` from atom 1
// to atom 0, atom_addition mixes in `extra` with weight `scale`.
SecondOrderLaw perturb_law(const SecondOrderLaw& P, LawPerturbation kind, double scale,
                           const Measure* extra = nullptr);

}  // namespace barylab
