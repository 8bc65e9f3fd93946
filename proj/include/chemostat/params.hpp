#pragma once

#include <stdexcept>
#include <string>

namespace chemostat {

// Physical and scaling parameters of the chemostat.
//
// Units: time in hours, substrate concentrations in g/l, volume in liters,
// individual mass in grams.  `scale` is the dimensionless population scale n;
// the volume of the scaled system is n*volume.
struct ChemostatParams {
    double dilution = 0.5;        // D [1/h]
    double substrate_in = 0.003;  // S_in [g/l]
    double stoichiometry = 0.23;  // k, yield of substrate consumed per unit biomass growth
    double cell_mass = 7e-13;     // m [g], reference individual mass
    double volume = 1e-6;         // V [l]
    double scale = 1.0;           // n

    void validate() const {
        if (!(dilution > 0.0)) throw std::invalid_argument("dilution must be positive");
        if (!(substrate_in >= 0.0)) throw std::invalid_argument("substrate_in must be nonnegative");
        if (!(stoichiometry > 0.0)) throw std::invalid_argument("stoichiometry must be positive");
        if (!(cell_mass > 0.0)) throw std::invalid_argument("cell_mass must be positive");
        if (!(volume > 0.0)) throw std::invalid_argument("volume must be positive");
        if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
    }

    // Substrate consumed per unit of biomass growth rate, at ODE scale: k*m/V.
    double consumption_coeff() const { return stoichiometry * cell_mass / volume; }
    // Same at the scaled (per-individual) level: k*m/(n*V).
    double consumption_coeff_scaled() const { return consumption_coeff() / scale; }

    // Admissible substrate range is [0, max(S0, substrate_in)] for any S0 in range.
    double substrate_cap(double s0) const { return s0 > substrate_in ? s0 : substrate_in; }
};

}  // namespace chemostat
