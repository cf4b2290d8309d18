#pragma once

#include "wavop/radial.hpp"
#include "wavop/spectral.hpp"
#include "wavop/waveop.hpp"

#include <vector>

namespace wavop {

RadialFunction evolve(const PropagatorOracle& P, const RadialFunction& u0, double t);

// -m (1/2 - 1/p); p = infinity allowed.
double theoretical_slope(double p, int m);

struct DecayOptions {
    bool project = true;        // apply P_c before evolving
    bool band_limit = true;     // spectral filter exp(-(E/Ec)^4)
    double reflection_limit = 0.01;
    HamiltonianOptions hamiltonian{};
};

struct DecayMeasurement {
    double p = 2;
    double q = 2;
    std::vector<double> times;
    std::vector<double> norms;
    std::vector<double> boundary_mass;
    double fitted_slope = 0;
    double theoretical_slope = 0;
    double band_energy = 0;      // Ec, infinite when no filter
    bool truncated = false;      // later times dropped after a reflection warning
    std::vector<double> dropped; // the dropped times
};

// Ec = min(1/h^2, (0.5 rmax / tmax)^2): modes faster than the box allows for tmax are filtered.
double band_limit_energy(const RadialGrid& g, double tmax);

DecayMeasurement decay_scan(GridPtr g, const PotentialSpec& V, const RadialFunction& u0, double p,
                            const std::vector<double>& times, DecayOptions opt = {});

// Same with a prebuilt oracle for V (reused across p values).
DecayMeasurement decay_scan(const PropagatorOracle& P, const RadialFunction& u0, double p,
                            const std::vector<double>& times, DecayOptions opt = {});

} // namespace wavop
