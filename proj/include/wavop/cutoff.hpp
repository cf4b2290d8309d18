#pragma once

namespace wavop {

// C^5 smoothstep of degree 11 on [0,1], clamped outside.
double smoothstep5(double x);

// Energy cutoffs Phi(E), Psi(E) with Phi^2 + Psi^2 = 1, Phi = 1 for E <= ramp*lambda0^2 and
// Phi = 0 for E >= lambda0^2. phi_tilde acts on the momentum lambda: 1 for |lambda| <= lambda0,
// 0 for |lambda| >= 2 lambda0, so phi_tilde(lambda) phi(lambda^2) = phi(lambda^2).
struct CutoffPair {
    double lambda0 = 0.3;
    double ramp = 0.25; // Phi starts to drop at ramp * lambda0^2

    double phi(double E) const;
    double psi(double E) const;
    double phi_tilde(double lambda) const;

    void validate() const;
};

} // namespace wavop
