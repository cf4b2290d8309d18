#pragma once

#include <complex>

namespace wavop {

using cplx = std::complex<double>;

// |S^{m-1}| = 2 pi^{m/2} / Gamma(m/2)
double sphere_area(int m);

// Scaled Bessel functions for integer order nu:
//   uJ = J_nu(z)/z^nu,  uY = Y_nu(z)/z^nu,  uH = H^(1)_nu(z)/z^nu.
// Power series below z = 2, libstdc++ special functions above.
double bessel_uj(int nu, double z);
double bessel_uy(int nu, double z);
cplx bessel_uh(int nu, double z);

// Digamma at positive integers, psi(n) = -gamma + sum_{k<n} 1/k.
double digamma_int(int n);

double binomial(int n, int k);

} // namespace wavop
