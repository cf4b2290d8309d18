#pragma once

#include "wavop/radial.hpp"

#include <vector>

namespace wavop {

inline constexpr int kLaguerreNodes = 128;

// Kernel of G0(lambda) = (-Delta - lambda^2 - i0)^{-1} at distance rho.
// t-integral by generalized Gauss-Laguerre; constant fixed by the static limit.
cplx g0_point(double lambda, double rho, int m, int nodes = kLaguerreNodes);

// Gamma(m/2-1) / (4 pi^{m/2}) rho^{2-m}
double g0_static(double rho, int m);

// Our normalization divided by ie^{-i(2nu+1)pi/4} / (2 (2pi)^{nu+1} Gamma(nu+1/2)), nu=(m-3)/2.
cplx g0_constant_ratio(int m);

// H_beta(s) = int_0^inf e^{-t} t^{(m-3)/2} (s + it/2)^{(m-3)/2 - beta} dt
cplx h_beta(double s, int beta, int m, int nodes = kLaguerreNodes);

// Kernel of A(lambda) at distance rho: (2pi)^{-m} int_S e^{i lambda omega.z} d omega.
double a_point(double lambda, double rho, int m);

// A(0) kernel value (2pi)^{-m} |S^{m-1}|, and the constant quoted with P0 expansions,
// (2pi)^{-m/2} / m!!, for comparison.
double a_zero_value(int m);
double a_zero_quoted(int m);

// Angular reductions. For l = 0 these are separable:
//   G0: (i pi/2) lambda^{m-2} uJ(lambda r<) uH(lambda r>),  A: uJ(lambda r) uJ(lambda s).
ReducedKernel g0_reduced(double lambda, GridPtr g);
ReducedKernel a_reduced(double lambda, GridPtr g);

// Separable factors of g0_reduced for lambda != 0, kernel = c uJ(lambda r<) uH(lambda r>).
// apply() is O(n) through running sums; conjugate() handles negative lambda.
struct G0Factors {
    Eigen::VectorXd uj;
    Eigen::VectorXcd uh;
    cplx c;
    bool conjugate = false;

    cplx kernel(int i, int j) const;
    // sum_j kernel(i,j) mu_j f_j
    Eigen::VectorXcd apply(const RadialGrid& g, const Eigen::VectorXcd& f) const;
};
G0Factors g0_factors(double lambda, const RadialGrid& g);

// c_{m,k} |x-y|^{2k-m} reduced by angular quadrature; requires 2k < m.
double inverse_laplacian_constant(int m, int k);
ReducedKernel inverse_laplacian_power(int k, GridPtr g, AngularOptions opt = {});

double sigma0(double k, double l, int m);

// J_k(lambda) = lambda^{-k} (G0(lambda) - sum_{j<k} G0^{(j)}(0) lambda^j / j!).
// Taylor coefficients by central differences with one Richardson level.
struct TaylorCoefficients {
    std::vector<Eigen::MatrixXcd> c; // c[j] = G0^{(j)}(0) / j!
    double step = 1e-3;
};
TaylorCoefficients g0_taylor(int order, GridPtr g, double step = 1e-3);
ReducedKernel jk_remainder(double lambda, int k, GridPtr g, double step = 1e-3);
ReducedKernel jk_remainder(double lambda, int k, GridPtr g, const TaylorCoefficients& tc);

struct ExpansionOptions {
    bool include_a_term = true;
    double gamma = -1; // < 0 means (m+1)/2
    AngularOptions angular{128, 0.1};
};

struct ExpansionReport {
    std::vector<double> lambdas;
    std::vector<double> remainder_norms;
    double fitted_exponent = 0;
    double gamma = 0;
    // max over lambdas of ||F(lambda) - F(-lambda)|| / ||F(lambda)||
    double evenness_defect = 0;
};

ExpansionReport expansion_check(GridPtr g, const std::vector<double>& lambdas, ExpansionOptions opt = {});

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace wavop
