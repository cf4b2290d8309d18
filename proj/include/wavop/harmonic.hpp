#pragma once

#include "wavop/cutoff.hpp"
#include "wavop/quadrature.hpp"
#include "wavop/radial.hpp"

#include <functional>
#include <string>
#include <vector>

namespace wavop {

// Samples on the uniform symmetric grid x_k = k dx, k = -half..half.
struct Profile1D {
    double dx = 0;
    int half = 0;
    Eigen::VectorXcd v; // index k + half

    int size() const { return 2 * half + 1; }
    double L() const { return half * dx; }
    double x(int i) const { return (i - half) * dx; }
    cplx at(int k) const { return v[k + half]; } // k in [-half, half]

    static Profile1D sample(double L, int half, const std::function<cplx(double)>& f);
    static Profile1D zero(double L, int half);

    // max |f(x) - f(-x)|
    double even_defect() const;
    void require_even(const char* where, double tol = 1e-10) const;
    // trapezoid sum dx * sum f
    cplx integral() const;
};

// Values of a function of rho >= 0 on a uniform grid, cubic interpolation between nodes.
struct RhoProfile {
    double drho = 0;
    Eigen::VectorXcd v; // v[i] at rho = i * drho

    double rho_max() const { return drho * double(v.size() - 1); }
    // zero beyond rho_max
    cplx operator()(double rho) const;
};

// Radial samples as a profile of the distance: 4-point Lagrange interpolation,
// even reflection at the origin, zero beyond rmax.
Profile radial_profile(const RadialFunction& f);

// M(r) = (conj(g) * u)(r e_1) for radial g, u (u(-x) = u(x) for radial u).
// Grid route: trapezoid in s with the interpolated u profile.
Profile1D spherical_average(const RadialFunction& g, const RadialFunction& u, double L, int half,
                            AngularOptions opt = {});

// Profile route: Gauss-Legendre panels of width 0.5 on [0, smax] in s, exact profiles.
Profile1D spherical_average(const Profile& g, const Profile& u, int m, double L, int half, double smax,
                            AngularOptions opt = {});

// Constant of the pairing identity for the normalized G0:
//   -Gamma(m/2-1) |S^{m-1}| / (4 pi^{m/2} Gamma(m-2)) = -1/((m-2)(m-3)!).
double pairing_constant(int m);
// The constant printed next to the identity, -2^{(m-4)/2}/(m-3)!.
double pairing_constant_quoted(int m);

// Rule for int_0^inf t^alpha e^{-t} h(t) dt when h has a branch point close to t = 0:
// t = s^2, geometric panels in s from 1e-4 up to 1, then width-0.5 panels up to s = 7.
// Weights include t^alpha e^{-t}.
Rule branch_rule(double alpha, int per_panel = 16);

// z^{nu} for half-integer nu >= 1/2 as z^{nu-1/2} sqrt(z).
cplx half_power(cplx z, double nu);

struct PairingOptions {
    int panel_nodes = 16;
    double gate = 1e-6; // relative change under Laguerre node doubling
};

// C int e^{-t} t^nu int_R e^{-i lambda r} (t + 2 i lambda r)^nu r M(r) dr dt,  nu = (m-3)/2.
// t by branch_rule; returns the doubled-node value, ConvergenceError if doubling moves it by
// more than the gate.
cplx pairing(const Profile1D& M, double lambda, int m, PairingOptions opt = {});

// Same with M built from psi, u by the grid route on [-2 rmax, 2 rmax].
cplx pairing(const RadialFunction& psi, const RadialFunction& u, double lambda, PairingOptions opt = {});

// <psi, (G0(lambda) - G0(-lambda)) u> from the reduced resolvent kernels.
cplx pairing_oracle(const RadialFunction& psi, const RadialFunction& u, double lambda);

// ---- K_jk, T_jk -------------------------------------------------------------------------

// Largest index (m-4)/2 of the binomial expansion.
int kjk_max_index(int m);

// Constant in front of W_jk when Z(f (x) g) = sum C_jk W_jk.
cplx c_jk(int m, int j, int k);

struct KjkOptions {
    int lambda_nodes = 128;  // per panel; panels [0, lambda0], [lambda0, 2 lambda0]
    int panel_nodes = 16;    // branch_rule nodes per panel for the t and s integrals
    bool check = false;      // repeat with doubled nodes and record the change
};

struct KjkResult {
    RhoProfile values;
    double doubling_change = 0; // relative max change, 0 when not checked
};

// K_jk u(rho) = rho^j int e^{i lambda rho} lambda^{j+k-1} phi_tilde
//   int int e^{-t-s} t^{m-7/2-k} s^{m-7/2-j} (s - 2 i lambda rho)^{1/2}
//   [int e^{-i lambda r} (t + 2 i lambda r)^{1/2} r^{k+1} M(r) dr] dt ds dlambda
// on rho = 0, drho, .., rho_max. j = k = 0 is assembled as K1 + K2 + K3.
KjkResult kjk(const Profile1D& M, int j, int k, int m, const CutoffPair& cut, double rho_max, double drho,
              KjkOptions opt = {});

// The three pieces of K_00: K1 differences in t, K2 differences in s, K3 the (st)^{1/2} term.
struct K00Split {
    RhoProfile k1, k2, k3;
};
K00Split k00_split(const Profile1D& M, int m, const CutoffPair& cut, double rho_max, double drho, KjkOptions opt = {});

// K3 alone by its lambda-quadrature.
RhoProfile k3_direct(const Profile1D& M, int m, const CutoffPair& cut, double rho_max, double drho, KjkOptions opt = {});

// T_jk(rho, r) with the rho^j r^{k+1} prefactor removed (finite at rho = 0 and r = 0).
cplx tjk_reduced(double rho, double r, int j, int k, int m, const CutoffPair& cut, KjkOptions opt = {});
cplx tjk(double rho, double r, int j, int k, int m, const CutoffPair& cut, KjkOptions opt = {});

// The piece left at lambda = 0 after integrating by parts j+k times, computed by the same
// lambda quadrature with S_j, S_k frozen at 0:
//   rho^j r^{k+1} Gamma(m-2-j) Gamma(m-2-k) int e^{i lambda (rho-r)} lambda^{j+k-1} phi_tilde dlambda.
cplx tjk_boundary_piece(double rho, double r, int j, int k, int m, const CutoffPair& cut, KjkOptions opt = {});

enum class TjkBound {
    Main, // |T| <r-rho>^{j+k} / (<rho>^{j+1/2} |r|^{k+1} <r>^{1/2})
    T01   // |T_01| <r-rho>^2 / (|r|^2 (<rho> + <r>))
};

struct TjkBoundReport {
    int j = 1, k = 1;
    double step = 1;
    double max_ratio = 0;
    double argmax_rho = 0, argmax_r = 0;
    bool finite = true;
};

// Lattice (rho, r) in [0, extent]^2 with the given step.
TjkBoundReport tjk_bound_check(int j, int k, int m, const CutoffPair& cut, double extent, double step,
                               TjkBound which = TjkBound::Main, KjkOptions opt = {});

// ---- transforms -------------------------------------------------------------------------

// p.v. (1/pi) int f(y)/(x-y) dy by the multiplier -i sign(xi). The mean is carried by a
// Gaussian whose transform is known in closed form (Dawson function), the rest goes through FFT.
Profile1D hilbert(const Profile1D& f);

// Uncentered maximal function sup over grid intervals [x_a, x_b] containing x of the mean of |f|
// (trapezoid means; single nodes count as |f| itself).
Profile1D hardy_max(const Profile1D& f);

struct Rational {
    long long num = 0;
    long long den = 1;
    static Rational parse(const std::string& s); // "3/2", "-1", "0"
    double value() const { return double(num) / double(den); }
};

// -1 < a < p - 1 by integer cross-multiplication. p <= 1 is a DomainError.
bool ap_admissible(Rational a, Rational p);

enum class OneDimOp { Hilbert, Max };

struct WeightReport {
    double a = 0;
    double p = 2;
    std::vector<double> thetas;
    std::vector<double> family_ratios;
    double max_ratio = 0;
    bool admissible = false; // from ap_admissible
};

struct WeightProbeOptions {
    double L = 256;
    int half = 4096;
    int min_exp = -6, max_exp = 6; // theta = 2^e
    bool tail_completion = true;   // add the |x| > L part of the 1/x tail of op f
};

// ||op f_theta|| / ||f_theta|| in L^p(|x|^a dx), f_theta(x) = exp(-theta^2 x^2).
WeightReport weighted_opnorm_probe(OneDimOp op, Rational a, Rational p, WeightProbeOptions opt = {});

struct K3Report {
    std::vector<double> rho;
    Eigen::VectorXcd direct;
    Eigen::VectorXcd hilbert_route;
    double residual = 0; // relative l2 difference
    double f_at_zero = 0; // F(0) = int_0^inf r M(r) dr
};

// F(v) = int_{|v|}^inf r M(r) dr (4th-order cumulative sum).
Profile1D k3_primitive(const Profile1D& M);

// K3(rho) = Gamma(m-2)^2 int_0^inf e^{i lambda rho} lambda^{-1} phi_tilde(lambda) int e^{-i lambda r} r M dr dlambda,
// directly and as -i pi Gamma(m-2)^2 [(1 + i H)(check phi_tilde * F)](rho), compared on
// 0 <= rho <= rho_max. The FFT route zero-pads F to at least [-pad, pad].
K3Report k3_identity(const Profile1D& M, int m, const CutoffPair& cut, double rho_max = 50, double pad = 400,
                     KjkOptions opt = {});

// ---- W_jk -------------------------------------------------------------------------------

// |f(r)| <r>^{m+eps} on r > rmax/2 must not exceed its maximum on r <= rmax/2.
bool decay_test(const RadialFunction& f, double eps = 0.5);

struct WjkOptions {
    double drho = 0.05;
    KjkOptions kjk{};
    AngularOptions angular{};
};

// W_jk u(x) = int f(y) K_jk u(|x-y|) |x-y|^{2-m} dy for radial f, with M = spherical average of (g, u).
RadialFunction wjk_apply(const RadialFunction& f, const Profile1D& M, int j, int k, const CutoffPair& cut,
                         WjkOptions opt = {});
RadialFunction wjk_apply(const RadialFunction& f, const RadialFunction& g, const RadialFunction& u, int j, int k,
                         const CutoffPair& cut, WjkOptions opt = {});

// sum_jk C_jk W_jk u.
RadialFunction wsm_assembly(const RadialFunction& f, const Profile1D& M, const CutoffPair& cut, WjkOptions opt = {});

// Z(f (x) g) u = int_0^inf G0(lambda) f <g, (G0(lambda) - G0(-lambda)) u> phi_tilde lambda^{-1} dlambda
// by Gauss-Legendre in lambda on the two cutoff panels.
RadialFunction z_direct(const RadialFunction& f, const RadialFunction& g, const RadialFunction& u,
                        const CutoffPair& cut, int lambda_nodes = 128);

struct NormScanRow {
    double p = 2;
    std::vector<double> thetas;
    std::vector<double> ratios;
    double variation = 0; // max ratio / ratio at theta = 1
};

struct NormScanOptions {
    int min_exp = -6, max_exp = 6;
    int j = -1, k = -1; // -1: the assembled sum over all (j,k)
    WjkOptions wjk{};
};

// ||W u_theta||_p / ||u_theta||_p, u_theta(x) = exp(-theta^2 |x|^2), with M from exact Gaussian profiles.
std::vector<NormScanRow> wjk_norm_scan(const RadialFunction& f, const RadialFunction& g, const std::vector<double>& ps,
                                       const CutoffPair& cut, NormScanOptions opt = {});

} // namespace wavop
