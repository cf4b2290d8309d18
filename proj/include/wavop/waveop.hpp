#pragma once

#include "wavop/cutoff.hpp"
#include "wavop/quadrature.hpp"
#include "wavop/radial.hpp"
#include "wavop/spectral.hpp"

#include <functional>
#include <vector>

namespace wavop {

// f(H) acting on sample vectors: diag(1/s) U f(E) U^T diag(s).
Eigen::MatrixXcd spectral_function(const EigenData& E, const std::function<cplx(double)>& f);

// Exact propagators of the discrete H and H0 through their eigen-decompositions.
struct PropagatorOracle {
    GridPtr grid;
    EigenData h;
    EigenData h0;

    static PropagatorOracle build(GridPtr g, const PotentialSpec& V, HamiltonianOptions opt = {});

    // e^{-itH} u, or e^{-itH0} u when free is set
    Eigen::VectorXcd evolve(const Eigen::VectorXcd& u, double t, bool free = false) const;
    // e^{itH} e^{-itH0} u
    Eigen::VectorXcd wave(const Eigen::VectorXcd& u, double t) const;
};

enum class Lowpass { Free, Full };

// Phi(H0) or Phi(H) by functional calculus. Full needs the eigen-data of H.
ReducedKernel lowpass_kernel(const CutoffPair& cut, Lowpass which, GridPtr g, const EigenData* spectral = nullptr);

// Slope of log |kappa(r_1, s)| against log <s> over s in [dmin, dmax]. The modulus is replaced by
// its running maximum over s +- 2 so oscillation zeros do not enter the fit.
double kernel_decay_slope(const ReducedKernel& K, double dmin = 5.0, double dmax = 30.0);

// Panels on [0, lambda_min], log-spaced panels up to lambda0, then linear panels of the given
// width up to lambda_max; `nodes` Gauss-Legendre points per panel.
struct LambdaQuadrature {
    double lambda_min = 3e-5;
    double lambda0 = 0.3;
    double lambda_max = 8.0;
    int log_panels = 16;
    double panel_width = 0.5;
    int nodes = 16;

    Rule rule() const;
    LambdaQuadrature doubled() const;
    void validate() const;
};

struct QuadratureRecord {
    int nodes = 0;
    double doubling_change = 0; // relative Frobenius change under node doubling
    bool converged = true;      // doubling change below the strict gate
    int excluded_nodes = 0;     // singular M(lambda) nodes dropped (exceptional case)
    double largest_excluded = 0;
};

// Doubling gates: below kStrictGate is converged, above kFailGate raises ConvergenceError.
inline constexpr double kStrictGate = 1e-5;
inline constexpr double kFailGate = 1e-3;

struct BornTermMatrix {
    int order = 1;
    Eigen::MatrixXcd matrix; // acts on sample vectors
    QuadratureRecord quad;
};

// Omega_n = int lambda^{m-1} (G0 V)^n e_lambda (x) e_lambda dlambda, e_lambda = uJ(lambda r).
BornTermMatrix born_term(int n, GridPtr g, const PotentialSpec& V, const LambdaQuadrature& q = {});

struct WaveOpMatrix {
    Eigen::MatrixXcd total;
    Eigen::MatrixXcd low;  // W Phi(H0)^2
    Eigen::MatrixXcd high; // W Psi(H0)^2
    QuadratureRecord quad;
};

// W = 1 - int lambda^{m-1} M(lambda)^{-1} G0(lambda) V e_lambda (x) e_lambda dlambda.
// The split uses Phi(H0), Psi(H0) from the discrete free operator with the given options.
WaveOpMatrix stationary_w(GridPtr g, const PotentialSpec& V, const CutoffPair& cut, const LambdaQuadrature& q = {},
                          HamiltonianOptions opt = {});

// Columns of W applied to the columns of U without forming W.
Eigen::MatrixXcd stationary_w_apply(GridPtr g, const PotentialSpec& V, const Eigen::MatrixXcd& U,
                                    const LambdaQuadrature& q = {}, QuadratureRecord* rec = nullptr);

enum class Averaging { None, Abel };

struct TimeDependentW {
    std::vector<double> times;
    std::vector<Eigen::MatrixXcd> matrices;
    std::vector<double> successive_diff; // ||W(t_k) - W(t_{k-1})|| / ||W(t_{k-1})||
    double boundary_mass = 0;            // probe mass fraction in r > 0.9 rmax at the largest |t|
    bool reflection_warning = false;     // boundary_mass > 1%
};

// e^{itH} e^{-itH0} for each t (matrices). Abel averaging replaces W(t) with
// eps int_0^inf e^{-eps s} W(-s) ds, eps = 1/|t|.
TimeDependentW time_dependent_w(GridPtr g, const PotentialSpec& V, const std::vector<double>& t,
                                Averaging avg = Averaging::None, HamiltonianOptions opt = {});

// Mass fraction beyond 0.9 rmax of the free evolution of exp(-r^2/2) at time t.
double boundary_mass_probe(const PropagatorOracle& P, double t);

// Ten radial test functions concentrated near the origin.
std::vector<RadialFunction> intertwine_test_set(GridPtr g);

// max_u ||H W u - W H0 u|| / sqrt(||u||^2 + ||H0 u||^2) over intertwine_test_set.
double intertwine_residual(const Eigen::MatrixXcd& W, GridPtr g, const PotentialSpec& V, HamiltonianOptions opt = {});

// K(lambda) applied to a vector.
using KApply = std::function<Eigen::VectorXcd(double, const Eigen::VectorXcd&)>;

// K(lambda) = V (M(lambda)^{-1} - 1) G0(lambda) V through support-restricted solves.
KApply born_remainder_k(GridPtr g, const PotentialSpec& V);

// Omega = i pi int lambda^{m-1} phi_tilde(lambda) Phi(H) G0 K e_lambda (x) Phi(lambda^2) e_lambda dlambda
// over lambda < lambda0, with H given by its eigen-data.
struct OmegaResult {
    ReducedKernel kernel;
    QuadratureRecord quad;
};
OmegaResult omega_low(const KApply& K, const CutoffPair& cut, GridPtr g, const EigenData& H, const LambdaQuadrature& q = {});

// Radial Schur-test proxy: max of sup row and sup column sums of |kappa| w r^{m-1}.
double admissibility_score(const ReducedKernel& K);

struct G0lBoundReport {
    std::vector<double> lambdas;
    std::vector<double> ys;
    int beta = 0;
    // ratio[i][j] at lambdas[i], ys[j]
    std::vector<std::vector<double>> ratio;
    double max_ratio = 0;
};

// || <r>^{-beta-eps-m/2} d^beta/dlambda^beta [e^{-i lambda y} G0(lambda) Phi0(., y)] ||
// divided by lambda^{min(0,(m-3)/2-beta)} <y>^{-(m-1)/2}. Phi0 is the free lowpass kernel.
G0lBoundReport g0l_bound_check(const std::vector<double>& lambdas, int beta, GridPtr g, const std::vector<double>& ys,
                               const CutoffPair& cut, double eps = 0.1);

} // namespace wavop
