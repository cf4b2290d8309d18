#pragma once

#include "wavop/radial.hpp"

#include <limits>
#include <string>
#include <vector>

namespace wavop {

struct PotentialSpec {
    enum class Kind { Zero, Gaussian, ExceptionalM6, Tabulated };

    Kind kind = Kind::Zero;
    double v0 = 0;
    double width = 1;
    // overall coupling multiplier applied to every kind
    double scale = 1;
    std::vector<double> tab_r, tab_v;
    // claimed |V(r)| <= bound * <r>^{-delta}; infinity means compact support
    double delta = std::numeric_limits<double>::infinity();
    double bound = 0;
    // support radius when delta is infinite
    double support = 0;

    static PotentialSpec zero();
    static PotentialSpec gaussian(double v0, double width, double delta = 12.0);
    static PotentialSpec tabulated(std::vector<double> r, std::vector<double> v, double delta, double bound);
    // two-column text file (r, V), '#' comments
    static PotentialSpec from_file(const std::string& path, double delta, double bound);

    double operator()(double r) const;
    Eigen::VectorXd sample(const RadialGrid& g) const;
    PotentialSpec scaled(double s) const;
    bool is_zero() const { return kind == Kind::Zero || scale == 0 || (kind == Kind::Gaussian && v0 == 0); }
    std::string describe() const;

    // Checks the decay claim on the grid; throws ConfigError on violation.
    void validate(const RadialGrid& g) const;
};

// phi = 6 - 8r^2 + 3r^4 (r <= 1), r^{-4} (r > 1); V = Delta phi / phi on [0,1].
PotentialSpec make_exceptional_potential(int m);
double exceptional_phi(double r);

enum class Scheme {
    Centered,     // -w'' + (m-1)(m-3)/(4r^2) w + V w on w = r^{(m-1)/2} u
    Conservative, // cell-centred flux form of -r^{1-m}(r^{m-1} u')' + V u
};

enum class OuterBoundary {
    Dirichlet,       // wall one spacing beyond rmax
    ZeroEnergyRobin, // u'(R) = -(m-2) u(R)/R, matched to the r^{2-m} zero-energy tail
};

struct HamiltonianOptions {
    Scheme scheme = Scheme::Centered;
    OuterBoundary outer = OuterBoundary::ZeroEnergyRobin;
};

// Symmetric tridiagonal T acting on x = s .* u, where sum |x_i|^2 is the L^2(R^m) norm of u.
struct Hamiltonian {
    GridPtr grid;
    PotentialSpec potential;
    HamiltonianOptions opt;
    Eigen::VectorXd v;
    Eigen::VectorXd d;
    Eigen::VectorXd e;
    Eigen::VectorXd s;

    Eigen::MatrixXd matrix() const;
    double norm_bound() const; // Gershgorin bound on ||T||
    Eigen::VectorXcd apply_u(const Eigen::VectorXcd& u) const;
};

Hamiltonian build_hamiltonian(GridPtr g, const PotentialSpec& V, HamiltonianOptions opt = {});

struct EigenData {
    GridPtr grid;
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // orthonormal columns in x-space
    Eigen::VectorXd s;       // x = s .* u

    Eigen::VectorXd u_of(int k) const { return vectors.col(k).cwiseQuotient(s); }
};

EigenData eigensolve(const Hamiltonian& H);
// Eigenpairs with eigenvalue in (vl, vu].
EigenData eigensolve_window(const Hamiltonian& H, double vl, double vu);
// Eigenpairs il..iu (0-based, inclusive).
EigenData eigensolve_index(const Hamiltonian& H, int il, int iu);

struct ThresholdClassification {
    enum class Kind { Generic, Exceptional };
    Kind kind = Kind::Generic;
    int d = 0;
    double e_tol = 0;
    std::vector<double> energies;
    std::vector<double> tail_slopes;
    Eigen::MatrixXd basis; // n x d samples, normalized so that -<V phi_i, phi_j> = delta_ij
    Eigen::MatrixXd p0;    // L^2-orthogonal projection onto span(basis), acting on samples
    Eigen::MatrixXd q;     // -sum phi_j (x) V phi_j, acting on samples
};

// 10 * (lowest free eigenvalue on the same grid and scheme) / N
double default_e_tol(GridPtr g, HamiltonianOptions opt = {});

// Tail test: slope of log|phi| vs log r on [rmax/2, rmax] within (2-m) +- 0.5.
double tail_slope(const RadialGrid& g, const Eigen::VectorXd& u);

ThresholdClassification classify(const Hamiltonian& H, double e_tol);
ThresholdClassification classify(const Hamiltonian& H);

// Removes components along eigenvectors with eigenvalue < threshold.
RadialFunction pc_project(const EigenData& E, const RadialFunction& f, double threshold = 0.0);

} // namespace wavop
