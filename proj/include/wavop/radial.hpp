#pragma once

#include "wavop/special.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>

namespace wavop {

// Uniform radial grid r_i = i*rmax/n, i = 1..n, trapezoid weights (h/2 at rmax).
struct RadialGrid {
    int m = 6;
    double rmax = 0;
    int n = 0;
    double h = 0;
    Eigen::VectorXd r;
    Eigen::VectorXd w;
    Eigen::VectorXd mu; // w_i r_i^{m-1}

    double sphere() const { return sphere_area(m); }
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int m, double rmax, int n);
bool same_grid(const RadialGrid& a, const RadialGrid& b);
void require_same_grid(const RadialGrid& a, const RadialGrid& b, const char* where);

struct RadialFunction {
    GridPtr grid;
    Eigen::VectorXcd v;

    static RadialFunction sample(GridPtr g, const std::function<cplx(double)>& f);
    static RadialFunction zero(GridPtr g);
};

struct WeightSpec {
    double gamma = 0.0;
};

double lp_norm(const RadialFunction& f, double p);
cplx weighted_l2_inner(const RadialFunction& f, const RadialFunction& g, WeightSpec w = {});

// kappa(r_i, r_j) of a rotation-invariant kernel after integrating out the angle.
// includes_measure = true means column j already carries w_j r_j^{m-1}.
struct ReducedKernel {
    GridPtr grid;
    Eigen::MatrixXcd k;
    bool includes_measure = false;

    // Matrix acting on sample vectors: (Kf)_i = sum_j op_ij f_j.
    Eigen::MatrixXcd op() const;
    // Plain kernel values kappa(r_i, r_j).
    Eigen::MatrixXcd kernel() const;

    static ReducedKernel from_op(GridPtr g, const Eigen::MatrixXcd& op);
};

using Profile = std::function<cplx(double)>;

struct AngularOptions {
    int nodes = 64;
    // relative closeness |r-s| < near * min(r,s) switches to geometric panels
    double near = 0.1;
};

ReducedKernel reduce_kernel(const Profile& profile, GridPtr g, AngularOptions opt = {});

// kappa(r,s) for one pair, same rule as reduce_kernel.
cplx reduce_pair(const Profile& profile, int m, double r, double s, AngularOptions opt = {});

RadialFunction apply_kernel(const ReducedKernel& K, const RadialFunction& f);

// ||<r>^{-gl} K <r>^{-gr}|| as an operator on L^2(R^m) restricted to radial functions.
// K is given by its plain kernel values.
double weighted_opnorm(const Eigen::MatrixXcd& kernel, const RadialGrid& g, double gamma_left, double gamma_right);

// Same norm for a matrix acting on sample vectors.
double weighted_opnorm_op(const Eigen::MatrixXcd& op, const RadialGrid& g, double gamma_left, double gamma_right);

inline double japanese(double r) { return std::sqrt(1.0 + r * r); }

} // namespace wavop
