#pragma once

#include "wavop/radial.hpp"
#include "wavop/spectral.hpp"

#include <functional>
#include <vector>

namespace wavop {

// 1 + G0(lambda) V on sample vectors; column j carries V(r_j) w_j r_j^{m-1}.
struct MLambdaMatrix {
    double lambda = 0;
    Eigen::MatrixXcd matrix;
    double condition = 1; // 1-norm estimate from the LU factorization
};

MLambdaMatrix m_lambda(double lambda, GridPtr g, const Eigen::VectorXd& v);
Eigen::MatrixXcd invert_m(const MLambdaMatrix& M);

// M(lambda)^{-1} - 1 through the Woodbury identity on the support of V.
// Cost is O(N^2 |supp V| + |supp V|^3) instead of O(N^3).
Eigen::MatrixXcd m_inverse_minus_identity(double lambda, GridPtr g, const Eigen::VectorXd& v);

// Indices where V is not negligible (|V| > 1e-17 max|V|).
std::vector<int> potential_support(const Eigen::VectorXd& v);

// Block form of L in the basis given by the columns of T = [T0 | T1], T0 with n0 columns.
struct FeshbachDecomposition {
    Eigen::MatrixXcd T;
    int n0 = 0;
    Eigen::MatrixXcd L00, L01, L10, L11;
    Eigen::MatrixXcd schur; // C = L11 - L10 L00^{-1} L01

    Eigen::MatrixXcd reassemble() const;
};

FeshbachDecomposition feshbach_decompose(const Eigen::MatrixXcd& L, const Eigen::MatrixXcd& T, int n0);
// Split X = ran(1-Q) + ran(Q) for a projection Q of the given rank.
FeshbachDecomposition feshbach_from_projection(const Eigen::MatrixXcd& L, const Eigen::MatrixXcd& Q, int rank);
Eigen::MatrixXcd feshbach_invert(const FeshbachDecomposition& F);

struct SingularFitOptions {
    // Rescale V so the discrete M(0) is exactly singular (exceptional case only).
    bool tune_coupling = true;
};

struct SingularFit {
    std::vector<double> lambdas;
    Eigen::MatrixXcd fitted_p0v;    // lambda^{-2} coefficient from the log basis
    Eigen::MatrixXcd fitted_plain;  // lambda^{-2} coefficient from {lambda^{-2}}
    Eigen::MatrixXcd reference_p0v; // P0 V from the eigensolver (zero when generic)
    double residual_plain = 0;
    double residual_log = 0;
    double coupling = 1;            // factor applied to V
    double relative_error = 0;      // ||fitted - P0V|| / ||P0V|| in the L^2 operator norm
    double relative_error_weighted = 0; // same with <r>^{-3} on both sides
    double coefficient_norm = 0;    // ||fitted_p0v|| in the L^2 operator norm
    double v_norm = 0;              // sup |V|
    int numerical_rank = 0;         // singular values above 1e-2 of the largest
    std::vector<double> singular_values;
};

std::vector<double> singular_fit_ladder();

// lambda^2 (M^{-1} - 1) fitted entrywise against lambda^2 * basis.
// Plain basis {lambda^{-2}}; log basis adds 1, lambda^2 and lambda^j log^k lambda (j<=2, k=1,2).
SingularFit singular_fit(GridPtr g, const PotentialSpec& V, const std::vector<double>& lambdas,
                         const ThresholdClassification& cls, SingularFitOptions opt = {});

struct KPropertyReport {
    std::vector<double> lambdas;
    // norms[j][i]: weighted sup norm of the j-th derivative at lambdas[i]
    std::vector<std::vector<double>> norms;
    // growth of norm / <log lambda>^2 from the largest to the smallest lambda, per order
    std::vector<double> growth;
    bool violated = false;
};

using MatrixFamily = std::function<Eigen::MatrixXcd(double)>;

// Central differences with step 1e-2 lambda at each lattice point. The lattice sets where the
// growth is read off; consecutive ratios above 4 are rejected as too coarse.
KPropertyReport kproperty_probe(const MatrixFamily& K, double rho, int max_order, GridPtr g,
                                const std::vector<double>& lambdas, double growth_limit = 10.0);

} // namespace wavop
