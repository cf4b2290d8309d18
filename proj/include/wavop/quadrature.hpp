#pragma once

#include <vector>

namespace wavop {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

// Gauss-Legendre on [-1,1], or mapped to [a,b].
Rule gauss_legendre(int n);
Rule gauss_legendre(int n, double a, double b);

// Generalized Gauss-Laguerre for the weight t^alpha e^{-t} on (0, inf).
// Golub-Welsch; weights carry Gamma(alpha+1).
Rule gauss_laguerre(int n, double alpha);

// n Gauss-Legendre nodes on every panel [edges[i], edges[i+1]].
Rule composite_gauss_legendre(const std::vector<double>& edges, int per_panel);

std::vector<double> logspace(double a, double b, int n);
std::vector<double> linspace(double a, double b, int n);

} // namespace wavop
