#include "wavop/error.hpp"
#include "wavop/harmonic.hpp"
#include "wavop/parallel.hpp"
#include "wavop/resolvent.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace wavop {

namespace {

// Lagrange interpolation through four (x, y) points.
cplx lagrange4(const double* x, const cplx* y, double t)
{
    cplx acc = 0;
    for (int a = 0; a < 4; ++a) {
        double l = 1;
        for (int b = 0; b < 4; ++b)
            if (b != a) l *= (t - x[b]) / (x[a] - x[b]);
        acc += l * y[a];
    }
    return acc;
}

} // namespace

Profile1D Profile1D::sample(double L, int half, const std::function<cplx(double)>& f)
{
    if (!(L > 0) || half < 2) throw ConfigError("Profile1D: need L > 0 and at least two nodes per side");
    Profile1D p;
    p.dx = L / half;
    p.half = half;
    p.v.resize(2 * half + 1);
    for (int i = 0; i < p.size(); ++i) p.v[i] = f(p.x(i));
    if (!p.v.allFinite()) throw NumericalError("Profile1D: non-finite sample");
    return p;
}

Profile1D Profile1D::zero(double L, int half)
{
    return sample(L, half, [](double) { return cplx(0); });
}

double Profile1D::even_defect() const
{
    double d = 0;
    for (int k = 1; k <= half; ++k) d = std::max(d, std::abs(at(k) - at(-k)));
    return d;
}

void Profile1D::require_even(const char* where, double tol) const
{
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    if (even_defect() > tol * scale) throw DomainError(std::string(where) + ": profile is not even");
}

cplx Profile1D::integral() const
{
    return dx * (v.sum() - 0.5 * (v[0] + v[v.size() - 1]));
}

cplx RhoProfile::operator()(double rho) const
{
    const int n = int(v.size());
    if (rho < 0 || rho > rho_max() * (1 + 1e-12) || n < 4) return 0;
    const double t = rho / drho;
    int i0 = std::clamp(int(std::floor(t)) - 1, 0, n - 4);
    const double x[4] = {double(i0), double(i0 + 1), double(i0 + 2), double(i0 + 3)};
    return lagrange4(x, &v[i0], t);
}

Profile radial_profile(const RadialFunction& f)
{
    GridPtr g = f.grid;
    Eigen::VectorXcd vals = f.v;
    return [g, vals](double d) -> cplx {
        const int n = g->n;
        const double t = d / g->h; // node i sits at t = i + 1
        if (t > n) return 0;
        if (t < 1) {
            const double x[4] = {-2, -1, 1, 2};
            const cplx y[4] = {vals[1], vals[0], vals[0], vals[1]};
            return lagrange4(x, y, t);
        }
        int i0 = std::clamp(int(std::floor(t)) - 2, 0, n - 4); // index of the first node
        const double x[4] = {double(i0 + 1), double(i0 + 2), double(i0 + 3), double(i0 + 4)};
        return lagrange4(x, &vals[i0], t);
    };
}

namespace {

Profile1D mirror_half(double L, int half, const std::vector<cplx>& pos)
{
    Profile1D M;
    M.dx = L / half;
    M.half = half;
    M.v.resize(2 * half + 1);
    for (int k = 0; k <= half; ++k) {
        M.v[half + k] = pos[k];
        M.v[half - k] = pos[k];
    }
    return M;
}

} // namespace

Profile1D spherical_average(const RadialFunction& g, const RadialFunction& u, double L, int half, AngularOptions opt)
{
    require_same_grid(*g.grid, *u.grid, "spherical_average");
    if (!(L > 0) || half < 2) throw ConfigError("spherical_average: bad output grid");
    const RadialGrid& G = *g.grid;
    const Profile up = radial_profile(u);
    const double dx = L / half;
    std::vector<cplx> pos(half + 1);
    const Eigen::VectorXcd gw = g.v.conjugate().cwiseProduct(G.mu.cast<cplx>());
    ExceptionGuard guard;
#pragma omp parallel for schedule(static)
    for (int k = 0; k <= half; ++k)
        guard.run([&] {
            cplx acc = 0;
            for (int j = 0; j < G.n; ++j)
                if (gw[j] != cplx(0)) acc += gw[j] * reduce_pair(up, G.m, k * dx, G.r[j], opt);
            pos[k] = acc;
        });
    guard.rethrow();
    return mirror_half(L, half, pos);
}

Profile1D spherical_average(const Profile& g, const Profile& u, int m, double L, int half, double smax,
                            AngularOptions opt)
{
    if (!(L > 0) || half < 2 || !(smax > 0)) throw ConfigError("spherical_average: bad output grid");
    std::vector<double> edges;
    const int panels = std::max(1, int(std::ceil(smax / 0.5)));
    for (int p = 0; p <= panels; ++p) edges.push_back(smax * p / panels);
    const Rule s = composite_gauss_legendre(edges, 16);
    std::vector<cplx> gw(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) gw[j] = std::conj(g(s.x[j])) * s.w[j] * std::pow(s.x[j], m - 1);
    const double dx = L / half;
    std::vector<cplx> pos(half + 1);
    ExceptionGuard guard;
#pragma omp parallel for schedule(static)
    for (int k = 0; k <= half; ++k)
        guard.run([&] {
            cplx acc = 0;
            for (std::size_t j = 0; j < s.size(); ++j)
                if (gw[j] != cplx(0)) acc += gw[j] * reduce_pair(u, m, k * dx, s.x[j], opt);
            pos[k] = acc;
        });
    guard.rethrow();
    return mirror_half(L, half, pos);
}

Rule branch_rule(double alpha, int per_panel)
{
    std::vector<double> edges{0.0};
    for (double e = 1e-4; e < 1.0; e *= 2.0) edges.push_back(e);
    for (double e = 1.0; e <= 7.0 + 1e-12; e += 0.5) edges.push_back(e);
    const Rule s = composite_gauss_legendre(edges, per_panel);
    Rule t;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double x = s.x[i];
        t.x.push_back(x * x);
        t.w.push_back(2.0 * s.w[i] * std::pow(x, 2 * alpha + 1) * std::exp(-x * x));
    }
    return t;
}

cplx half_power(cplx z, double nu)
{
    const int n = int(std::lround(nu - 0.5));
    cplx p = std::sqrt(z);
    for (int k = 0; k < n; ++k) p *= z;
    return p;
}

double pairing_constant(int m)
{
    return -1.0 / ((m - 2) * std::tgamma(m - 2.0));
}

double pairing_constant_quoted(int m)
{
    return -std::pow(2.0, 0.5 * (m - 4)) / std::tgamma(m - 2.0);
}

namespace {

cplx pairing_sum(const Profile1D& M, double lambda, int m, int nodes)
{
    const double nu = 0.5 * (m - 3);
    const Rule t = branch_rule(nu, nodes);
    cplx acc = 0;
    for (std::size_t a = 0; a < t.size(); ++a) {
        cplx inner = 0;
        for (int i = 0; i < M.size(); ++i) {
            const double r = M.x(i);
            if (r == 0 || M.v[i] == cplx(0)) continue;
            inner += std::exp(cplx(0, -lambda * r)) * half_power(cplx(t.x[a], 2 * lambda * r), nu) * r * M.v[i];
        }
        acc += t.w[a] * inner;
    }
    return pairing_constant(m) * M.dx * acc;
}

} // namespace

cplx pairing(const Profile1D& M, double lambda, int m, PairingOptions opt)
{
    if (m < 4 || m % 2) throw ConfigError("pairing: m must be even and >= 4");
    const cplx a = pairing_sum(M, lambda, m, opt.panel_nodes);
    const cplx b = pairing_sum(M, lambda, m, 2 * opt.panel_nodes);
    const double scale = std::max(std::abs(b), 1e-300);
    if (std::abs(b) > 0 && std::abs(a - b) > opt.gate * scale) {
        std::ostringstream os;
        os << "pairing: t-quadrature not converged at lambda = " << lambda << " (change " << std::abs(a - b) / scale
           << ")";
        throw ConvergenceError(os.str());
    }
    return b;
}

cplx pairing(const RadialFunction& psi, const RadialFunction& u, double lambda, PairingOptions opt)
{
    const RadialGrid& g = *psi.grid;
    const Profile1D M = spherical_average(psi, u, 2 * g.rmax, 2 * g.n);
    return pairing(M, lambda, g.m, opt);
}

cplx pairing_oracle(const RadialFunction& psi, const RadialFunction& u, double lambda)
{
    require_same_grid(*psi.grid, *u.grid, "pairing_oracle");
    const RadialGrid& g = *psi.grid;
    if (lambda == 0) return 0;
    const Eigen::VectorXcd d = g0_factors(lambda, g).apply(g, u.v) - g0_factors(-lambda, g).apply(g, u.v);
    cplx acc = 0;
    for (int i = 0; i < g.n; ++i) acc += g.mu[i] * std::conj(psi.v[i]) * d[i];
    return g.sphere() * acc;
}

} // namespace wavop
