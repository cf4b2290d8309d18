#include "wavop/resolvent.hpp"
#include "wavop/error.hpp"
#include "wavop/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace wavop {

namespace {

const double kPi = std::numbers::pi;

void require_even_m(int m, const char* where)
{
    if (m < 4 || m % 2 != 0) throw ConfigError(std::string(where) + ": m must be even and >= 4");
}

// Gamma(m/2-1) / (4 pi^{m/2} Gamma(m-2) 2^{-nu}), nu = (m-3)/2
double g0_norm(int m)
{
    const double nu = 0.5 * (m - 3);
    return std::tgamma(0.5 * m - 1) / (4.0 * std::pow(kPi, 0.5 * m) * std::tgamma(m - 2.0) * std::pow(2.0, -nu));
}

} // namespace

double g0_static(double rho, int m)
{
    return std::tgamma(0.5 * m - 1) / (4.0 * std::pow(kPi, 0.5 * m)) * std::pow(rho, 2 - m);
}

cplx g0_point(double lambda, double rho, int m, int nodes)
{
    require_even_m(m, "g0_point");
    if (!(rho > 0)) throw DomainError("g0_point: rho must be positive");
    if (!std::isfinite(lambda)) throw DomainError("g0_point: lambda must be finite");
    if (lambda < 0) return std::conj(g0_point(-lambda, rho, m, nodes));
    const double nu = 0.5 * (m - 3);
    const Rule q = gauss_laguerre(nodes, nu);
    const cplx shift(0.0, -lambda * rho);
    cplx s = 0;
    for (std::size_t k = 0; k < q.size(); ++k) s += q.w[k] * std::pow(0.5 * q.x[k] + shift, nu);
    const cplx phase = std::polar(1.0, lambda * rho);
    cplx out = g0_norm(m) * std::pow(rho, 2 - m) * phase * s;
    const double z = lambda * rho;
    if (z < 1) {
        // Im is O(z^{m-2}) against an O(1) sum: take it from the J_{m/2-1} series instead
        const int n = m / 2 - 1;
        double term = std::pow(0.5 * z, n) / std::tgamma(n + 1.0), acc = 0;
        for (int k = 0; k < 30 && term != 0; ++k) {
            acc += term;
            term *= -0.25 * z * z / ((k + 1.0) * (k + 1.0 + n));
        }
        out.imag(0.25 * std::pow(lambda / (2 * kPi * rho), n) * acc);
    }
    return out;
}

cplx g0_constant_ratio(int m)
{
    const double nu = 0.5 * (m - 3);
    const cplx cm = cplx(0, 1) * std::polar(1.0, -(2 * nu + 1) * kPi / 4) /
                    (2.0 * std::pow(2 * kPi, nu + 1) * std::tgamma(nu + 0.5));
    return g0_norm(m) / cm;
}

cplx h_beta(double s, int beta, int m, int nodes)
{
    require_even_m(m, "h_beta");
    if (!(s >= 0) || !std::isfinite(s)) throw DomainError("h_beta: s must be finite and >= 0");
    if (beta < 0) throw DomainError("h_beta: beta must be >= 0");
    const double nu = 0.5 * (m - 3);
    const double q = nu - beta;
    if (s == 0) {
        // (i/2)^q Gamma(2nu - beta + 1)
        if (!(2 * nu - beta > -1)) throw DomainError("h_beta: integral diverges at s = 0");
        return std::pow(cplx(0, 0.5), q) * std::tgamma(2 * nu - beta + 1);
    }
    auto f = [&](double t) { return std::pow(cplx(s, 0.5 * t), q); };
    if (s >= 0.5 || q >= 0) {
        const Rule r = gauss_laguerre(nodes, nu);
        cplx acc = 0;
        for (std::size_t k = 0; k < r.size(); ++k) acc += r.w[k] * f(r.x[k]);
        return acc;
    }
    // small s with a negative power: (s + it/2)^q varies on the scale t ~ s, so
    // resolve [0, 80] with geometric panels and drop the e^{-80} tail
    std::vector<double> edges{0.0};
    for (double e = s; e < 80.0; e *= 2.0) edges.push_back(e);
    edges.push_back(80.0);
    const Rule r = composite_gauss_legendre(edges, 24);
    cplx acc = 0;
    for (std::size_t k = 0; k < r.size(); ++k) acc += r.w[k] * std::exp(-r.x[k]) * std::pow(r.x[k], nu) * f(r.x[k]);
    return acc;
}

double a_point(double lambda, double rho, int m)
{
    require_even_m(m, "a_point");
    const double k = std::abs(lambda) * std::abs(rho);
    const int panels = std::max(1, int(std::ceil(k / 4.0)));
    std::vector<double> edges = linspace(0.0, kPi, panels + 1);
    const Rule q = composite_gauss_legendre(edges, 32);
    double acc = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
        acc += q.w[i] * std::cos(k * std::cos(q.x[i])) * std::pow(std::sin(q.x[i]), m - 2);
    return std::pow(2 * kPi, -m) * sphere_area(m - 1) * acc;
}

double a_zero_value(int m)
{
    return std::pow(2 * kPi, -m) * sphere_area(m);
}

double a_zero_quoted(int m)
{
    double dfact = 1;
    for (int k = m; k > 1; k -= 2) dfact *= k;
    return std::pow(2 * kPi, -0.5 * m) / dfact;
}

ReducedKernel g0_reduced(double lambda, GridPtr g)
{
    const int n = g->n, m = g->m, nu = (m - 2) / 2;
    ReducedKernel K{g, Eigen::MatrixXcd(n, n), false};
    if (lambda == 0) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) K.k(i, j) = std::pow(std::max(g->r[i], g->r[j]), 2 - m) / (m - 2);
        return K;
    }
    const double l = std::abs(lambda);
    Eigen::VectorXd uj(n);
    Eigen::VectorXcd uh(n);
    for (int i = 0; i < n; ++i) {
        uj[i] = bessel_uj(nu, l * g->r[i]);
        uh[i] = bessel_uh(nu, l * g->r[i]);
    }
    const cplx c = cplx(0, 0.5 * kPi) * std::pow(l, m - 2);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int lo = std::min(i, j), hi = std::max(i, j);
            K.k(i, j) = c * uj[lo] * uh[hi];
        }
    if (lambda < 0) K.k = K.k.conjugate();
    return K;
}

G0Factors g0_factors(double lambda, const RadialGrid& g)
{
    if (lambda == 0) throw DomainError("g0_factors: lambda must be nonzero");
    const int n = g.n, m = g.m, nu = (m - 2) / 2;
    const double l = std::abs(lambda);
    G0Factors f;
    f.uj.resize(n);
    f.uh.resize(n);
    for (int i = 0; i < n; ++i) {
        f.uj[i] = bessel_uj(nu, l * g.r[i]);
        f.uh[i] = bessel_uh(nu, l * g.r[i]);
    }
    f.c = cplx(0, 0.5 * kPi) * std::pow(l, m - 2);
    f.conjugate = lambda < 0;
    return f;
}

cplx G0Factors::kernel(int i, int j) const
{
    const cplx v = c * uj[std::min(i, j)] * uh[std::max(i, j)];
    return conjugate ? std::conj(v) : v;
}

Eigen::VectorXcd G0Factors::apply(const RadialGrid& g, const Eigen::VectorXcd& f) const
{
    const int n = g.n;
    Eigen::VectorXcd out(n);
    const Eigen::VectorXcd fm = conjugate ? Eigen::VectorXcd(f.conjugate().cwiseProduct(g.mu.cast<cplx>()))
                                          : Eigen::VectorXcd(f.cwiseProduct(g.mu.cast<cplx>()));
    // out_i = c (uh_i sum_{j<=i} uj_j fm_j + uj_i sum_{j>i} uh_j fm_j)
    cplx lo = 0;
    for (int i = 0; i < n; ++i) {
        lo += uj[i] * fm[i];
        out[i] = uh[i] * lo;
    }
    cplx hi = 0;
    for (int i = n - 1; i >= 0; --i) {
        out[i] += uj[i] * hi;
        hi += uh[i] * fm[i];
    }
    out *= c;
    return conjugate ? Eigen::VectorXcd(out.conjugate()) : out;
}

ReducedKernel a_reduced(double lambda, GridPtr g)
{
    const int n = g->n, nu = (g->m - 2) / 2;
    Eigen::VectorXd e(n);
    for (int i = 0; i < n; ++i) e[i] = bessel_uj(nu, std::abs(lambda) * g->r[i]);
    return {g, (e * e.transpose()).cast<cplx>(), false};
}

double inverse_laplacian_constant(int m, int k)
{
    return std::tgamma(0.5 * m - k) / (std::pow(4.0, k) * std::pow(kPi, 0.5 * m) * std::tgamma(double(k)));
}

ReducedKernel inverse_laplacian_power(int k, GridPtr g, AngularOptions opt)
{
    const int m = g->m;
    if (k < 1) throw DomainError("inverse_laplacian_power: k must be >= 1");
    if (2 * k >= m) throw DomainError("inverse_laplacian_power: need 2k < m");
    const double c = inverse_laplacian_constant(m, k);
    const int p = 2 * k - m;
    return reduce_kernel([c, p](double d) { return cplx(c * std::pow(d, p), 0.0); }, g, opt);
}

double sigma0(double k, double l, int m)
{
    if (!(k >= 0 && k <= m - 1)) throw DomainError("sigma0: k must lie in [0, m-1]");
    if (!(l >= 0)) throw DomainError("sigma0: l must be >= 0");
    const double half = 0.5 * (m - 1);
    if (l <= k && k + l <= m - 1) return 0.5 * (k + l + 1);
    if (k <= half && l >= k) return l + 0.5;
    return k + l - 0.5 * (m - 2);
}

namespace {

// j-th derivative at 0 from samples G(i*h), i = -2..2, central stencils
Eigen::MatrixXcd central_derivative(int j, double h, const std::function<Eigen::MatrixXcd(double)>& G,
                                    const Eigen::MatrixXcd& g0)
{
    switch (j) {
    case 1: return (G(h) - G(-h)) / (2 * h);
    case 2: return (G(h) - 2.0 * g0 + G(-h)) / (h * h);
    case 3: return (G(2 * h) - 2.0 * G(h) + 2.0 * G(-h) - G(-2 * h)) / (2 * h * h * h);
    case 4: return (G(2 * h) - 4.0 * G(h) + 6.0 * g0 - 4.0 * G(-h) + G(-2 * h)) / (h * h * h * h);
    default: throw DomainError("g0_taylor: derivative order must be <= 4");
    }
}

} // namespace

TaylorCoefficients g0_taylor(int order, GridPtr g, double step)
{
    TaylorCoefficients tc;
    tc.step = step;
    const Eigen::MatrixXcd g00 = g0_reduced(0.0, g).k;
    tc.c.push_back(g00);
    auto G = [&](double l) { return g0_reduced(l, g).k; };
    double fact = 1;
    for (int j = 1; j < order; ++j) {
        fact *= j;
        const Eigen::MatrixXcd d1 = central_derivative(j, step, G, g00);
        const Eigen::MatrixXcd d2 = central_derivative(j, 0.5 * step, G, g00);
        tc.c.push_back((4.0 * d2 - d1) / 3.0 / fact);
    }
    return tc;
}

ReducedKernel jk_remainder(double lambda, int k, GridPtr g, const TaylorCoefficients& tc)
{
    if (lambda == 0) throw DomainError("jk_remainder: lambda must be nonzero");
    if (k < 0 || k > g->m - 3) throw DomainError("jk_remainder: k must lie in 0..m-3");
    if (int(tc.c.size()) < k) throw ConfigError("jk_remainder: not enough Taylor coefficients");
    Eigen::MatrixXcd R = g0_reduced(lambda, g).k;
    double lp = 1;
    for (int j = 0; j < k; ++j) {
        R -= lp * tc.c[j];
        lp *= lambda;
    }
    return {g, R / std::pow(lambda, k), false};
}

ReducedKernel jk_remainder(double lambda, int k, GridPtr g, double step)
{
    return jk_remainder(lambda, k, g, g0_taylor(k, g, step));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw ConfigError("loglog_slope: need matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ExpansionReport expansion_check(GridPtr g, const std::vector<double>& lambdas, ExpansionOptions opt)
{
    const int m = g->m;
    ExpansionReport rep;
    rep.gamma = opt.gamma < 0 ? 0.5 * (m + 1) : opt.gamma;
    for (double l : lambdas)
        if (!(l > 0 && l < 0.125)) throw DomainError("expansion_check: lambda must lie in (0, 1/8)");

    // D_{j+1} = (-Delta)^{-j-1}, j = 0..(m-4)/2; D_1 = G0(0) in closed form
    std::vector<Eigen::MatrixXcd> D;
    D.push_back(g0_reduced(0.0, g).k);
    for (int j = 1; j <= (m - 4) / 2; ++j) D.push_back(inverse_laplacian_power(j + 1, g, opt.angular).k);

    auto remainder = [&](double lam) {
        Eigen::MatrixXcd R = g0_reduced(lam, g).k;
        double l2 = 1;
        for (const auto& Dj : D) {
            R -= l2 * Dj;
            l2 *= lam * lam;
        }
        if (opt.include_a_term) {
            const double al = std::abs(lam);
            const cplx coef = std::pow(al, m - 2) * cplx(-std::log(al), lam > 0 ? 0.5 * kPi : -0.5 * kPi);
            R -= coef * a_reduced(lam, g).k;
        }
        return R;
    };

    for (double l : lambdas) {
        const Eigen::MatrixXcd Rp = remainder(l);
        const Eigen::MatrixXcd Rm = remainder(-l);
        const double np = weighted_opnorm(Rp, *g, rep.gamma, rep.gamma);
        const double nd = weighted_opnorm(Rp - Rm, *g, rep.gamma, rep.gamma);
        rep.lambdas.push_back(l);
        rep.remainder_norms.push_back(np);
        rep.evenness_defect = std::max(rep.evenness_defect, nd / np);
    }
    rep.fitted_exponent = loglog_slope(rep.lambdas, rep.remainder_norms);
    return rep;
}

} // namespace wavop
