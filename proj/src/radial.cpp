#include "wavop/radial.hpp"
#include "wavop/error.hpp"
#include "wavop/parallel.hpp"
#include "wavop/quadrature.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace wavop {

GridPtr make_grid(int m, double rmax, int n)
{
    if (m < 4 || m % 2 != 0) throw ConfigError("make_grid: m must be an even integer >= 4, got " + std::to_string(m));
    if (n < 16) throw ConfigError("make_grid: need at least 16 nodes, got " + std::to_string(n));
    if (!(rmax > 0) || !std::isfinite(rmax)) throw ConfigError("make_grid: rmax must be positive and finite");
    auto g = std::make_shared<RadialGrid>();
    g->m = m;
    g->rmax = rmax;
    g->n = n;
    g->h = rmax / n;
    g->r.resize(n);
    g->w.resize(n);
    g->mu.resize(n);
    for (int i = 0; i < n; ++i) {
        g->r[i] = (i + 1) * rmax / n;
        g->w[i] = g->h;
    }
    g->r[n - 1] = rmax;
    g->w[n - 1] = 0.5 * g->h;
    for (int i = 0; i < n; ++i) g->mu[i] = g->w[i] * std::pow(g->r[i], m - 1);
    return g;
}

bool same_grid(const RadialGrid& a, const RadialGrid& b)
{
    return &a == &b || (a.m == b.m && a.n == b.n && a.rmax == b.rmax);
}

void require_same_grid(const RadialGrid& a, const RadialGrid& b, const char* where)
{
    if (!same_grid(a, b)) throw ConfigError(std::string(where) + ": grid mismatch");
}

RadialFunction RadialFunction::sample(GridPtr g, const std::function<cplx(double)>& f)
{
    RadialFunction out{g, Eigen::VectorXcd(g->n)};
    for (int i = 0; i < g->n; ++i) out.v[i] = f(g->r[i]);
    return out;
}

RadialFunction RadialFunction::zero(GridPtr g)
{
    return {g, Eigen::VectorXcd::Zero(g->n)};
}

double lp_norm(const RadialFunction& f, double p)
{
    if (!(p >= 1)) throw DomainError("lp_norm: p must be >= 1");
    if (!f.v.allFinite()) throw NumericalError("lp_norm: non-finite samples");
    if (std::isinf(p)) return f.v.size() ? f.v.cwiseAbs().maxCoeff() : 0.0;
    const auto& g = *f.grid;
    double s = 0;
    for (int i = 0; i < g.n; ++i) s += std::pow(std::abs(f.v[i]), p) * g.mu[i];
    return std::pow(g.sphere() * s, 1.0 / p);
}

cplx weighted_l2_inner(const RadialFunction& f, const RadialFunction& g, WeightSpec w)
{
    require_same_grid(*f.grid, *g.grid, "weighted_l2_inner");
    if (!std::isfinite(w.gamma)) throw ConfigError("weighted_l2_inner: gamma must be finite");
    const auto& gr = *f.grid;
    cplx s = 0;
    for (int i = 0; i < gr.n; ++i)
        s += std::conj(f.v[i]) * g.v[i] * std::pow(1.0 + gr.r[i] * gr.r[i], w.gamma) * gr.mu[i];
    return gr.sphere() * s;
}

Eigen::MatrixXcd ReducedKernel::op() const
{
    if (includes_measure) return k;
    return k * grid->mu.cast<cplx>().asDiagonal();
}

Eigen::MatrixXcd ReducedKernel::kernel() const
{
    if (!includes_measure) return k;
    return k * grid->mu.cwiseInverse().cast<cplx>().asDiagonal();
}

ReducedKernel ReducedKernel::from_op(GridPtr g, const Eigen::MatrixXcd& op)
{
    return {std::move(g), op, true};
}

cplx reduce_pair(const Profile& profile, int m, double r, double s, AngularOptions opt)
{
    const double pi = std::numbers::pi;
    const double area = sphere_area(m - 1); // |S^{m-2}|
    const double gap = std::abs(r - s);
    std::vector<double> edges;
    int per_panel = opt.nodes;
    if (gap > 0 && gap < opt.near * std::min(r, s)) {
        // geometric panels from the angular scale of the near-diagonal peak
        const double delta = gap / std::sqrt(r * s);
        edges.push_back(0.0);
        for (double e = delta; e < pi; e *= 4.0) edges.push_back(e);
        edges.push_back(pi);
        per_panel = std::max(8, opt.nodes / 4);
    } else {
        edges = {0.0, pi};
    }
    const Rule q = gauss_legendre(per_panel);
    cplx acc = 0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p], b = edges[p + 1];
        const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
        cplx panel = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double th = c + hw * q.x[i];
            const double sh = std::sin(0.5 * th);
            const double d2 = (r - s) * (r - s) + 4.0 * r * s * sh * sh;
            const cplx v = profile(std::sqrt(d2));
            panel += q.w[i] * v * std::pow(std::sin(th), m - 2);
        }
        acc += hw * panel;
    }
    cplx out = area * acc;
    if (!std::isfinite(out.real()) || !std::isfinite(out.imag())) {
        std::ostringstream os;
        os << "reduce_kernel: non-finite value at (r,s) = (" << r << ", " << s << ")";
        throw NumericalError(os.str());
    }
    return out;
}

ReducedKernel reduce_kernel(const Profile& profile, GridPtr g, AngularOptions opt)
{
    const int n = g->n;
    ReducedKernel K{g, Eigen::MatrixXcd(n, n), false};
    // d(theta) is symmetric in (r,s) and so is the panel layout; fill the upper triangle.
    ExceptionGuard guard;
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i)
        guard.run([&] {
            for (int j = i; j < n; ++j) {
                const cplx v = reduce_pair(profile, g->m, g->r[i], g->r[j], opt);
                K.k(i, j) = v;
                K.k(j, i) = v;
            }
        });
    guard.rethrow();
    return K;
}

RadialFunction apply_kernel(const ReducedKernel& K, const RadialFunction& f)
{
    require_same_grid(*K.grid, *f.grid, "apply_kernel");
    return {f.grid, K.op() * f.v};
}

double weighted_opnorm(const Eigen::MatrixXcd& kernel, const RadialGrid& g, double gl, double gr)
{
    Eigen::VectorXd dl(g.n), dr(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double s = std::sqrt(g.mu[i]);
        dl[i] = s * std::pow(japanese(g.r[i]), -gl);
        dr[i] = s * std::pow(japanese(g.r[i]), -gr);
    }
    Eigen::MatrixXcd B = dl.cast<cplx>().asDiagonal() * kernel * dr.cast<cplx>().asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(B);
    return svd.singularValues()[0];
}

double weighted_opnorm_op(const Eigen::MatrixXcd& op, const RadialGrid& g, double gl, double gr)
{
    return weighted_opnorm(op * g.mu.cwiseInverse().cast<cplx>().asDiagonal(), g, gl, gr);
}

} // namespace wavop
