#include "wavop/dispersive.hpp"
#include "wavop/error.hpp"
#include "wavop/resolvent.hpp"

#include <cmath>
#include <limits>

namespace wavop {

RadialFunction evolve(const PropagatorOracle& P, const RadialFunction& u0, double t)
{
    require_same_grid(*P.grid, *u0.grid, "evolve");
    return {u0.grid, P.evolve(u0.v, t)};
}

double theoretical_slope(double p, int m)
{
    if (!(p >= 2)) throw DomainError("theoretical_slope: p must be >= 2");
    const double inv = std::isinf(p) ? 0.0 : 1.0 / p;
    return -m * (0.5 - inv);
}

double band_limit_energy(const RadialGrid& g, double tmax)
{
    const double box = 0.5 * g.rmax / std::max(tmax, 1e-300);
    return std::min(1.0 / (g.h * g.h), box * box);
}

DecayMeasurement decay_scan(GridPtr g, const PotentialSpec& V, const RadialFunction& u0, double p,
                            const std::vector<double>& times, DecayOptions opt)
{
    V.validate(*g);
    return decay_scan(PropagatorOracle::build(g, V, opt.hamiltonian), u0, p, times, opt);
}

DecayMeasurement decay_scan(const PropagatorOracle& P, const RadialFunction& u0, double p,
                            const std::vector<double>& times, DecayOptions opt)
{
    const RadialGrid& g = *P.grid;
    require_same_grid(g, *u0.grid, "decay_scan");
    if (!(p >= 2)) throw DomainError("decay_scan: p must be >= 2");
    if (times.size() < 2) throw ConfigError("decay_scan: need at least two times");
    double tmax = 0;
    for (double t : times) {
        if (!(std::abs(t) >= 5)) throw ConfigError("decay_scan: |t| must be >= 5");
        tmax = std::max(tmax, std::abs(t));
    }
    if (!u0.v.allFinite()) throw ConfigError("decay_scan: initial data not finite");

    DecayMeasurement out;
    out.p = p;
    out.q = std::isinf(p) ? 1.0 : p / (p - 1);
    out.theoretical_slope = theoretical_slope(p, g.m);
    out.band_energy = opt.band_limit ? band_limit_energy(g, tmax) : std::numeric_limits<double>::infinity();

    const EigenData& E = P.h;
    const Eigen::VectorXcd x = E.s.cast<cplx>().cwiseProduct(u0.v);
    Eigen::VectorXcd c(E.vectors.cols());
    c.real() = E.vectors.transpose() * x.real();
    c.imag() = E.vectors.transpose() * x.imag();
    for (int k = 0; k < int(c.size()); ++k) {
        const double en = E.values[k];
        if (opt.project && en < 0) c[k] = 0;
        else if (opt.band_limit) c[k] *= std::exp(-std::pow(std::max(en, 0.0) / out.band_energy, 4));
    }

    std::vector<double> fit_t, fit_n;
    for (double t : times) {
        Eigen::VectorXcd ct = c;
        for (int k = 0; k < int(ct.size()); ++k) ct[k] *= std::exp(cplx(0, -t * E.values[k]));
        Eigen::VectorXcd y(E.vectors.rows());
        y.real() = E.vectors * ct.real();
        y.imag() = E.vectors * ct.imag();
        double tot = 0, edge = 0;
        for (int i = 0; i < g.n; ++i) {
            const double a = std::norm(y[i]);
            tot += a;
            if (g.r[i] > 0.9 * g.rmax) edge += a;
        }
        const double bm = tot > 0 ? edge / tot : 0.0;
        if (out.truncated || bm > opt.reflection_limit) {
            out.truncated = true;
            out.dropped.push_back(t);
            continue;
        }
        const RadialFunction ut{u0.grid, y.cwiseQuotient(E.s.cast<cplx>())};
        const double nrm = lp_norm(ut, p);
        out.times.push_back(t);
        out.norms.push_back(nrm);
        out.boundary_mass.push_back(bm);
        fit_t.push_back(std::abs(t));
        fit_n.push_back(nrm);
    }
    if (fit_t.size() < 2) throw ConvergenceError("decay_scan: reflection left fewer than two usable times");
    out.fitted_slope = loglog_slope(fit_t, fit_n);
    return out;
}

} // namespace wavop
