#include "wavop/error.hpp"
#include "wavop/harmonic.hpp"
#include "wavop/parallel.hpp"
#include "wavop/resolvent.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace wavop {

int kjk_max_index(int m)
{
    if (m < 4 || m % 2) throw ConfigError("kjk: m must be even and >= 4");
    return (m - 4) / 2;
}

cplx c_jk(int m, int j, int k)
{
    const int n = kjk_max_index(m);
    if (j < 0 || k < 0 || j > n || k > n) throw DomainError("c_jk: index out of range");
    const double pi = std::numbers::pi;
    const double g0 = std::tgamma(0.5 * m - 1) / (4 * std::pow(pi, 0.5 * m) * std::tgamma(m - 2.0));
    cplx c = g0 * pairing_constant(m) * binomial(n, j) * binomial(n, k);
    c *= std::pow(cplx(0, -2), j) * std::pow(cplx(0, 2), k);
    return c;
}

namespace {

// Shared quadrature tables: lambda on the two cutoff panels, branch rules for the s/t integrals.
struct Engine {
    int m;
    double a;
    Rule lam;
    std::vector<double> phit;
    std::vector<Rule> srule; // srule[j] has weight s^{a-j} e^{-s}

    Engine(int m_, const CutoffPair& cut, const KjkOptions& opt, bool doubled = false) : m(m_), a(m_ - 3.5)
    {
        cut.validate();
        const int ln = doubled ? 2 * opt.lambda_nodes : opt.lambda_nodes;
        const int pn = doubled ? 2 * opt.panel_nodes : opt.panel_nodes;
        lam = composite_gauss_legendre({0.0, cut.lambda0, 2 * cut.lambda0}, ln);
        for (double l : lam.x) phit.push_back(cut.phi_tilde(l));
        for (int j = 0; j <= kjk_max_index(m); ++j) srule.push_back(branch_rule(a - j, pn));
        if (doubled) dz *= 0.5;
    }

    // S_j(z) = int e^{-s} s^{a-j} (s - 2iz)^{1/2} ds, and E(z) = int e^{-s} s^a (-2i) / ((s - 2iz)^{1/2} + s^{1/2}) ds,
    // so that (S_0(z) - Gamma(m-2)) = z E(z). The t-integrals with (t + 2iz)^{1/2} are the conjugates.
    cplx s_sum(int j, double z) const
    {
        const Rule& R = srule[j];
        cplx acc = 0;
        for (std::size_t i = 0; i < R.size(); ++i) acc += R.w[i] * std::sqrt(cplx(R.x[i], -2 * z));
        return acc;
    }
    cplx e_sum(double z) const
    {
        const Rule& R = srule[0];
        cplx acc = 0;
        for (std::size_t i = 0; i < R.size(); ++i)
            acc += R.w[i] * cplx(0, -2) / (std::sqrt(cplx(R.x[i], -2 * z)) + std::sqrt(R.x[i]));
        return acc;
    }

    // Tables on z = 0, dz, ..; key j >= 0 for S_j, key -1 for E. Built before parallel regions.
    double dz = 0.004;
    mutable double zcover = -1;
    mutable std::vector<std::vector<cplx>> ztab;

    void ensure(double zmax) const
    {
        if (zmax <= zcover) return;
        const int n = int(std::ceil(zmax / dz)) + 4;
        const int nk = int(srule.size()) + 1;
        ztab.assign(nk, std::vector<cplx>(n));
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j + 1 < nk; ++j) ztab[j][i] = s_sum(j, i * dz);
            ztab[nk - 1][i] = e_sum(i * dz);
        }
        zcover = (n - 4) * dz;
    }

    cplx zlookup(int key, double z) const
    {
        const std::vector<cplx>& v = ztab[key < 0 ? ztab.size() - 1 : std::size_t(key)];
        const double t = z / dz;
        const int i0 = std::clamp(int(std::floor(t)) - 1, 0, int(v.size()) - 4);
        cplx acc = 0;
        for (int a = 0; a < 4; ++a) {
            double l = 1;
            for (int b = 0; b < 4; ++b)
                if (b != a) l *= (t - (i0 + b)) / double(a - b);
            acc += l * v[i0 + a];
        }
        return acc;
    }

    cplx s_int(int j, double z) const { return zlookup(j, z); }

    // A_k(lambda) = int e^{-i lambda r} r^{k+1} M(r) conj(S_k(lambda r)) dr for even M.
    std::vector<cplx> a_k(const Profile1D& M, int k) const
    {
        std::vector<cplx> out(lam.size());
        ensure(lam.x.back() * M.L());
        const double sgn = (k % 2) ? 1.0 : -1.0; // (-1)^{k+1}
#pragma omp parallel for schedule(static)
        for (int q = 0; q < int(lam.size()); ++q) {
            const double l = lam.x[q];
            cplx acc = 0;
            for (int i = 1; i <= M.half; ++i) {
                const cplx mv = M.at(i);
                if (mv == cplx(0)) continue;
                const double r = i * M.dx;
                const cplx X = std::exp(cplx(0, -l * r)) * std::conj(s_int(k, l * r));
                acc += mv * std::pow(r, k + 1) * (X + sgn * std::conj(X));
            }
            out[q] = M.dx * acc;
        }
        return out;
    }

    // m_hat(lambda) / lambda = -2i int_0^inf sin(lambda r)/lambda r M dr
    std::vector<cplx> mhat_over_lambda(const Profile1D& M) const
    {
        std::vector<cplx> out(lam.size());
        for (std::size_t q = 0; q < lam.size(); ++q) {
            const double l = lam.x[q];
            cplx acc = 0;
            for (int i = 1; i <= M.half; ++i) {
                const double r = i * M.dx;
                acc += std::sin(l * r) / l * r * M.at(i);
            }
            out[q] = cplx(0, -2) * M.dx * acc;
        }
        return out;
    }

    // Tables over (lambda node, rho node); cached for the last rho grid.
    mutable double cache_drho = -1;
    mutable int cache_n = -1;
    mutable std::map<int, Eigen::MatrixXcd> cache; // j >= 0: S_j, -1: K2 difference form

    void reset_cache(int n, double drho) const
    {
        if (n != cache_n || drho != cache_drho) {
            cache.clear();
            cache_n = n;
            cache_drho = drho;
        }
    }

    const Eigen::MatrixXcd& table(int key, int n, double drho) const
    {
        reset_cache(n, drho);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        Eigen::MatrixXcd T(lam.size(), n);
        ensure(lam.x.back() * (n - 1) * drho);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double rho = i * drho;
            for (std::size_t q = 0; q < lam.size(); ++q) {
                const double z = lam.x[q] * rho;
                // key -1: the K2 s-difference with lambda divided out, rho E(lambda rho)
                T(q, i) = key >= 0 ? zlookup(key, z) : rho * zlookup(-1, z);
            }
        }
        return cache.emplace(key, std::move(T)).first->second;
    }

    static int rho_count(double rho_max, double drho) { return int(std::floor(rho_max / drho + 1e-9)) + 1; }

    // rho^j sum_q w_q e^{i lambda rho} lambda^{pw} phit S(q, rho) A(lambda) on the rho grid; key < -1 means S = 1
    RhoProfile assemble(int j, int pw, const std::vector<cplx>& A, double rho_max, double drho, int key) const
    {
        const int n = rho_count(rho_max, drho);
        const Eigen::MatrixXcd* S = key >= -1 ? &table(key, n, drho) : nullptr;
        RhoProfile out{drho, Eigen::VectorXcd::Zero(n)};
        std::vector<cplx> coef(lam.size());
        for (std::size_t q = 0; q < lam.size(); ++q) coef[q] = lam.w[q] * std::pow(lam.x[q], pw) * phit[q] * A[q];
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double rho = i * drho;
            cplx acc = 0;
            for (std::size_t q = 0; q < lam.size(); ++q) {
                if (coef[q] == cplx(0)) continue;
                const cplx sv = S ? (*S)(q, i) : cplx(1);
                acc += std::exp(cplx(0, lam.x[q] * rho)) * sv * coef[q];
            }
            out.v[i] = std::pow(rho, j) * acc;
        }
        return out;
    }

    RhoProfile kjk_direct(const Profile1D& M, int j, int k, double rho_max, double drho) const
    {
        const std::vector<cplx> A = a_k(M, k);
        return assemble(j, j + k - 1, A, rho_max, drho, j);
    }

    K00Split split(const Profile1D& M, double rho_max, double drho) const
    {
        const double gm = std::tgamma(m - 2.0);
        // K1: t-difference 2 i lambda r / ((t + 2 i lambda r)^{1/2} + t^{1/2}) = lambda r conj(E(lambda r)),
        // lambda divided out
        std::vector<cplx> D(lam.size());
        ensure(lam.x.back() * M.L());
#pragma omp parallel for schedule(static)
        for (int q = 0; q < int(lam.size()); ++q) {
            const double l = lam.x[q];
            cplx acc = 0;
            for (int i = 1; i <= M.half; ++i) {
                const cplx mv = M.at(i);
                if (mv == cplx(0)) continue;
                const double r = i * M.dx;
                const cplx E = zlookup(-1, l * r);
                // r and -r
                acc += mv * r * r * (std::exp(cplx(0, -l * r)) * std::conj(E) - std::exp(cplx(0, l * r)) * E);
            }
            D[q] = M.dx * acc;
        }
        K00Split out;
        out.k1 = assemble(0, 0, D, rho_max, drho, 0);

        // K2: s-difference -2 i lambda rho / ((s - 2 i lambda rho)^{1/2} + s^{1/2}), lambda divided out
        std::vector<cplx> mh = mhat_over_lambda(M);
        std::vector<cplx> mhat(lam.size());
        for (std::size_t q = 0; q < lam.size(); ++q) mhat[q] = gm * mh[q] * lam.x[q];
        out.k2 = assemble(0, 0, mhat, rho_max, drho, -1);

        // K3: (st)^{1/2} term, Gamma(m-2)^2 m_hat / lambda
        for (auto& v : mh) v *= gm * gm;
        out.k3 = assemble(0, 0, mh, rho_max, drho, -2);
        return out;
    }
};

void check_indices(int m, int j, int k)
{
    const int n = kjk_max_index(m);
    if (j < 0 || k < 0 || j > n || k > n) throw DomainError("kjk: index out of range");
}

RhoProfile kjk_values(const Engine& E, const Profile1D& M, int j, int k, double rho_max, double drho)
{
    if (j + k >= 1) return E.kjk_direct(M, j, k, rho_max, drho);
    K00Split s = E.split(M, rho_max, drho);
    s.k1.v += s.k2.v + s.k3.v;
    return s.k1;
}

double rel_change(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    const double s = b.cwiseAbs().maxCoeff();
    return s > 0 ? (a - b).cwiseAbs().maxCoeff() / s : 0.0;
}

} // namespace

KjkResult kjk(const Profile1D& M, int j, int k, int m, const CutoffPair& cut, double rho_max, double drho,
              KjkOptions opt)
{
    check_indices(m, j, k);
    M.require_even("kjk");
    if (!(drho > 0) || !(rho_max >= 0)) throw ConfigError("kjk: bad rho grid");
    const Engine E(m, cut, opt);
    KjkResult out{kjk_values(E, M, j, k, rho_max, drho), 0.0};
    if (opt.check) {
        const Engine E2(m, cut, opt, true);
        const RhoProfile fine = kjk_values(E2, M, j, k, rho_max, drho);
        out.doubling_change = rel_change(out.values.v, fine.v);
        out.values = fine;
    }
    return out;
}

K00Split k00_split(const Profile1D& M, int m, const CutoffPair& cut, double rho_max, double drho, KjkOptions opt)
{
    kjk_max_index(m);
    M.require_even("k00_split");
    const Engine E(m, cut, opt);
    return E.split(M, rho_max, drho);
}

RhoProfile k3_direct(const Profile1D& M, int m, const CutoffPair& cut, double rho_max, double drho, KjkOptions opt)
{
    kjk_max_index(m);
    M.require_even("k3_direct");
    const Engine E(m, cut, opt);
    std::vector<cplx> mh = E.mhat_over_lambda(M);
    const double gm = std::tgamma(m - 2.0);
    for (auto& v : mh) v *= gm * gm;
    return E.assemble(0, 0, mh, rho_max, drho, -2);
}

cplx tjk_reduced(double rho, double r, int j, int k, int m, const CutoffPair& cut, KjkOptions opt)
{
    check_indices(m, j, k);
    if (j + k < 1) throw DomainError("tjk: j + k must be >= 1");
    if (rho < 0 || r < 0) throw DomainError("tjk: rho and r must be >= 0");
    const Engine E(m, cut, opt);
    E.ensure(E.lam.x.back() * std::max(rho, r));
    cplx acc = 0;
    for (std::size_t q = 0; q < E.lam.size(); ++q) {
        const double l = E.lam.x[q];
        acc += E.lam.w[q] * std::exp(cplx(0, l * (rho - r))) * std::pow(l, j + k - 1) * E.phit[q] *
               E.s_int(j, l * rho) * std::conj(E.s_int(k, l * r));
    }
    return acc;
}

cplx tjk(double rho, double r, int j, int k, int m, const CutoffPair& cut, KjkOptions opt)
{
    return std::pow(rho, j) * std::pow(r, k + 1) * tjk_reduced(rho, r, j, k, m, cut, opt);
}

cplx tjk_boundary_piece(double rho, double r, int j, int k, int m, const CutoffPair& cut, KjkOptions opt)
{
    check_indices(m, j, k);
    if (j + k < 1) throw DomainError("tjk: j + k must be >= 1");
    const Engine E(m, cut, opt);
    cplx acc = 0;
    for (std::size_t q = 0; q < E.lam.size(); ++q) {
        const double l = E.lam.x[q];
        acc += E.lam.w[q] * std::exp(cplx(0, l * (rho - r))) * std::pow(l, j + k - 1) * E.phit[q];
    }
    return std::pow(rho, j) * std::pow(r, k + 1) * std::tgamma(m - 2.0 - j) * std::tgamma(m - 2.0 - k) * acc;
}

TjkBoundReport tjk_bound_check(int j, int k, int m, const CutoffPair& cut, double extent, double step, TjkBound which,
                               KjkOptions opt)
{
    check_indices(m, j, k);
    if (which == TjkBound::Main && (j < 1 || k < 1)) throw DomainError("tjk_bound_check: main bound needs j, k >= 1");
    if (which == TjkBound::T01 && (j != 0 || k != 1)) throw DomainError("tjk_bound_check: T01 bound is for (0,1)");
    if (!(step > 0) || !(extent > 0)) throw ConfigError("tjk_bound_check: bad lattice");
    const Engine E(m, cut, opt);
    const int n = int(std::floor(extent / step + 1e-9)) + 1;
    const std::size_t nl = E.lam.size();
    E.ensure(E.lam.x.back() * (n - 1) * step);
    // S_j(lambda rho) and conj S_k(lambda r) tables
    Eigen::MatrixXcd Sj(nl, n), Tk(nl, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
        for (std::size_t q = 0; q < nl; ++q) {
            const double z = E.lam.x[q] * i * step;
            Sj(q, i) = E.s_int(j, z);
            Tk(q, i) = std::conj(E.s_int(k, z));
        }
    TjkBoundReport rep;
    rep.j = j;
    rep.k = k;
    rep.step = step;
    std::vector<double> ratio(std::size_t(n) * n);
#pragma omp parallel for schedule(static)
    for (int a = 0; a < n; ++a) {
        const double rho = a * step;
        for (int b = 0; b < n; ++b) {
            const double r = b * step;
            cplx acc = 0;
            for (std::size_t q = 0; q < nl; ++q) {
                const double l = E.lam.x[q];
                acc += E.lam.w[q] * std::exp(cplx(0, l * (rho - r))) * std::pow(l, j + k - 1) * E.phit[q] * Sj(q, a) *
                       Tk(q, b);
            }
            double v;
            if (which == TjkBound::Main)
                v = std::abs(acc) * std::pow(rho, j) * std::pow(japanese(r - rho), j + k) /
                    (std::pow(japanese(rho), j + 0.5) * std::sqrt(japanese(r)));
            else
                v = std::abs(acc) * std::pow(japanese(r - rho), 2) / (japanese(rho) + japanese(r));
            ratio[std::size_t(a) * n + b] = v;
        }
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double v = ratio[std::size_t(a) * n + b];
            if (!std::isfinite(v)) rep.finite = false;
            else if (v > rep.max_ratio) {
                rep.max_ratio = v;
                rep.argmax_rho = a * step;
                rep.argmax_r = b * step;
            }
        }
    return rep;
}

bool decay_test(const RadialFunction& f, double eps)
{
    const RadialGrid& g = *f.grid;
    double inner = 0, outer = 0;
    for (int i = 0; i < g.n; ++i) {
        const double v = std::abs(f.v[i]) * std::pow(japanese(g.r[i]), g.m + eps);
        if (g.r[i] <= 0.5 * g.rmax) inner = std::max(inner, v);
        else outer = std::max(outer, v);
    }
    return outer <= inner;
}

namespace {

RadialFunction apply_profile(const RadialFunction& f, const std::function<cplx(double)>& K, const WjkOptions& opt)
{
    const int m = f.grid->m;
    const ReducedKernel R = reduce_kernel([&](double d) { return K(d) * std::pow(d, 2 - m); }, f.grid, opt.angular);
    return apply_kernel(R, f);
}

void require_decay(const RadialFunction& f, const char* what)
{
    if (!decay_test(f)) throw ConfigError(std::string("wjk: ") + what + " fails the <x>^{-m-eps} decay test");
}

} // namespace

RadialFunction wjk_apply(const RadialFunction& f, const Profile1D& M, int j, int k, const CutoffPair& cut,
                         WjkOptions opt)
{
    require_decay(f, "f");
    const RhoProfile K = kjk(M, j, k, f.grid->m, cut, 2 * f.grid->rmax, opt.drho, opt.kjk).values;
    return apply_profile(f, [&](double d) { return K(d); }, opt);
}

RadialFunction wjk_apply(const RadialFunction& f, const RadialFunction& g, const RadialFunction& u, int j, int k,
                         const CutoffPair& cut, WjkOptions opt)
{
    require_decay(g, "g");
    const RadialGrid& G = *g.grid;
    const Profile1D M = spherical_average(g, u, 2 * G.rmax, 2 * G.n, opt.angular);
    return wjk_apply(f, M, j, k, cut, opt);
}

RadialFunction wsm_assembly(const RadialFunction& f, const Profile1D& M, const CutoffPair& cut, WjkOptions opt)
{
    require_decay(f, "f");
    const int m = f.grid->m, n = kjk_max_index(m);
    M.require_even("wsm_assembly");
    const Engine E(m, cut, opt.kjk);
    RhoProfile sum;
    for (int j = 0; j <= n; ++j)
        for (int k = 0; k <= n; ++k) {
            RhoProfile K = kjk_values(E, M, j, k, 2 * f.grid->rmax, opt.drho);
            K.v *= c_jk(m, j, k);
            if (sum.v.size() == 0) sum = K;
            else sum.v += K.v;
        }
    return apply_profile(f, [&](double d) { return sum(d); }, opt);
}

RadialFunction z_direct(const RadialFunction& f, const RadialFunction& g, const RadialFunction& u,
                        const CutoffPair& cut, int lambda_nodes)
{
    require_same_grid(*f.grid, *g.grid, "z_direct");
    require_same_grid(*f.grid, *u.grid, "z_direct");
    cut.validate();
    const RadialGrid& G = *f.grid;
    const Rule lam = composite_gauss_legendre({0.0, cut.lambda0, 2 * cut.lambda0}, lambda_nodes);
    std::vector<Eigen::VectorXcd> parts(lam.size());
    ExceptionGuard guard;
#pragma omp parallel for schedule(static)
    for (int q = 0; q < int(lam.size()); ++q)
        guard.run([&] {
            const double l = lam.x[q];
            const cplx F = pairing_oracle(g, u, l);
            parts[q] = (lam.w[q] * cut.phi_tilde(l) / l * F) * g0_factors(l, G).apply(G, f.v);
        });
    guard.rethrow();
    RadialFunction out = RadialFunction::zero(f.grid);
    for (const auto& p : parts) out.v += p;
    return out;
}

std::vector<NormScanRow> wjk_norm_scan(const RadialFunction& f, const RadialFunction& g, const std::vector<double>& ps,
                                       const CutoffPair& cut, NormScanOptions opt)
{
    require_decay(f, "f");
    require_decay(g, "g");
    const RadialGrid& G = *f.grid;
    const int m = G.m, n = kjk_max_index(m);
    if (opt.j >= 0 || opt.k >= 0) check_indices(m, opt.j, opt.k);
    for (double p : ps)
        if (!(p >= 1)) throw DomainError("wjk_norm_scan: p must be >= 1");
    const Engine E(m, cut, opt.wjk.kjk);
    const Profile gp = radial_profile(g);
    // support of g on the grid
    double gsup = G.h;
    for (int i = 0; i < G.n; ++i)
        if (g.v[i] != cplx(0)) gsup = G.r[i];

    std::vector<NormScanRow> rows(ps.size());
    for (std::size_t a = 0; a < ps.size(); ++a) rows[a].p = ps[a];
    const double pi = std::numbers::pi;
    for (int e = opt.min_exp; e <= opt.max_exp; ++e) {
        const double th = std::ldexp(1.0, e);
        const Profile up = [th](double r) { return cplx(std::exp(-th * th * r * r), 0.0); };
        const double L = gsup + 6.0 / th + 1.0;
        const Profile1D M = spherical_average(gp, up, m, L, 400, gsup + 0.5 * G.h, opt.wjk.angular);
        RhoProfile sum;
        for (int j = 0; j <= n; ++j)
            for (int k = 0; k <= n; ++k) {
                if (opt.j >= 0 && (j != opt.j || k != opt.k)) continue;
                RhoProfile K = kjk_values(E, M, j, k, 2 * G.rmax, opt.wjk.drho);
                if (opt.j < 0) K.v *= c_jk(m, j, k);
                if (sum.v.size() == 0) sum = K;
                else sum.v += K.v;
            }
        const RadialFunction W = apply_profile(f, [&](double d) { return sum(d); }, opt.wjk);
        for (auto& row : rows) {
            const double un = std::pow(std::pow(pi / (row.p * th * th), 0.5 * m), 1.0 / row.p);
            row.thetas.push_back(th);
            row.ratios.push_back(lp_norm(W, row.p) / un);
        }
    }
    for (auto& row : rows) {
        double at1 = 0, mx = 0;
        for (std::size_t i = 0; i < row.thetas.size(); ++i) {
            if (row.thetas[i] == 1.0) at1 = row.ratios[i];
            mx = std::max(mx, row.ratios[i]);
        }
        row.variation = at1 > 0 ? mx / at1 : std::numeric_limits<double>::infinity();
    }
    return rows;
}

} // namespace wavop
