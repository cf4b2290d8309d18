#include "wavop/waveop.hpp"
#include "wavop/error.hpp"
#include "wavop/inversion.hpp"
#include "wavop/parallel.hpp"
#include "wavop/resolvent.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

namespace wavop {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXcd to_x(const EigenData& E, const Eigen::VectorXcd& u)
{
    return E.s.cast<cplx>().cwiseProduct(u);
}

Eigen::VectorXcd from_x(const EigenData& E, const Eigen::VectorXcd& x)
{
    return x.cwiseQuotient(E.s.cast<cplx>());
}

Eigen::VectorXcd uj_vector(const G0Factors& f)
{
    return f.uj.cast<cplx>();
}

// Support of V with the small block of M(lambda) restricted to it.
struct SupportSolver {
    const RadialGrid& g;
    const Eigen::VectorXd& v;
    const std::vector<int>& S;
    const G0Factors& f;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
    bool singular = false;

    SupportSolver(const RadialGrid& g_, const Eigen::VectorXd& v_, const std::vector<int>& S_, const G0Factors& f_)
        : g(g_), v(v_), S(S_), f(f_)
    {
        const int k = int(S.size());
        Eigen::MatrixXcd A(k, k);
        for (int b = 0; b < k; ++b) {
            const double d = v[S[b]] * g.mu[S[b]];
            for (int a = 0; a < k; ++a) A(a, b) = (a == b ? 1.0 : 0.0) + f.kernel(S[a], S[b]) * d;
        }
        if (k > 0) {
            lu.compute(A);
            singular = !(lu.rcond() > 1e-14);
        }
    }

    // x with M x = y, reported through G0 V x (the part that differs from y): x = y - G0 V x
    Eigen::VectorXcd g0v_of_solution(const Eigen::VectorXcd& y) const
    {
        const int k = int(S.size());
        Eigen::VectorXcd yS(k);
        for (int a = 0; a < k; ++a) yS[a] = y[S[a]];
        const Eigen::VectorXcd xS = lu.solve(yS);
        Eigen::VectorXcd src = Eigen::VectorXcd::Zero(g.n);
        for (int a = 0; a < k; ++a) src[S[a]] = v[S[a]] * xS[a];
        return f.apply(g, src);
    }
};

void check_potential_grid(const PotentialSpec& V, const RadialGrid& g)
{
    V.validate(g);
}

struct NodeVectors {
    Eigen::MatrixXcd A; // left vectors, quadrature weight folded in
    Eigen::MatrixXcd B; // right vectors (already carrying mu)
    std::vector<char> excluded;
};

// fn(lambda, a, b) fills the two vectors for one node; returns false to exclude the node.
template <class Fn>
NodeVectors collect(const Rule& rule, int n, Fn fn)
{
    const int K = int(rule.size());
    NodeVectors nv{Eigen::MatrixXcd::Zero(n, K), Eigen::MatrixXcd::Zero(n, K), std::vector<char>(K, 0)};
    ExceptionGuard guard;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < K; ++k)
        guard.run([&] {
            Eigen::VectorXcd a, b;
            if (fn(rule.x[k], a, b)) {
                nv.A.col(k) = rule.w[k] * a;
                nv.B.col(k) = b;
            } else {
                nv.excluded[k] = 1;
            }
        });
    guard.rethrow();
    return nv;
}

QuadratureRecord record_of(const Rule& rule, const NodeVectors& nv, double change)
{
    QuadratureRecord rec;
    rec.nodes = int(rule.size());
    rec.doubling_change = change;
    rec.converged = change < kStrictGate;
    for (std::size_t k = 0; k < rule.size(); ++k)
        if (nv.excluded[k]) {
            ++rec.excluded_nodes;
            rec.largest_excluded = std::max(rec.largest_excluded, rule.x[k]);
        }
    return rec;
}

double relative_change(const Eigen::MatrixXcd& coarse, const Eigen::MatrixXcd& fine)
{
    const double d = (coarse - fine).norm();
    const double s = fine.norm();
    return s > 0 ? d / s : d;
}

void gate(double change, const char* where)
{
    if (!(change <= kFailGate)) {
        std::ostringstream os;
        os << where << ": lambda quadrature not converged, doubling change " << change;
        throw ConvergenceError(os.str());
    }
}

} // namespace

Eigen::MatrixXcd spectral_function(const EigenData& E, const std::function<cplx(double)>& f)
{
    const int n = int(E.vectors.rows());
    const int k = int(E.vectors.cols());
    Eigen::VectorXcd fv(k);
    for (int i = 0; i < k; ++i) fv[i] = f(E.values[i]);
    const Eigen::MatrixXcd U = E.vectors.cast<cplx>();
    Eigen::MatrixXcd F = U * fv.asDiagonal() * U.transpose();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) F(i, j) *= E.s[j] / E.s[i];
    return F;
}

PropagatorOracle PropagatorOracle::build(GridPtr g, const PotentialSpec& V, HamiltonianOptions opt)
{
    PropagatorOracle P;
    P.grid = g;
    P.h = eigensolve(build_hamiltonian(g, V, opt));
    P.h0 = eigensolve(build_hamiltonian(g, PotentialSpec::zero(), opt));
    return P;
}

Eigen::VectorXcd PropagatorOracle::evolve(const Eigen::VectorXcd& u, double t, bool free) const
{
    const EigenData& E = free ? h0 : h;
    if (u.size() != grid->n) throw ConfigError("evolve: sample count differs from grid");
    const Eigen::MatrixXd& U = E.vectors;
    Eigen::VectorXcd x = to_x(E, u);
    Eigen::VectorXcd c(U.cols());
    c.real() = U.transpose() * x.real();
    c.imag() = U.transpose() * x.imag();
    for (int k = 0; k < int(c.size()); ++k) c[k] *= std::exp(cplx(0, -t * E.values[k]));
    Eigen::VectorXcd y(U.rows());
    y.real() = U * c.real();
    y.imag() = U * c.imag();
    return from_x(E, y);
}

Eigen::VectorXcd PropagatorOracle::wave(const Eigen::VectorXcd& u, double t) const
{
    return evolve(evolve(u, t, true), -t, false);
}

ReducedKernel lowpass_kernel(const CutoffPair& cut, Lowpass which, GridPtr g, const EigenData* spectral)
{
    cut.validate();
    auto phi = [&](double E) { return cplx(cut.phi(E), 0.0); };
    if (which == Lowpass::Full) {
        if (!spectral) throw ConfigError("lowpass_kernel: Phi(H) needs eigen-data of H");
        require_same_grid(*spectral->grid, *g, "lowpass_kernel");
        return ReducedKernel::from_op(g, spectral_function(*spectral, phi));
    }
    const EigenData E0 = eigensolve(build_hamiltonian(g, PotentialSpec::zero()));
    return ReducedKernel::from_op(g, spectral_function(E0, phi));
}

double kernel_decay_slope(const ReducedKernel& K, double dmin, double dmax)
{
    const Eigen::MatrixXcd kap = K.kernel();
    const RadialGrid& g = *K.grid;
    std::vector<double> s, a;
    for (int j = 0; j < g.n; ++j) {
        s.push_back(g.r[j]);
        a.push_back(std::abs(kap(0, j)));
    }
    std::vector<double> x, y;
    for (int j = 0; j < g.n; ++j) {
        if (s[j] < dmin || s[j] > dmax) continue;
        double env = 0;
        for (int i = 0; i < g.n; ++i)
            if (std::abs(s[i] - s[j]) <= 2.0) env = std::max(env, a[i]);
        if (env <= 0) continue;
        x.push_back(japanese(s[j]));
        y.push_back(env);
    }
    if (x.size() < 3) throw ConfigError("kernel_decay_slope: grid does not cover the fit window");
    return loglog_slope(x, y);
}

Rule LambdaQuadrature::rule() const
{
    validate();
    std::vector<double> edges{0.0};
    const std::vector<double> lg = logspace(lambda_min, lambda0, log_panels + 1);
    edges.insert(edges.end(), lg.begin(), lg.end());
    if (lambda_max > lambda0) {
        const int np = std::max(1, int(std::ceil((lambda_max - lambda0) / panel_width - 1e-9)));
        for (int k = 1; k <= np; ++k) edges.push_back(lambda0 + (lambda_max - lambda0) * k / np);
    }
    return composite_gauss_legendre(edges, nodes);
}

LambdaQuadrature LambdaQuadrature::doubled() const
{
    LambdaQuadrature q = *this;
    q.nodes *= 2;
    return q;
}

void LambdaQuadrature::validate() const
{
    if (!(lambda_min > 0 && lambda_min < lambda0)) throw ConfigError("lambda quadrature: need 0 < lambda_min < lambda0");
    if (!(lambda_max >= lambda0)) throw ConfigError("lambda quadrature: need lambda_max >= lambda0");
    if (log_panels < 1 || nodes < 2) throw ConfigError("lambda quadrature: need log_panels >= 1 and nodes >= 2");
    if (!(panel_width > 0)) throw ConfigError("lambda quadrature: panel_width must be positive");
}

namespace {

NodeVectors born_nodes(int order, const RadialGrid& g, const Eigen::VectorXd& v, const Rule& rule)
{
    const int m = g.m;
    const Eigen::VectorXcd vc = v.cast<cplx>();
    const Eigen::VectorXcd mu = g.mu.cast<cplx>();
    return collect(rule, g.n, [&](double l, Eigen::VectorXcd& a, Eigen::VectorXcd& b) {
        const G0Factors f = g0_factors(l, g);
        const Eigen::VectorXcd e = uj_vector(f);
        Eigen::VectorXcd x = e;
        for (int k = 0; k < order; ++k) x = f.apply(g, vc.cwiseProduct(x));
        a = std::pow(l, m - 1) * x;
        b = e.cwiseProduct(mu);
        return true;
    });
}

} // namespace

BornTermMatrix born_term(int n, GridPtr g, const PotentialSpec& V, const LambdaQuadrature& q)
{
    if (n < 1) throw ConfigError("born_term: order must be >= 1");
    check_potential_grid(V, *g);
    BornTermMatrix B;
    B.order = n;
    const Eigen::VectorXd v = V.sample(*g);
    if (V.is_zero() || v.cwiseAbs().maxCoeff() == 0) {
        B.matrix = Eigen::MatrixXcd::Zero(g->n, g->n);
        B.quad.nodes = int(q.rule().size());
        return B;
    }
    const Rule r1 = q.rule(), r2 = q.doubled().rule();
    const NodeVectors n1 = born_nodes(n, *g, v, r1);
    const NodeVectors n2 = born_nodes(n, *g, v, r2);
    const Eigen::MatrixXcd m1 = n1.A * n1.B.transpose();
    B.matrix = n2.A * n2.B.transpose();
    const double ch = relative_change(m1, B.matrix);
    gate(ch, "born_term");
    B.quad = record_of(r2, n2, ch);
    return B;
}

namespace {

NodeVectors stationary_nodes(const RadialGrid& g, const Eigen::VectorXd& v, const std::vector<int>& S, const Rule& rule)
{
    const int m = g.m;
    const Eigen::VectorXcd vc = v.cast<cplx>();
    const Eigen::VectorXcd mu = g.mu.cast<cplx>();
    return collect(rule, g.n, [&](double l, Eigen::VectorXcd& a, Eigen::VectorXcd& b) {
        const G0Factors f = g0_factors(l, g);
        const Eigen::VectorXcd e = uj_vector(f);
        const SupportSolver ss(g, v, S, f);
        if (ss.singular) return false;
        // psi = M^{-1} G0 V e = G0 V e - G0 V psi, with psi = M^{-1} y for y = G0 V e
        const Eigen::VectorXcd y = f.apply(g, vc.cwiseProduct(e));
        const Eigen::VectorXcd psi = y - ss.g0v_of_solution(y);
        a = std::pow(l, m - 1) * psi;
        b = e.cwiseProduct(mu);
        return true;
    });
}

} // namespace

Eigen::MatrixXcd stationary_w_apply(GridPtr g, const PotentialSpec& V, const Eigen::MatrixXcd& U,
                                    const LambdaQuadrature& q, QuadratureRecord* rec)
{
    check_potential_grid(V, *g);
    if (U.rows() != g->n) throw ConfigError("stationary_w_apply: sample count differs from grid");
    const Eigen::VectorXd v = V.sample(*g);
    const std::vector<int> S = potential_support(v);
    if (S.empty()) {
        if (rec) *rec = QuadratureRecord{int(q.rule().size()), 0, true, 0, 0};
        return U;
    }
    const Rule r1 = q.rule(), r2 = q.doubled().rule();
    const NodeVectors n1 = stationary_nodes(*g, v, S, r1);
    const NodeVectors n2 = stationary_nodes(*g, v, S, r2);
    const Eigen::MatrixXcd d1 = n1.A * (n1.B.transpose() * U);
    const Eigen::MatrixXcd d2 = n2.A * (n2.B.transpose() * U);
    const double ch = relative_change(d1, d2);
    gate(ch, "stationary_w_apply");
    if (rec) *rec = record_of(r2, n2, ch);
    return U - d2;
}

WaveOpMatrix stationary_w(GridPtr g, const PotentialSpec& V, const CutoffPair& cut, const LambdaQuadrature& q,
                          HamiltonianOptions opt)
{
    cut.validate();
    WaveOpMatrix W;
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(g->n, g->n);
    W.total = stationary_w_apply(g, V, I, q, &W.quad);
    const EigenData E0 = eigensolve(build_hamiltonian(g, PotentialSpec::zero(), opt));
    const Eigen::MatrixXcd phi2 = spectral_function(E0, [&](double E) { return cplx(std::pow(cut.phi(E), 2), 0); });
    const Eigen::MatrixXcd psi2 = spectral_function(E0, [&](double E) { return cplx(std::pow(cut.psi(E), 2), 0); });
    W.low = W.total * phi2;
    W.high = W.total * psi2;
    return W;
}

double boundary_mass_probe(const PropagatorOracle& P, double t)
{
    const RadialGrid& g = *P.grid;
    Eigen::VectorXcd u(g.n);
    for (int i = 0; i < g.n; ++i) u[i] = std::exp(-0.5 * g.r[i] * g.r[i]);
    const Eigen::VectorXcd x = to_x(P.h0, P.evolve(u, t, true));
    double tot = 0, out = 0;
    for (int i = 0; i < g.n; ++i) {
        const double a = std::norm(x[i]);
        tot += a;
        if (g.r[i] > 0.9 * g.rmax) out += a;
    }
    return tot > 0 ? out / tot : 0.0;
}

TimeDependentW time_dependent_w(GridPtr g, const PotentialSpec& V, const std::vector<double>& t, Averaging avg,
                                HamiltonianOptions opt)
{
    if (t.empty()) throw ConfigError("time_dependent_w: empty time list");
    for (std::size_t k = 1; k < t.size(); ++k)
        if (!(std::abs(t[k]) > std::abs(t[k - 1]))) throw ConfigError("time_dependent_w: times must grow in magnitude");
    check_potential_grid(V, *g);
    const PropagatorOracle P = PropagatorOracle::build(g, V, opt);
    const int n = g->n;
    const Eigen::MatrixXd cross = P.h.vectors.transpose() * P.h0.vectors;
    TimeDependentW out;
    out.times = t;
    for (double tk : t) {
        Eigen::MatrixXcd C(n, n);
        const double eps = 1.0 / std::max(std::abs(tk), 1e-300);
        const double sgn = tk < 0 ? 1.0 : -1.0;
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
                const double dE = P.h.values[a] - P.h0.values[b];
                const cplx f = avg == Averaging::None ? std::exp(cplx(0, tk * dE)) : eps / cplx(eps, sgn * dE);
                C(a, b) = cross(a, b) * f;
            }
        Eigen::MatrixXcd Wx = P.h.vectors.cast<cplx>() * C * P.h0.vectors.transpose().cast<cplx>();
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) Wx(i, j) *= P.h0.s[j] / P.h.s[i];
        out.matrices.push_back(std::move(Wx));
    }
    for (std::size_t k = 1; k < out.matrices.size(); ++k)
        out.successive_diff.push_back(relative_change(out.matrices[k], out.matrices[k - 1]));
    out.boundary_mass = boundary_mass_probe(P, std::abs(t.back()));
    out.reflection_warning = out.boundary_mass > 0.01;
    return out;
}

std::vector<RadialFunction> intertwine_test_set(GridPtr g)
{
    const std::vector<std::function<cplx(double)>> fs{
        [](double r) { return std::exp(-r * r / 2); },
        [](double r) { return std::exp(-r * r / 8); },
        [](double r) { return r * r * std::exp(-r * r / 2); },
        [](double r) { return (1 + r * r) * std::exp(-r * r / 4); },
        [](double r) { return std::exp(-(r - 2) * (r - 2)) * std::pow(r, 4) / (1 + std::pow(r, 4)); },
        [](double r) { return std::exp(-r * r); },
        [](double r) { return std::exp(-r * r / 4) * std::cos(r); },
        [](double r) { return std::pow(r, 4) * std::exp(-r * r / 2); },
        [](double r) { return std::exp(-2 * (r - 1) * (r - 1)); },
        [](double r) { return (1 + 0.5 * r * r) * std::exp(-r * r / 3); },
    };
    std::vector<RadialFunction> out;
    for (const auto& f : fs) out.push_back(RadialFunction::sample(g, f));
    return out;
}

double intertwine_residual(const Eigen::MatrixXcd& W, GridPtr g, const PotentialSpec& V, HamiltonianOptions opt)
{
    if (W.rows() != g->n || W.cols() != g->n) throw ConfigError("intertwine_residual: W shape differs from grid");
    const Hamiltonian H = build_hamiltonian(g, V, opt);
    const Hamiltonian H0 = build_hamiltonian(g, PotentialSpec::zero(), opt);
    double worst = 0;
    for (const RadialFunction& u : intertwine_test_set(g)) {
        const Eigen::VectorXcd h0u = H0.apply_u(u.v);
        const Eigen::VectorXcd res = H.apply_u(W * u.v) - W * h0u;
        const double nu = lp_norm(u, 2), nh = lp_norm({g, h0u}, 2);
        worst = std::max(worst, lp_norm({g, res}, 2) / std::sqrt(nu * nu + nh * nh));
    }
    return worst;
}

KApply born_remainder_k(GridPtr g, const PotentialSpec& V)
{
    check_potential_grid(V, *g);
    const Eigen::VectorXd v = V.sample(*g);
    const std::vector<int> S = potential_support(v);
    return [g, v, S](double l, const Eigen::VectorXcd& e) -> Eigen::VectorXcd {
        if (S.empty()) return Eigen::VectorXcd::Zero(g->n);
        const G0Factors f = g0_factors(l, *g);
        const SupportSolver ss(*g, v, S, f);
        if (ss.singular) throw SingularMatrixError("born_remainder_k: M(lambda) singular on supp V", 0.0);
        const Eigen::VectorXcd vc = v.cast<cplx>();
        const Eigen::VectorXcd y = f.apply(*g, vc.cwiseProduct(e));
        // (M^{-1} - 1) y = -G0 V M^{-1} y
        return -vc.cwiseProduct(ss.g0v_of_solution(y));
    };
}

namespace {

NodeVectors omega_nodes(const KApply& K, const CutoffPair& cut, const RadialGrid& g, const Rule& rule)
{
    const int m = g.m;
    const Eigen::VectorXcd mu = g.mu.cast<cplx>();
    return collect(rule, g.n, [&](double l, Eigen::VectorXcd& a, Eigen::VectorXcd& b) {
        const G0Factors f = g0_factors(l, g);
        const Eigen::VectorXcd e = uj_vector(f);
        a = cplx(0, kPi) * std::pow(l, m - 1) * cut.phi_tilde(l) * f.apply(g, K(l, e));
        b = cut.phi(l * l) * e.cwiseProduct(mu);
        return true;
    });
}

} // namespace

OmegaResult omega_low(const KApply& K, const CutoffPair& cut, GridPtr g, const EigenData& H, const LambdaQuadrature& q)
{
    cut.validate();
    require_same_grid(*H.grid, *g, "omega_low");
    LambdaQuadrature ql = q;
    ql.lambda0 = cut.lambda0;
    ql.lambda_max = cut.lambda0;
    if (!(ql.lambda_min < ql.lambda0)) ql.lambda_min = 1e-4 * ql.lambda0;
    const Rule r1 = ql.rule(), r2 = ql.doubled().rule();
    const NodeVectors n1 = omega_nodes(K, cut, *g, r1);
    const NodeVectors n2 = omega_nodes(K, cut, *g, r2);
    const Eigen::MatrixXcd phiH = spectral_function(H, [&](double E) { return cplx(cut.phi(E), 0); });
    const Eigen::MatrixXcd o1 = phiH * (n1.A * n1.B.transpose());
    const Eigen::MatrixXcd o2 = phiH * (n2.A * n2.B.transpose());
    const double ch = relative_change(o1, o2);
    gate(ch, "omega_low");
    return {ReducedKernel::from_op(g, o2), record_of(r2, n2, ch)};
}

double admissibility_score(const ReducedKernel& K)
{
    const Eigen::MatrixXd a = K.kernel().cwiseAbs();
    if (!a.allFinite()) throw NumericalError("admissibility_score: kernel is not finite");
    const Eigen::VectorXd& mu = K.grid->mu;
    const double rows = (a * mu).maxCoeff();
    const double cols = (a.transpose() * mu).maxCoeff();
    return std::max(rows, cols);
}

G0lBoundReport g0l_bound_check(const std::vector<double>& lambdas, int beta, GridPtr g, const std::vector<double>& ys,
                               const CutoffPair& cut, double eps)
{
    const int m = g->m;
    if (beta < 0 || 2 * beta > m + 2) throw DomainError("g0l_bound_check: beta must lie in 0..(m+2)/2");
    if (beta > 4) throw DomainError("g0l_bound_check: five-point stencils cover beta <= 4 only");
    for (double l : lambdas)
        if (!(l > 0 && l < cut.lambda0)) throw DomainError("g0l_bound_check: lambda must lie in (0, lambda0)");
    const Eigen::MatrixXcd phi0 = lowpass_kernel(cut, Lowpass::Free, g).kernel();
    // central stencils on lambda + k delta, k = -2..2
    static const double st[5][5] = {{0, 0, 1, 0, 0},
                                     {0, -0.5, 0, 0.5, 0},
                                     {0, 1, -2, 1, 0},
                                     {-0.5, 1, 0, -1, 0.5},
                                     {1, -4, 6, -4, 1}};
    const double wexp = beta + eps + 0.5 * m;
    G0lBoundReport rep;
    rep.lambdas = lambdas;
    rep.ys = ys;
    rep.beta = beta;
    rep.ratio.assign(lambdas.size(), std::vector<double>(ys.size(), 0.0));
    for (std::size_t jy = 0; jy < ys.size(); ++jy) {
        int col = 0;
        for (int j = 1; j < g->n; ++j)
            if (std::abs(g->r[j] - ys[jy]) < std::abs(g->r[col] - ys[jy])) col = j;
        const Eigen::VectorXcd src = phi0.col(col);
        const double y = g->r[col];
        for (std::size_t il = 0; il < lambdas.size(); ++il) {
            const double l = lambdas[il], d = 0.02 * l;
            Eigen::VectorXcd D = Eigen::VectorXcd::Zero(g->n);
            for (int k = -2; k <= 2; ++k) {
                const double c = st[beta][k + 2];
                if (c == 0) continue;
                const double lk = l + k * d;
                D += c * std::exp(cplx(0, -lk * y)) * g0_factors(lk, *g).apply(*g, src);
            }
            D /= std::pow(d, beta);
            double s = 0;
            for (int i = 0; i < g->n; ++i) s += g->mu[i] * std::norm(D[i]) * std::pow(japanese(g->r[i]), -2 * wexp);
            const double nrm = std::sqrt(g->sphere() * s);
            const double ref = std::pow(l, std::min(0.0, 0.5 * (m - 3) - beta)) * std::pow(japanese(y), -0.5 * (m - 1));
            rep.ratio[il][jy] = nrm / ref;
            rep.max_ratio = std::max(rep.max_ratio, rep.ratio[il][jy]);
        }
    }
    return rep;
}

} // namespace wavop
