#include "wavop/error.hpp"
#include "wavop/harmonic.hpp"

#include <fftw3.h>
#include <gsl/gsl_sf_dawson.h>

#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>

namespace wavop {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex mu;
    return mu;
}

// In-place unnormalized DFT of x (sign -1 forward, +1 backward).
void dft(Eigen::VectorXcd& x, int sign)
{
    const int n = int(x.size());
    auto* p = reinterpret_cast<fftw_complex*>(x.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_1d(n, p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
}

// Signed DFT index of slot q.
int signed_index(int q, int n)
{
    return q <= (n - 1) / 2 ? q : q - n;
}

// Multiply the spectrum of f by mult(xi) on the periodic grid.
Eigen::VectorXcd apply_multiplier(const Profile1D& f, const std::function<cplx(double)>& mult)
{
    Eigen::VectorXcd x = f.v;
    const int n = int(x.size());
    dft(x, -1);
    const double period = n * f.dx;
    for (int q = 0; q < n; ++q) {
        const int s = signed_index(q, n);
        // the Nyquist slot of an even length has no sign
        if (n % 2 == 0 && q == n / 2) x[q] = 0;
        else x[q] *= mult(2 * std::numbers::pi * s / period);
    }
    dft(x, +1);
    return x / double(n);
}

} // namespace

Profile1D hilbert(const Profile1D& f)
{
    const int n = f.size();
    Eigen::VectorXd gauss(n);
    for (int i = 0; i < n; ++i) gauss[i] = std::exp(-f.x(i) * f.x(i));
    const cplx c = f.v.sum() / gauss.sum();
    Profile1D rest = f;
    rest.v -= c * gauss.cast<cplx>();
    Profile1D out = f;
    out.v = apply_multiplier(rest, [](double xi) { return cplx(0, xi > 0 ? -1.0 : (xi < 0 ? 1.0 : 0.0)); });
    const double k = 2.0 / std::sqrt(std::numbers::pi);
    for (int i = 0; i < n; ++i) out.v[i] += c * k * gsl_sf_dawson(f.x(i));
    return out;
}

Profile1D hardy_max(const Profile1D& f)
{
    const int n = f.size();
    Eigen::VectorXd a = f.v.cwiseAbs();
    std::vector<double> P(n, 0.0); // trapezoid integral from x_0 to x_i
    for (int i = 1; i < n; ++i) P[i] = P[i - 1] + 0.5 * f.dx * (a[i - 1] + a[i]);
    std::vector<double> best(a.data(), a.data() + n);
    std::vector<double> suf(n);
    for (int lo = 0; lo < n; ++lo) {
        double run = a[lo];
        suf[n - 1] = 0;
        for (int hi = n - 1; hi > lo; --hi) {
            const double mean = (P[hi] - P[lo]) / ((hi - lo) * f.dx);
            run = hi == n - 1 ? mean : std::max(run, mean);
            suf[hi] = run;
        }
        double carry = a[lo];
        if (lo + 1 < n) carry = std::max(carry, suf[lo + 1]);
        best[lo] = std::max(best[lo], carry);
        for (int k = lo + 1; k < n; ++k) best[k] = std::max(best[k], suf[k]);
    }
    Profile1D out = f;
    for (int i = 0; i < n; ++i) out.v[i] = best[i];
    return out;
}

Rational Rational::parse(const std::string& s)
{
    Rational r;
    try {
        const auto slash = s.find('/');
        std::size_t used = 0;
        if (slash == std::string::npos) {
            r.num = std::stoll(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
        } else {
            const std::string a = s.substr(0, slash), b = s.substr(slash + 1);
            r.num = std::stoll(a, &used);
            if (used != a.size()) throw std::invalid_argument(s);
            r.den = std::stoll(b, &used);
            if (used != b.size()) throw std::invalid_argument(s);
        }
    } catch (const std::exception&) {
        throw ConfigError("rational: cannot parse '" + s + "'");
    }
    if (r.den == 0) throw ConfigError("rational: zero denominator");
    if (r.den < 0) {
        r.den = -r.den;
        r.num = -r.num;
    }
    const long long g = std::gcd(r.num < 0 ? -r.num : r.num, r.den);
    if (g > 1) {
        r.num /= g;
        r.den /= g;
    }
    return r;
}

bool ap_admissible(Rational a, Rational p)
{
    using i128 = __int128;
    if (a.den <= 0 || p.den <= 0) throw ConfigError("ap_admissible: denominators must be positive");
    if (!(i128(p.num) > i128(p.den))) throw DomainError("ap_admissible: p must exceed 1");
    const bool lower = i128(a.num) > -i128(a.den);                                      // a > -1
    const bool upper = i128(a.num) * p.den < (i128(p.num) - p.den) * i128(a.den);       // a < p - 1
    return lower && upper;
}

WeightReport weighted_opnorm_probe(OneDimOp op, Rational a, Rational p, WeightProbeOptions opt)
{
    WeightReport rep;
    rep.admissible = ap_admissible(a, p);
    rep.a = a.value();
    rep.p = p.value();
    const double av = rep.a, pv = rep.p;
    const Profile1D grid = Profile1D::zero(opt.L, opt.half);
    const int n = grid.size();
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        const double x = std::abs(grid.x(i));
        w[i] = x > 0 ? std::pow(x, av) : std::pow(0.5 * grid.dx, av) / (av + 1);
    }
    auto norm_p = [&](const Profile1D& g) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += std::pow(std::abs(g.v[i]), pv) * w[i];
        return s * grid.dx;
    };
    for (int e = opt.min_exp; e <= opt.max_exp; ++e) {
        const double th = std::ldexp(1.0, e);
        const Profile1D f = Profile1D::sample(opt.L, opt.half, [th](double x) { return cplx(std::exp(-th * th * x * x)); });
        const Profile1D g = op == OneDimOp::Hilbert ? hilbert(f) : hardy_max(f);
        double top = norm_p(g);
        if (opt.tail_completion) {
            // op f ~ C / |x| beyond the grid
            const double C = op == OneDimOp::Hilbert ? std::abs(f.integral()) / std::numbers::pi
                                                     : f.v.cwiseAbs().sum() * f.dx;
            const double ex = pv - 1 - av;
            top = ex > 0 ? top + 2 * std::pow(C, pv) * std::pow(opt.L, -ex) / ex : std::numeric_limits<double>::infinity();
        }
        const double ratio = std::pow(top / norm_p(f), 1.0 / pv);
        rep.thetas.push_back(th);
        rep.family_ratios.push_back(ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    return rep;
}

Profile1D k3_primitive(const Profile1D& M)
{
    const int h = M.half;
    auto g = [&](int k) -> cplx { // r M(r) at node k, odd in k, zero beyond the grid
        if (k > h || k < -h) return 0;
        return double(k) * M.dx * M.at(k);
    };
    std::vector<cplx> pos(h + 1, 0.0);
    for (int k = h - 1; k >= 0; --k)
        pos[k] = pos[k + 1] + M.dx / 24.0 * (-g(k - 1) + 13.0 * g(k) + 13.0 * g(k + 1) - g(k + 2));
    Profile1D F = M;
    for (int k = 0; k <= h; ++k) {
        F.v[h + k] = pos[k];
        F.v[h - k] = pos[k];
    }
    return F;
}

K3Report k3_identity(const Profile1D& M, int m, const CutoffPair& cut, double rho_max, double pad, KjkOptions opt)
{
    M.require_even("k3_identity");
    K3Report rep;
    const Profile1D F = k3_primitive(M);
    rep.f_at_zero = F.at(0).real();

    // zero-padded copy of F on the same spacing
    const int hp = std::max(M.half, int(std::ceil(pad / M.dx)));
    Profile1D Fp;
    Fp.dx = M.dx;
    Fp.half = hp;
    Fp.v = Eigen::VectorXcd::Zero(2 * hp + 1);
    for (int k = -M.half; k <= M.half; ++k) Fp.v[hp + k] = F.at(k);

    Profile1D P = Fp;
    P.v = apply_multiplier(Fp, [&](double xi) { return cplx(cut.phi_tilde(xi)); });
    const Profile1D HP = hilbert(P);

    const int nr = std::min(hp, int(std::floor(rho_max / M.dx + 1e-9))) + 1;
    const RhoProfile D = k3_direct(M, m, cut, (nr - 1) * M.dx, M.dx, opt);
    const double gm = std::tgamma(m - 2.0);
    const cplx pre = cplx(0, -std::numbers::pi) * gm * gm;
    rep.direct = D.v;
    rep.hilbert_route.resize(nr);
    for (int k = 0; k < nr; ++k) {
        rep.rho.push_back(k * M.dx);
        rep.hilbert_route[k] = pre * (P.v[hp + k] + cplx(0, 1) * HP.v[hp + k]);
    }
    const double nd = rep.direct.norm();
    const double diff = (rep.direct - rep.hilbert_route).norm();
    rep.residual = nd > 0 ? diff / nd : diff;
    return rep;
}

} // namespace wavop
