#include "doctest.h"

#include "wavop/error.hpp"
#include "wavop/harmonic.hpp"
#include "wavop/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace wavop;

namespace {

constexpr int m = 6;

Profile gauss(double a)
{
    return [a](double r) { return cplx(std::exp(-a * r * r)); };
}

double max_abs(const Eigen::VectorXcd& v)
{
    return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

double rel_max(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    return max_abs(a - b) / max_abs(b);
}

} // namespace

TEST_CASE("Profile1D basics")
{
    const Profile1D p = Profile1D::sample(4, 8, [](double x) { return cplx(x * x); });
    CHECK(p.size() == 17);
    CHECK(p.L() == 4);
    CHECK(p.x(0) == -4);
    CHECK(p.at(-8) == p.at(8));
    CHECK(p.even_defect() == 0);
    const Profile1D odd = Profile1D::sample(4, 8, [](double x) { return cplx(x); });
    CHECK(odd.even_defect() == doctest::Approx(8));
    CHECK_THROWS_AS(odd.require_even("test"), DomainError);
    CHECK_THROWS_AS(Profile1D::sample(4, 1, [](double) { return cplx(1); }), ConfigError);
}

TEST_CASE("spherical_average: zero input, evenness, odd first moment, both routes agree")
{
    auto g = make_grid(m, 20, 400);
    const RadialFunction u0 = RadialFunction::zero(g);
    const RadialFunction psi = RadialFunction::sample(g, gauss(0.7));
    CHECK(max_abs(spherical_average(psi, u0, 20, 200).v) == 0);
    CHECK(max_abs(spherical_average(gauss(0.7), [](double) { return cplx(0); }, m, 12, 120, 9).v) == 0);

    const Profile1D Mp = spherical_average(gauss(0.7), gauss(1.0), m, 12, 240, 9);
    CHECK(Mp.even_defect() <= 1e-14 * max_abs(Mp.v));
    // int r M(r) dr over the symmetric grid vanishes because M is even
    cplx first = 0, zeroth = 0;
    for (int i = 0; i < Mp.size(); ++i) {
        first += Mp.x(i) * Mp.v[i];
        zeroth += Mp.v[i];
    }
    CHECK(std::abs(first) <= 1e-12 * std::abs(zeroth));

    // conj(g) * u of two Gaussians is a Gaussian: exp(-ab/(a+b) r^2) (pi/(a+b))^{m/2}
    for (double r : {0.0, 0.5, 1.5}) {
        const int k = int(std::lround(r / Mp.dx));
        const double want = std::pow(std::numbers::pi / 1.7, m / 2.0) * std::exp(-0.7 / 1.7 * r * r);
        CHECK(std::abs(Mp.at(k) - want) <= 1e-8 * want);
    }

    // grid route against the profile route
    const RadialFunction u = RadialFunction::sample(g, gauss(1.0));
    const Profile1D Mg = spherical_average(psi, u, 12, 240);
    CHECK(rel_max(Mg.v, Mp.v) <= 1e-4);
}

TEST_CASE("spherical_average: int <r>|M| against ||u||_p over a dilation family")
{
    // u_theta = exp(-theta^2 r^2), psi fixed; p = 2.5 lies in (m/(m-2), m/2)
    const double p = 2.5;
    std::vector<double> ratios;
    for (int e = -2; e <= 2; ++e) {
        const double th = std::ldexp(1.0, e);
        const Profile1D M = spherical_average(gauss(1.0), gauss(th * th), m, 30, 300, 25);
        double mass = 0;
        for (int i = 0; i < M.size(); ++i) mass += japanese(M.x(i)) * std::abs(M.v[i]);
        mass *= M.dx / 2; // half line
        // ||exp(-theta^2|x|^2)||_p = (pi / (p theta^2))^{m/(2p)}
        const double up = std::pow(std::numbers::pi / (p * th * th), m / (2 * p));
        ratios.push_back(mass / up);
    }
    double top = 0;
    for (double x : ratios) {
        CHECK(std::isfinite(x));
        top = std::max(top, x);
    }
    // no growth toward either end of the family
    CHECK(ratios.front() < top);
    CHECK(ratios.back() < top);
}

TEST_CASE("pairing constants")
{
    CHECK(pairing_constant(6) == doctest::Approx(-1.0 / 24).epsilon(1e-14));
    CHECK(pairing_constant_quoted(6) == doctest::Approx(-1.0 / 3).epsilon(1e-14));
    CHECK(pairing_constant(4) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(pairing_constant_quoted(4) == doctest::Approx(-1.0).epsilon(1e-14));
    // the two agree up to the factor 2^{(m-4)/2} (m-2)
    for (int mm : {4, 6, 8, 10})
        CHECK(pairing_constant_quoted(mm) / pairing_constant(mm) ==
              doctest::Approx(std::pow(2.0, (mm - 4) / 2.0) * (mm - 2)).epsilon(1e-13));
}

TEST_CASE("branch_rule and half_power")
{
    // int t^alpha e^{-t} dt = Gamma(alpha + 1)
    for (double a : {0.5, 1.5, 2.5}) {
        const Rule r = branch_rule(a);
        double s = 0;
        for (std::size_t i = 0; i < r.size(); ++i) s += r.w[i];
        CHECK(s == doctest::Approx(std::tgamma(a + 1)).epsilon(1e-10));
    }
    const cplx z(0.3, 2.0);
    CHECK(std::abs(half_power(z, 1.5) - std::pow(z, 1.5)) <= 1e-14);
    CHECK(std::abs(half_power(z, 0.5) - std::sqrt(z)) <= 1e-15);
}

TEST_CASE("pairing: zero inputs, oracle, linearity, conjugation")
{
    auto g = make_grid(m, 20, 400);
    const RadialFunction zero = RadialFunction::zero(g);
    const RadialFunction a = RadialFunction::sample(g, gauss(1.0)), b = RadialFunction::sample(g, gauss(0.6));
    CHECK(pairing(a, zero, 0.4) == cplx(0));
    CHECK(pairing(zero, a, 0.4) == cplx(0));
    CHECK(pairing_oracle(a, zero, 0.4) == cplx(0));

    for (double l : {0.05, 0.4, 1.5}) {
        const Profile1D M = spherical_average(gauss(0.6), gauss(1.0), m, 12, 240, 9);
        const cplx lhs = pairing_oracle(b, a, l), rhs = pairing(M, l, m);
        CHECK(std::abs(rhs - lhs) <= 1e-5 * std::abs(lhs));
    }

    // linear in each argument
    const Profile ps = [](double r) { return cplx(std::exp(-r * r), 0.3 * std::exp(-2 * r * r)); };
    const Profile u1 = gauss(0.8), u2 = [](double r) { return cplx(r * r * std::exp(-r * r)); };
    const cplx c1(0.7, -0.2), c2(-1.1, 0.4);
    const Profile mix = [&](double r) { return c1 * u1(r) + c2 * u2(r); };
    const double l = 0.6;
    const auto P = [&](const Profile& x, const Profile& y, double lam) {
        return pairing(spherical_average(x, y, m, 12, 240, 9), lam, m);
    };
    const cplx lin = P(ps, mix, l), parts = c1 * P(ps, u1, l) + c2 * P(ps, u2, l);
    CHECK(std::abs(lin - parts) <= 1e-10 * std::abs(lin));
    // antilinear in the first slot
    const Profile smix = [&](double r) { return c1 * ps(r) + c2 * u2(r); };
    const cplx alin = P(smix, u1, l), aparts = std::conj(c1) * P(ps, u1, l) + std::conj(c2) * P(u2, u1, l);
    CHECK(std::abs(alin - aparts) <= 1e-10 * std::abs(alin));

    // conjugating both arguments conjugates the value at -lambda
    const Profile cps = [&](double r) { return std::conj(ps(r)); };
    const Profile cu = [&](double r) { return std::conj(mix(r)); };
    CHECK(std::abs(P(cps, cu, -l) - std::conj(P(ps, mix, l))) <= 1e-10 * std::abs(P(ps, mix, l)));
    CHECK_THROWS_AS(pairing(Profile1D::zero(4, 8), 0.5, 5), ConfigError);
}

TEST_CASE("K_jk: index range, zero profile, evenness, small-rho bound")
{
    const CutoffPair cut;
    CHECK(kjk_max_index(6) == 1);
    CHECK(kjk_max_index(8) == 2);
    CHECK_THROWS_AS(c_jk(6, 2, 0), DomainError);

    KjkOptions fast;
    fast.lambda_nodes = 32;
    const Profile1D zero = Profile1D::zero(12, 120);
    for (auto [j, k] : {std::pair{0, 0}, std::pair{1, 1}, std::pair{0, 1}})
        CHECK(max_abs(kjk(zero, j, k, m, cut, 3, 0.5, fast).values.v) == 0);
    CHECK_THROWS_AS(kjk(zero, 2, 0, m, cut, 3, 0.5, fast), DomainError);

    // only M on r >= 0 enters: rebuilding the negative half from the positive half changes nothing
    const Profile1D M = spherical_average(gauss(0.7), gauss(1.0), m, 12, 120, 9);
    Profile1D mirror = M;
    for (int k = 1; k <= M.half; ++k) mirror.v[M.half - k] = M.v[M.half + k];
    const Eigen::VectorXcd a = kjk(M, 1, 1, m, cut, 3, 0.5, fast).values.v;
    const Eigen::VectorXcd b = kjk(mirror, 1, 1, m, cut, 3, 0.5, fast).values.v;
    CHECK(max_abs(a - b) <= 1e-10 * max_abs(a));
    Profile1D odd = M;
    odd.v[0] += 1e-3 * max_abs(M.v);
    CHECK_THROWS_AS(kjk(odd, 1, 1, m, cut, 3, 0.5, fast), DomainError);

    // |K_11 u(rho)| <= C int |r M| dr on rho <= 1, with C the same across a dilation family
    std::vector<double> ratio;
    for (double th : {0.5, 1.0, 2.0}) {
        const Profile1D Mt = spherical_average(gauss(0.7), gauss(th * th), m, 16, 160, 12);
        double rm = 0;
        for (int i = 0; i < Mt.size(); ++i) rm += std::abs(Mt.x(i) * Mt.v[i]);
        rm *= Mt.dx;
        ratio.push_back(max_abs(kjk(Mt, 1, 1, m, cut, 1, 0.25, fast).values.v) / rm);
    }
    for (double x : ratio) CHECK(std::isfinite(x));
    const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
    CHECK(*hi <= 10 * *lo);
}

TEST_CASE("K_00 split assembles K_00 and K3 matches its direct quadrature")
{
    const CutoffPair cut;
    KjkOptions fast;
    fast.lambda_nodes = 32;
    const Profile1D M = spherical_average(gauss(0.7), gauss(1.0), m, 12, 120, 9);
    const K00Split s = k00_split(M, m, cut, 3, 0.5, fast);
    const Eigen::VectorXcd sum = s.k1.v + s.k2.v + s.k3.v;
    const Eigen::VectorXcd whole = kjk(M, 0, 0, m, cut, 3, 0.5, fast).values.v;
    CHECK(max_abs(sum - whole) <= 1e-12 * max_abs(whole));
    CHECK(rel_max(k3_direct(M, m, cut, 3, 0.5, fast).v, s.k3.v) <= 1e-12);
}

TEST_CASE("T_jk: finite values, index errors, boundary piece")
{
    const CutoffPair cut;
    for (double rho : {0.0, 1.0, 5.0})
        for (double r : {0.0, 2.0, 7.0}) CHECK(std::isfinite(std::abs(tjk_reduced(rho, r, 1, 1, m, cut))));
    CHECK(tjk(0, 3, 1, 1, m, cut) == cplx(0)); // rho^j prefactor
    CHECK(tjk(2, 0, 1, 1, m, cut) == cplx(0)); // r^{k+1} prefactor
    CHECK(std::abs(tjk(2, 3, 1, 1, m, cut) - 2.0 * 9.0 * tjk_reduced(2, 3, 1, 1, m, cut)) <=
          1e-12 * std::abs(tjk(2, 3, 1, 1, m, cut)));
    CHECK_THROWS_AS(tjk_reduced(1, 1, 0, 0, m, cut), DomainError);
    CHECK_THROWS_AS(tjk_reduced(-1, 1, 1, 1, m, cut), DomainError);
    CHECK_THROWS_AS(tjk_bound_check(0, 1, m, cut, 10, 2, TjkBound::Main), DomainError);
    CHECK_THROWS_AS(tjk_bound_check(1, 1, m, cut, 10, 2, TjkBound::T01), DomainError);

    const TjkBoundReport rep = tjk_bound_check(1, 1, m, cut, 10, 2);
    CHECK(rep.finite);
    CHECK(std::isfinite(rep.max_ratio));
    CHECK(rep.max_ratio > 0);
}

TEST_CASE("hilbert: zero, classical pair, H H = -I")
{
    CHECK(max_abs(hilbert(Profile1D::zero(32, 256)).v) == 0);

    const Profile1D f = Profile1D::sample(2048, 16384, [](double x) { return cplx(1 / (1 + x * x)); });
    const Profile1D h = hilbert(f);
    // relative error away from x = 0, absolute at x = 0
    CHECK(std::abs(h.at(0)) <= 1e-4);
    double worst = 0;
    for (int i = 0; i < h.size(); ++i) {
        const double x = h.x(i);
        if (x == 0 || std::abs(x) > h.L() / 2) continue;
        const double want = x / (1 + x * x);
        worst = std::max(worst, std::abs(h.v[i] - want) / std::abs(want));
    }
    CHECK(worst <= 1e-4);

    // mean-zero, effectively band-limited: x exp(-x^2), exp(-x^2) cos(3x) - its mean
    const Profile1D odd = Profile1D::sample(40, 1024, [](double x) { return cplx(x * std::exp(-x * x)); });
    CHECK(rel_max(hilbert(hilbert(odd)).v, -odd.v) <= 1e-6);
    const double mean = std::sqrt(std::numbers::pi) * std::exp(-9.0 / 4);
    const Profile1D wav = Profile1D::sample(40, 1024, [&](double x) {
        return cplx(std::exp(-x * x) * std::cos(3 * x) - mean * std::exp(-x * x / 4) / (2 * std::sqrt(std::numbers::pi)));
    });
    CHECK(std::abs(wav.integral()) <= 1e-10);
    CHECK(rel_max(hilbert(hilbert(wav)).v, -wav.v) <= 1e-6);
}

TEST_CASE("hardy_max: constants, indicator, domination, homogeneity")
{
    const Profile1D c = Profile1D::sample(5, 50, [](double) { return cplx(2.5); });
    CHECK(rel_max(hardy_max(c).v, c.v) <= 1e-14);

    const double dx = 1e-3;
    const Profile1D ind = Profile1D::sample(4, 4000, [](double x) { return cplx(x >= 0 && x <= 1 ? 1 : 0); });
    const Profile1D h = hardy_max(ind);
    double worst = 0;
    for (int i = 0; i < h.size(); ++i) {
        const double x = h.x(i);
        if (x <= 1 + dx / 2) continue;
        worst = std::max(worst, std::abs(h.v[i].real() * x - 1));
    }
    CHECK(worst <= 1e-3);
    CHECK(h.at(500).real() == doctest::Approx(1).epsilon(1e-14)); // inside the support

    std::mt19937_64 rng(3);
    std::normal_distribution<double> N01;
    const Profile1D f = Profile1D::sample(3, 60, [&](double) { return cplx(N01(rng), N01(rng)); });
    const Profile1D mf = hardy_max(f);
    for (int i = 0; i < f.size(); ++i) {
        CHECK(mf.v[i].real() >= std::abs(f.v[i]) - 1e-12);
        CHECK(mf.v[i].imag() == 0);
    }
    Profile1D scaled = f;
    scaled.v *= cplx(-1.5, 2.0);
    CHECK(rel_max(hardy_max(scaled).v, 2.5 * mf.v) <= 1e-12);
}

TEST_CASE("Rational and ap_admissible")
{
    const Rational r = Rational::parse("3/2");
    CHECK(r.num == 3);
    CHECK(r.den == 2);
    CHECK(Rational::parse("-1").value() == -1);
    CHECK(Rational::parse("0").value() == 0);
    CHECK_THROWS_AS(Rational::parse("x"), ConfigError);
    CHECK_THROWS_AS(Rational::parse("1/0"), ConfigError);

    CHECK(ap_admissible(Rational::parse("0"), Rational::parse("2")));
    CHECK(!ap_admissible(Rational::parse("1"), Rational::parse("2")));
    CHECK(ap_admissible(Rational::parse("3/2"), Rational::parse("3")));
    CHECK(!ap_admissible(Rational::parse("-1"), Rational::parse("2")));
    CHECK(ap_admissible(Rational::parse("-999999999/1000000000"), Rational::parse("2")));
    // a = p - 1 exactly, with numbers that collide in double precision
    CHECK(!ap_admissible(Rational::parse("3000000000000001/3000000000000000"),
                         Rational::parse("6000000000000001/3000000000000000")));
    CHECK(ap_admissible(Rational::parse("3000000000000000/3000000000000001"),
                        Rational::parse("6000000000000001/3000000000000000")));
    CHECK_THROWS_AS(ap_admissible(Rational::parse("0"), Rational::parse("1")), DomainError);
    CHECK_THROWS_AS(ap_admissible(Rational::parse("0"), Rational::parse("1/2")), DomainError);
}

TEST_CASE("weighted_opnorm_probe: report fields")
{
    WeightProbeOptions o;
    o.half = 1024;
    o.L = 64;
    o.min_exp = -2;
    o.max_exp = 2;
    const WeightReport w = weighted_opnorm_probe(OneDimOp::Hilbert, Rational::parse("0"), Rational::parse("2"), o);
    CHECK(w.admissible);
    CHECK(w.thetas.size() == 5);
    CHECK(w.family_ratios.size() == 5);
    // H is an isometry of L^2
    for (double x : w.family_ratios) CHECK(x == doctest::Approx(1).epsilon(1e-2));
    const WeightReport mx = weighted_opnorm_probe(OneDimOp::Max, Rational::parse("1"), Rational::parse("2"), o);
    CHECK(!mx.admissible);
    for (double x : mx.family_ratios) CHECK(x >= 1);
}

TEST_CASE("K3: primitive, zero input, two-route identity")
{
    const Profile1D M = spherical_average(gauss(0.7), gauss(1.0), m, 12, 240, 9);
    const Profile1D F = k3_primitive(M);
    // F(0) = int_0^inf r M dr, F even, F vanishes at the edge
    // M = (pi/1.7)^3 exp(-(0.7/1.7) r^2), so F(0) = (pi/1.7)^3 / (2 * 0.7/1.7)
    const double f0 = std::pow(std::numbers::pi / 1.7, 3) / (1.4 / 1.7);
    CHECK(F.at(0).real() == doctest::Approx(f0).epsilon(1e-6));
    CHECK(F.even_defect() <= 1e-14 * max_abs(F.v));
    CHECK(std::abs(F.at(F.half)) <= 1e-14);

    const CutoffPair cut;
    const K3Report z = k3_identity(Profile1D::zero(12, 240), m, cut);
    CHECK(max_abs(z.direct) == 0);
    CHECK(max_abs(z.hilbert_route) == 0);
    CHECK(z.residual == 0);

    const K3Report r = k3_identity(M, m, cut);
    CHECK(r.residual <= 1e-4);
    CHECK(r.f_at_zero == doctest::Approx(F.at(0).real()).epsilon(1e-12));
}

TEST_CASE("W_jk: zero input, decay test, assembly is the C_jk sum")
{
    auto g = make_grid(m, 10, 100);
    const CutoffPair cut;
    WjkOptions o;
    o.drho = 0.1;
    o.kjk.lambda_nodes = 32;
    const RadialFunction f = RadialFunction::sample(g, gauss(1.0));
    CHECK(max_abs(wjk_apply(f, f, RadialFunction::zero(g), 1, 1, cut, o).v) == 0);

    CHECK(decay_test(f));
    const RadialFunction slow = RadialFunction::sample(g, [](double r) { return cplx(std::pow(1 + r * r, -1.0)); });
    CHECK(!decay_test(slow));
    CHECK_THROWS_AS(wjk_apply(slow, f, f, 1, 1, cut, o), ConfigError);
    CHECK_THROWS_AS(wjk_apply(f, slow, f, 1, 1, cut, o), ConfigError);

    const Profile1D M = spherical_average(gauss(1.0), gauss(0.5), m, 20, 200, 12);
    const RadialFunction total = wsm_assembly(f, M, cut, o);
    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(g->n);
    for (int j = 0; j <= kjk_max_index(m); ++j)
        for (int k = 0; k <= kjk_max_index(m); ++k) sum += c_jk(m, j, k) * wjk_apply(f, M, j, k, cut, o).v;
    CHECK(rel_max(total.v, sum) <= 1e-10);
}
