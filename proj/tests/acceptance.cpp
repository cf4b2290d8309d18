// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero when a hard
// criterion fails; criterion 15 is soft and only reported.

#include "wavop/dispersive.hpp"
#include "wavop/harmonic.hpp"
#include "wavop/inversion.hpp"
#include "wavop/parallel.hpp"
#include "wavop/resolvent.hpp"
#include "wavop/spectral.hpp"
#include "wavop/waveop.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace wavop;

namespace {

// pinned tolerances
constexpr double kTolHankel = 1e-6;
constexpr double kTolStatic = 1e-8;
constexpr double kSlopeTarget = 4.0, kSlopeBand = 0.3;
constexpr double kTolFeshbach = 1e-10;
constexpr double kTolZeroMode = 1e-3;
constexpr double kTolSingularFit = 0.05, kTolGenericCoef = 1e-3;
constexpr double kTolWIdentity = 1e-8, kTolOracle = 1e-2, kTolIsometry = 1e-3;
constexpr double kHalvingLo = 0.5 * 0.7, kHalvingHi = 0.5 * 1.3;
constexpr double kBandFree = 0.02, kBandGeneric = 0.15, kBandL2 = 0.01;
constexpr double kTolPairing = 1e-5;
constexpr double kTolK3 = 1e-4;
constexpr double kTolGridStable = 0.10, kTolSlopeFit = 0.1;
constexpr double kBoundedRatio = 10.0, kGrowth = 10.0;
constexpr double kTolZ = 1e-3;
constexpr double kVariationMax = 5.0, kVariationMin = 10.0;
constexpr double kTolScoreStable = 0.10;

const double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = false;
    std::string detail;
};

int hard_failures = 0;

std::string fmt(const char* f, auto... a)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

void run(int id, const char* title, bool soft, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.pass ? "PASS" : (soft ? "SOFT-FAIL" : "FAIL");
    std::printf("C%02d %-9s %s: %s [%.1fs]\n", id, tag, title, o.detail.c_str(), dt);
    std::fflush(stdout);
    if (!o.pass && !soft) ++hard_failures;
}

cplx hankel_oracle(double lambda, double rho, int m)
{
    const int nu = (m - 2) / 2;
    const cplx H(std::cyl_bessel_j(nu, lambda * rho), std::cyl_neumann(nu, lambda * rho));
    return cplx(0, 0.25) * std::pow(lambda / (2 * std::numbers::pi * rho), 0.5 * (m - 2)) * H;
}

// independent piecewise table: every region containing (k, l) must give the library value
bool sigma0_matches(double k, double l, int m, std::string& why)
{
    const double s = sigma0(k, l, m);
    int regions = 0;
    auto check = [&](bool in, double v, const char* name) {
        if (!in) return true;
        ++regions;
        if (v != s) {
            why = fmt("(%g,%g) %s gives %g, library %g", k, l, name, v, s);
            return false;
        }
        return true;
    };
    const double h = 0.5 * (m - 1);
    bool ok = check(l <= k && k + l <= m - 1, 0.5 * (k + l + 1), "D1");
    ok = ok && check(k <= h && l >= k, l + 0.5, "D2");
    ok = ok && check(k + l >= m - 1 && k >= h && k <= m - 1, k + l - 0.5 * (m - 2), "D3");
    if (ok && regions == 0) {
        why = fmt("(%g,%g) lies in no region", k, l);
        return false;
    }
    return ok;
}

double rel_l2(const RadialFunction& a, const RadialFunction& b)
{
    return lp_norm({a.grid, a.v - b.v}, 2) / lp_norm(b, 2);
}

} // namespace

int main()
{
    set_threads(configured_threads());
    std::printf("acceptance: m = 6, %d thread(s)\n", current_threads());
    const int m = 6;
    const CutoffPair cut{};

    run(1, "free-resolvent Hankel oracle", false, [&] {
        double worst = 0;
        int count = 0;
        for (double l : {0.1, 0.5, 1.0, 2.0, 5.0})
            for (double r : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
                const cplx o = hankel_oracle(l, r, m);
                worst = std::max(worst, std::abs(g0_point(l, r, m) - o) / std::abs(o));
                ++count;
            }
        return Outcome{count == 30 && worst <= kTolHankel,
                       fmt("%d points, max rel err %.2e (tol %.0e)", count, worst, kTolHankel)};
    });

    run(2, "static limit g0(0,1,6) = 1/(4 pi^3)", false, [&] {
        const double want = 1.0 / (4 * std::pow(std::numbers::pi, 3));
        const double err = std::abs(g0_point(0, 1, m) - want) / want;
        return Outcome{err <= kTolStatic, fmt("rel err %.2e (tol %.0e)", err, kTolStatic)};
    });

    run(3, "sigma0 table", false, [&] {
        std::string why;
        for (int k = 0; k <= 5; ++k)
            for (int l = 0; l <= 6; ++l)
                if (!sigma0_matches(k, l, m, why)) return Outcome{false, why};
        for (int j = 0; j <= 6; ++j)
            if (sigma0(5, j, m) != j + 3) return Outcome{false, fmt("sigma0(5,%d) = %g", j, sigma0(5, j, m))};
        return Outcome{true, "42 lattice points exact, sigma0(5,j) = j+3 for j = 0..6"};
    });

    run(4, "expansion remainder exponent", false, [&] {
        const auto rep = expansion_check(make_grid(m, 40, 300), logspace(1e-3, 1e-1, 9));
        const double e = rep.fitted_exponent;
        return Outcome{std::abs(e - kSlopeTarget) <= kSlopeBand,
                       fmt("fitted exponent %.3f (want %.1f +- %.1f)", e, kSlopeTarget, kSlopeBand)};
    });

    run(5, "Feshbach inverse vs direct", false, [&] {
        std::mt19937_64 rng(20240601);
        std::normal_distribution<double> N01;
        double worst = 0;
        for (int it = 0; it < 100; ++it) {
            Eigen::MatrixXcd L(20, 20), A(20, 20);
            for (int i = 0; i < 20; ++i)
                for (int j = 0; j < 20; ++j) {
                    L(i, j) = cplx(N01(rng), N01(rng));
                    A(i, j) = cplx(N01(rng), N01(rng));
                }
            L += 8.0 * Eigen::MatrixXcd::Identity(20, 20);
            const Eigen::MatrixXcd T = Eigen::HouseholderQR<Eigen::MatrixXcd>(A).householderQ();
            const auto F = feshbach_decompose(L, T, 1 + it % 19);
            worst = std::max(worst, (feshbach_invert(F) - L.inverse()).cwiseAbs().maxCoeff());
        }
        return Outcome{worst <= kTolFeshbach, fmt("100 splits, max elementwise err %.2e (tol %.0e)", worst, kTolFeshbach)};
    });

    // classification grid: spacing 1/60 puts the discrete zero mode inside the default e_tol
    const GridPtr gc = make_grid(m, 10, 600);
    const HamiltonianOptions cls_opt{Scheme::Conservative, OuterBoundary::ZeroEnergyRobin};
    const PotentialSpec Vexc = make_exceptional_potential(m);

    run(6, "classification", false, [&] {
        const auto c0 = classify(build_hamiltonian(gc, PotentialSpec::zero(), cls_opt));
        const auto ce = classify(build_hamiltonian(gc, Vexc, cls_opt));
        if (c0.kind != ThresholdClassification::Kind::Generic) return Outcome{false, "V = 0 not generic"};
        if (ce.kind != ThresholdClassification::Kind::Exceptional || ce.d != 1)
            return Outcome{false, fmt("V_exc: d = %d", ce.d)};
        const RadialFunction phi = RadialFunction::sample(gc, [](double r) { return cplx(exceptional_phi(r)); });
        RadialFunction b{gc, ce.basis.col(0).cast<cplx>()};
        const cplx a = weighted_l2_inner(b, phi) / weighted_l2_inner(b, b);
        b.v *= a;
        const double err = rel_l2(b, phi);
        return Outcome{err <= kTolZeroMode,
                       fmt("V=0 generic; V_exc exceptional d=1, E=%.2e, phi rel L2 err %.2e (tol %.0e)",
                           ce.energies[0], err, kTolZeroMode)};
    });

    run(7, "singular fit", false, [&] {
        const auto ce = classify(build_hamiltonian(gc, Vexc, cls_opt));
        const auto sf = singular_fit(gc, Vexc, singular_fit_ladder(), ce);
        const PotentialSpec Vg = PotentialSpec::gaussian(-0.5, 1.0);
        const auto cg = classify(build_hamiltonian(gc, Vg, cls_opt));
        const auto sg = singular_fit(gc, Vg, singular_fit_ladder(), cg);
        const double ratio = sg.coefficient_norm / sg.v_norm;
        const bool ok = sf.relative_error <= kTolSingularFit && ratio <= kTolGenericCoef &&
                        cg.kind == ThresholdClassification::Kind::Generic;
        return Outcome{ok, fmt("exceptional ||fit - P0V||/||P0V|| = %.4f (tol %.2f), rank %d; generic coef/||V|| = %.2e "
                               "(tol %.0e)",
                               sf.relative_error, kTolSingularFit, sf.numerical_rank, ratio, kTolGenericCoef)};
    });

    run(8, "wave operator", false, [&] {
        const GridPtr g = make_grid(m, 40, 300);
        const int n = g->n;
        const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
        const PotentialSpec V0 = PotentialSpec::zero();
        // L^2 operator norms of W - I
        auto l2 = [&](const Eigen::MatrixXcd& A) { return weighted_opnorm_op(A, *g, 0, 0); };
        const double born0 = l2(born_term(1, g, V0).matrix);
        const double stat0 = l2(stationary_w(g, V0, cut).total - I);
        double td0 = 0;
        for (const auto& W : time_dependent_w(g, V0, {-5.0, -10.0}).matrices) td0 = std::max(td0, l2(W - I));
        const double id_err = std::max({born0, stat0, td0});

        const PotentialSpec V = PotentialSpec::gaussian(-0.5, 1.0);
        const auto tests = intertwine_test_set(g);
        Eigen::MatrixXcd U(n, 5);
        for (int k = 0; k < 5; ++k) U.col(k) = tests[k].v;
        const Eigen::MatrixXcd WU = stationary_w_apply(g, V, U);
        // time-dependent oracle on a box 8x larger with the same spacing
        const int nb = 8 * n;
        const GridPtr gb = make_grid(m, 8 * g->rmax, nb);
        const PropagatorOracle P = PropagatorOracle::build(gb, V);
        double oracle = 0, iso = 0;
        for (int k = 0; k < 5; ++k) {
            Eigen::VectorXcd u = Eigen::VectorXcd::Zero(nb);
            u.head(n) = U.col(k);
            const RadialFunction w{g, P.wave(u, -40.0).head(n)};
            const RadialFunction ws{g, WU.col(k)};
            oracle = std::max(oracle, rel_l2(ws, w));
            iso = std::max(iso, std::abs(lp_norm(ws, 2) / lp_norm(tests[k], 2) - 1));
        }
        std::vector<double> res;
        for (int N : {300, 600}) {
            const GridPtr gi = make_grid(m, 20, N);
            res.push_back(intertwine_residual(stationary_w_apply(gi, V, Eigen::MatrixXcd::Identity(N, N)), gi, V));
        }
        const double halving = res[1] / res[0];
        const bool ok = id_err <= kTolWIdentity && oracle <= kTolOracle && iso <= kTolIsometry &&
                        halving >= kHalvingLo && halving <= kHalvingHi;
        return Outcome{ok, fmt("V=0 ||W-I|| %.1e (tol %.0e); stationary vs t=-40 %.2e (tol %.0e); isometry %.1e (tol %.0e); "
                               "intertwining ratio %.3f (want %.2f..%.2f)",
                               id_err, kTolWIdentity, oracle, kTolOracle, iso, kTolIsometry, halving, kHalvingLo,
                               kHalvingHi)};
    });

    run(9, "dispersive slopes", false, [&] {
        const GridPtr g = make_grid(m, 400, 3000);
        const RadialFunction u0 = RadialFunction::sample(g, [](double r) { return std::exp(-r * r / 2); });
        const auto times = logspace(5, 50, 11);
        const auto P0 = PropagatorOracle::build(g, PotentialSpec::zero());
        const auto P = PropagatorOracle::build(g, PotentialSpec::gaussian(-0.5, 1.0));
        const double sf = decay_scan(P0, u0, kInf, times).fitted_slope;
        const double sg = decay_scan(P, u0, kInf, times).fitted_slope;
        const double s2 = decay_scan(P, u0, 2, times).fitted_slope;
        const bool ok = std::abs(sf + 3) <= kBandFree && std::abs(sg + 3) <= kBandGeneric && std::abs(s2) <= kBandL2;
        return Outcome{ok, fmt("free p=inf %.4f (-3 +- %.2f); generic p=inf %.4f (-3 +- %.2f); p=2 %.1e (0 +- %.2f)", sf,
                               kBandFree, sg, kBandGeneric, s2, kBandL2)};
    });

    run(10, "pairing identity", false, [&] {
        const GridPtr g = make_grid(m, 20, 400);
        const double triples[10][3] = {{1, 1, 0.1},   {1, 1, 0.5},   {0.5, 1, 0.3}, {2, 0.7, 1}, {1, 2, 0.05},
                                       {0.8, 0.8, 2}, {1.5, 0.5, 0.7}, {1, 1, 0.01}, {0.6, 1.3, 1.5}, {1, 0.5, 3}};
        double worst = 0;
        for (const auto& t : triples) {
            const double a = t[0], b = t[1], l = t[2];
            const Profile psi = [a](double r) { return cplx(std::exp(-a * r * r) * (1 + 0.3 * r * r)); };
            const Profile u = [b](double r) { return cplx(std::exp(-b * r * r)); };
            const Profile1D M = spherical_average(psi, u, m, 12, 240, 9);
            const cplx lhs = pairing_oracle(RadialFunction::sample(g, psi), RadialFunction::sample(g, u), l);
            const cplx rhs = pairing(M, l, m);
            worst = std::max(worst, std::abs(rhs - lhs) / std::abs(lhs));
        }
        return Outcome{worst <= kTolPairing, fmt("10 triples, max rel err %.2e (tol %.0e)", worst, kTolPairing)};
    });

    run(11, "K3 Hilbert identity", false, [&] {
        const std::vector<std::function<cplx(double)>> inputs = {
            [](double r) { return cplx(std::exp(-0.5 * r * r), 0.2 * std::exp(-r * r)); },
            [](double r) { return cplx(std::exp(-r * r), 0.2 * std::exp(-r * r)); },
            [](double r) { return cplx(std::exp(-2 * r * r), 0.2 * std::exp(-r * r)); },
            [](double r) { return cplx((1 + r * r) * std::exp(-r * r)); },
            [](double r) { return cplx(std::cos(r) * std::exp(-0.7 * r * r), -0.3 * std::exp(-1.5 * r * r)); }};
        double worst = 0;
        for (const auto& f : inputs) worst = std::max(worst, k3_identity(Profile1D::sample(12, 240, f), m, cut).residual);
        return Outcome{worst <= kTolK3, fmt("5 inputs, max relative residual %.2e (tol %.0e)", worst, kTolK3)};
    });

    run(12, "T_jk bound scan", false, [&] {
        const auto a1 = tjk_bound_check(1, 1, m, cut, 50, 2.0, TjkBound::Main);
        const auto b1 = tjk_bound_check(1, 1, m, cut, 50, 1.0, TjkBound::Main);
        const auto a2 = tjk_bound_check(0, 1, m, cut, 50, 2.0, TjkBound::T01);
        const auto b2 = tjk_bound_check(0, 1, m, cut, 50, 1.0, TjkBound::T01);
        const double s1 = std::abs(b1.max_ratio / a1.max_ratio - 1), s2 = std::abs(b2.max_ratio / a2.max_ratio - 1);
        // leading power of the boundary piece on |rho - r| >> 1: rho^j r^{k+1} / (r - rho)^{j+k}
        KjkOptions fine;
        fine.lambda_nodes = 512;
        double slope_dev = 0;
        for (auto [j, k] : {std::pair{1, 1}, std::pair{0, 1}}) {
            std::vector<double> d, along_r, along_rho;
            for (int i = 0; i < 10; ++i) {
                d.push_back(150 * std::pow(10.0, i / 9.0));
                along_r.push_back(std::abs(tjk_boundary_piece(1, 1 + d.back(), j, k, m, cut, fine)));
                along_rho.push_back(std::abs(tjk_boundary_piece(1 + d.back(), 1, j, k, m, cut, fine)));
            }
            slope_dev = std::max(slope_dev, std::abs(loglog_slope(d, along_r) - (1 - j)));
            slope_dev = std::max(slope_dev, std::abs(loglog_slope(d, along_rho) + k));
        }
        const bool ok = a1.finite && b1.finite && a2.finite && b2.finite && s1 <= kTolGridStable &&
                        s2 <= kTolGridStable && slope_dev <= kTolSlopeFit;
        return Outcome{ok, fmt("T11 max %.3f/%.3f (step 2/1, change %.1f%%), T01 max %.3f/%.3f (change %.1f%%), all finite; "
                               "boundary-piece slope deviation %.3f (tol %.1f)",
                               a1.max_ratio, b1.max_ratio, 100 * s1, a2.max_ratio, b2.max_ratio, 100 * s2, slope_dev,
                               kTolSlopeFit)};
    });

    run(13, "A_p verdicts and weighted probes", false, [&] {
        const bool verdicts = ap_admissible(Rational::parse("0"), Rational::parse("2")) &&
                              !ap_admissible(Rational::parse("1"), Rational::parse("2")) &&
                              ap_admissible(Rational::parse("3/2"), Rational::parse("3")) &&
                              !ap_admissible(Rational::parse("-1"), Rational::parse("2")) &&
                              ap_admissible(Rational::parse("999/1000"), Rational::parse("2"));
        bool ok = verdicts;
        std::string detail = verdicts ? "verdicts exact" : "verdict mismatch";
        for (auto op : {OneDimOp::Hilbert, OneDimOp::Max}) {
            const double half = weighted_opnorm_probe(op, Rational::parse("1/2"), Rational::parse("2")).max_ratio;
            const double r09 = weighted_opnorm_probe(op, Rational::parse("9/10"), Rational::parse("2")).max_ratio;
            const double r099 = weighted_opnorm_probe(op, Rational::parse("99/100"), Rational::parse("2")).max_ratio;
            const double r0999 = weighted_opnorm_probe(op, Rational::parse("999/1000"), Rational::parse("2")).max_ratio;
            const double growth = r0999 / r09;
            const bool mono = r09 < r099 && r099 < r0999;
            ok = ok && half <= kBoundedRatio && growth >= kGrowth && mono;
            detail += fmt("; %s a=1/2 %.2f (<= %.0f), a=.9/.99/.999 %.2f/%.2f/%.2f growth %.2fx (>= %.0fx)",
                          op == OneDimOp::Hilbert ? "hilbert" : "max", half, kBoundedRatio, r09, r099, r0999, growth,
                          kGrowth);
        }
        return Outcome{ok, detail};
    });

    run(14, "Z vs sum C_jk W_jk", false, [&] {
        const GridPtr g = make_grid(m, 20, 300);
        const RadialFunction f = RadialFunction::sample(g, [](double r) { return cplx(std::exp(-r * r)); });
        const Profile gp = [](double r) { return cplx(std::exp(-0.7 * r * r) * (1 + r * r)); };
        const Profile up = [](double r) { return cplx(std::exp(-0.5 * r * r)); };
        const RadialFunction gr = RadialFunction::sample(g, gp), ur = RadialFunction::sample(g, up);
        const RadialFunction z = z_direct(f, gr, ur, cut);
        const Profile1D M = spherical_average(gp, up, m, 14, 280, 9);
        const RadialFunction w = wsm_assembly(f, M, cut);
        const double err = rel_l2(w, z);
        return Outcome{err <= kTolZ, fmt("rel L2 err %.2e (tol %.0e)", err, kTolZ)};
    });

    run(15, "L^p dilation scan (exceptional V)", true, [&] {
        const GridPtr g = make_grid(m, 40, 200);
        const PotentialSpec V = make_exceptional_potential(m);
        const RadialFunction fv = RadialFunction::sample(g, [&](double r) { return cplx(V(r) * exceptional_phi(r)); });
        const auto rows = wjk_norm_scan(fv, fv, {2.5, 1.2}, cut);
        const double v25 = rows[0].variation, v12 = rows[1].variation;
        return Outcome{v25 <= kVariationMax && v12 >= kVariationMin,
                       fmt("p=2.5 variation %.3g (want <= %.0f); p=1.2 variation %.3g (want >= %.0f)", v25,
                           kVariationMax, v12, kVariationMin)};
    });

    run(16, "admissibility of the low-energy Omega", false, [&] {
        const PotentialSpec V = PotentialSpec::gaussian(-0.5, 1.0);
        std::vector<double> s;
        for (int N : {300, 600}) {
            const GridPtr g = make_grid(m, 40, N);
            const EigenData E = eigensolve(build_hamiltonian(g, V));
            s.push_back(admissibility_score(omega_low(born_remainder_k(g, V), cut, g, E).kernel));
        }
        const double change = std::abs(s[1] / s[0] - 1);
        const bool ok = std::isfinite(s[0]) && std::isfinite(s[1]) && change <= kTolScoreStable;
        return Outcome{ok, fmt("score N=300 %.4e, N=600 %.4e, change %.1f%% (tol %.0f%%)", s[0], s[1], 100 * change,
                               100 * kTolScoreStable)};
    });

    std::printf("acceptance: %d hard failure(s)\n", hard_failures);
    return hard_failures ? 1 : 0;
}
