#include "doctest.h"

#include "wavop/error.hpp"
#include "wavop/radial.hpp"
#include "wavop/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

using namespace wavop;

namespace {

const HamiltonianOptions kCls{Scheme::Conservative, OuterBoundary::ZeroEnergyRobin};

// laplacian of phi in R^6 by the radial formula phi'' + 5 phi' / r
double lap_phi(double r, double h)
{
    const double p = exceptional_phi(r + h), c = exceptional_phi(r), q = exceptional_phi(r - h);
    return (p - 2 * c + q) / (h * h) + 5.0 / r * (p - q) / (2 * h);
}

double rel_l2(const RadialFunction& a, const RadialFunction& b)
{
    return lp_norm({a.grid, a.v - b.v}, 2) / lp_norm(b, 2);
}

} // namespace

TEST_CASE("exceptional potential: closed form and construction identity")
{
    const PotentialSpec V = make_exceptional_potential(6);
    CHECK(V(0) == doctest::Approx(-16).epsilon(1e-14));
    CHECK(std::abs(V(1)) <= 1e-14);
    CHECK(V(1.5) == 0);
    CHECK(std::isinf(V.delta));
    for (double r : {0.2, 0.5, 0.8}) CHECK(V(r) == doctest::Approx(96 * (r * r - 1) / (3 * std::pow(r, 4) - 8 * r * r + 6)));
    // -Delta phi + V phi = 0, difference error removed by one Richardson level
    for (double r : {0.1, 0.3, 0.6, 0.9, 1.5, 3.0}) {
        const double h = 1e-3;
        const double lap = (4 * lap_phi(r, h / 2) - lap_phi(r, h)) / 3;
        CHECK(std::abs(-lap + V(r) * exceptional_phi(r)) <= 1e-8 * std::max(1.0, std::abs(V(r) * exceptional_phi(r))));
    }
    // C^2 glue at r = 1
    const double e = 1e-6;
    CHECK(exceptional_phi(1 - e) == doctest::Approx(exceptional_phi(1 + e)).epsilon(1e-5));
    CHECK(exceptional_phi(2) == doctest::Approx(1.0 / 16).epsilon(1e-15));
    auto g = make_grid(6, 40, 300);
    const RadialFunction phi = RadialFunction::sample(g, [](double r) { return cplx(exceptional_phi(r)); });
    CHECK(std::isfinite(lp_norm(phi, 2)));
    CHECK_THROWS_AS(make_exceptional_potential(8), ConfigError);
}

TEST_CASE("PotentialSpec: decay claim, tabulated file, validation")
{
    auto g = make_grid(6, 40, 300);
    const PotentialSpec G = PotentialSpec::gaussian(-2, 1.0);
    CHECK_NOTHROW(G.validate(*g));
    PotentialSpec bad = G;
    bad.delta = 1;
    bad.bound = 1e-3;
    CHECK_THROWS_AS(bad.validate(*g), ConfigError);
    // the claimed bound of the exceptional potential is its true sup, 24(sqrt 3 - 1)
    const PotentialSpec E = make_exceptional_potential(6);
    CHECK_NOTHROW(E.validate(*make_grid(6, 10, 600)));
    CHECK(E.bound == doctest::Approx(17.5692193816).epsilon(1e-10));
    CHECK(std::abs(E(std::sqrt(1 - 1 / std::sqrt(3.0)))) == doctest::Approx(E.bound).epsilon(1e-12));

    const std::string path = "test_spectral_tab.txt";
    {
        std::ofstream f(path);
        f << "# r V\n0 -1\n1 -1\n2 0\n";
    }
    const PotentialSpec T = PotentialSpec::from_file(path, 12, 10);
    CHECK(T(0.5) == doctest::Approx(-1));
    CHECK(T(1.5) == doctest::Approx(-0.5));
    CHECK(T(3) == 0);
    std::remove(path.c_str());
    CHECK_THROWS_AS(PotentialSpec::from_file("does-not-exist.txt", 12, 10), ConfigError);
    CHECK_THROWS_AS(PotentialSpec::tabulated({0, 1}, {0, std::nan("")}, 12, 1), ConfigError);
}

TEST_CASE("Hamiltonian: symmetry, free spectrum, bound states")
{
    auto g = make_grid(6, 40, 300);
    for (Scheme s : {Scheme::Centered, Scheme::Conservative}) {
        const Hamiltonian H0 = build_hamiltonian(g, PotentialSpec::zero(), {s, OuterBoundary::Dirichlet});
        const Eigen::MatrixXd A = H0.matrix();
        CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        const EigenData E = eigensolve(H0);
        CHECK(E.values.minCoeff() >= -1e-10);
        CHECK(E.values[0] > 0);
        // residuals and orthonormality
        const double nrm = H0.norm_bound();
        for (int k = 0; k < E.values.size(); k += 37)
            CHECK((A * E.vectors.col(k) - E.values[k] * E.vectors.col(k)).norm() <= 1e-9 * nrm);
        const Eigen::MatrixXd ortho = E.vectors.transpose() * E.vectors - Eigen::MatrixXd::Identity(300, 300);
        CHECK(ortho.cwiseAbs().maxCoeff() <= 1e-10);
        for (int k = 1; k < E.values.size(); ++k) CHECK(E.values[k] >= E.values[k - 1]);
    }
    // lowest free eigenvalue falls as the box grows
    double prev = 1e300;
    for (double R : {10.0, 20.0, 40.0}) {
        auto gr = make_grid(6, R, int(7.5 * R));
        const double e0 = eigensolve_index(build_hamiltonian(gr, PotentialSpec::zero(), {Scheme::Centered, OuterBoundary::Dirichlet}), 0, 0).values[0];
        CHECK(e0 < prev / 3);
        prev = e0;
    }
    // deep well binds
    const EigenData D = eigensolve(build_hamiltonian(g, PotentialSpec::gaussian(-50, 1.0)));
    CHECK(D.values[0] < 0);
    // continuity in the coupling
    const double e1 = eigensolve_index(build_hamiltonian(g, PotentialSpec::gaussian(-50, 1.0)), 0, 0).values[0];
    const double e2 = eigensolve_index(build_hamiltonian(g, PotentialSpec::gaussian(-50 + 1e-3, 1.0)), 0, 0).values[0];
    CHECK(std::abs(e1 - e2) <= 1e-1);
    CHECK(std::abs(e1 - e2) > 0);
}

TEST_CASE("eigensolve: windows, indices, sign convention, determinism")
{
    auto g = make_grid(6, 40, 300);
    const Hamiltonian H = build_hamiltonian(g, PotentialSpec::gaussian(-50, 1.0));
    const EigenData A = eigensolve(H);
    const EigenData W = eigensolve_window(H, -1e3, 0.0);
    REQUIRE(W.values.size() >= 1);
    for (int k = 0; k < W.values.size(); ++k) CHECK(W.values[k] == doctest::Approx(A.values[k]).epsilon(1e-12));
    const EigenData I = eigensolve_index(H, 2, 4);
    REQUIRE(I.values.size() == 3);
    CHECK(I.values[0] == doctest::Approx(A.values[2]).epsilon(1e-12));
    // first significant component positive
    for (int k = 0; k < 5; ++k) {
        const Eigen::VectorXd v = A.vectors.col(k);
        int i = 0;
        while (std::abs(v[i]) < 1e-8 * v.cwiseAbs().maxCoeff()) ++i;
        CHECK(v[i] > 0);
    }
    const EigenData B = eigensolve(H);
    CHECK((A.vectors - B.vectors).cwiseAbs().maxCoeff() == 0);
    CHECK_THROWS_AS(eigensolve_window(H, 1, 0), ConfigError);
    CHECK_THROWS_AS(eigensolve_index(H, 3, 2), ConfigError);
}

TEST_CASE("classify: generic cases")
{
    auto g = make_grid(6, 10, 600);
    const auto c0 = classify(build_hamiltonian(g, PotentialSpec::zero(), kCls));
    CHECK(c0.kind == ThresholdClassification::Kind::Generic);
    CHECK(c0.d == 0);
    CHECK(c0.p0.cwiseAbs().maxCoeff() == 0);
    const auto cg = classify(build_hamiltonian(g, PotentialSpec::gaussian(-0.5, 1.0), kCls));
    CHECK(cg.kind == ThresholdClassification::Kind::Generic);
    // default e_tol follows 10 E_free / N
    const double e0 = eigensolve_index(build_hamiltonian(g, PotentialSpec::zero(), kCls), 0, 0).values[0];
    CHECK(default_e_tol(g, kCls) == doctest::Approx(10 * e0 / 600).epsilon(1e-12));
    CHECK_THROWS_AS(classify(build_hamiltonian(g, PotentialSpec::zero(), kCls), -1.0), ConfigError);
}

TEST_CASE("classify: exceptional potential, projections, refinement")
{
    const PotentialSpec V = make_exceptional_potential(6);
    std::vector<double> energies;
    for (int N : {300, 600}) {
        auto g = make_grid(6, 10, N);
        const auto c = classify(build_hamiltonian(g, V, kCls));
        REQUIRE(c.kind == ThresholdClassification::Kind::Exceptional);
        REQUIRE(c.d == 1);
        energies.push_back(std::abs(c.energies[0]));
        CHECK(c.tail_slopes[0] == doctest::Approx(-4).epsilon(0.5 / 4));

        const Eigen::MatrixXd& P = c.p0;
        const Eigen::MatrixXd& Q = c.q;
        CHECK((P * P - P).cwiseAbs().maxCoeff() <= 1e-8);
        // Q = -phi (x) V phi with the -<V phi, phi> = 1 normalization
        CHECK((Q * Q - Q).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, Q.cwiseAbs().maxCoeff()));
        const Eigen::VectorXd v = V.sample(*g);
        const Eigen::VectorXd phi = c.basis.col(0);
        RadialFunction pf{g, phi.cast<cplx>()}, vpf{g, v.cwiseProduct(phi).cast<cplx>()};
        CHECK(-weighted_l2_inner(vpf, pf).real() == doctest::Approx(1).epsilon(1e-8));
        CHECK(-weighted_l2_inner(vpf, pf).real() > 0);
        // P0 symmetric with respect to the L^2 weights: <P f, h> = <f, P h>
        std::mt19937_64 rng(7);
        std::normal_distribution<double> N01;
        RadialFunction f = RadialFunction::zero(g), h = RadialFunction::zero(g);
        for (int i = 0; i < N; ++i) {
            f.v[i] = N01(rng) * std::exp(-0.3 * g->r[i]);
            h.v[i] = N01(rng) * std::exp(-0.3 * g->r[i]);
        }
        const RadialFunction Pf{g, (P * f.v.real()).cast<cplx>()}, Ph{g, (P * h.v.real()).cast<cplx>()};
        CHECK(std::abs(weighted_l2_inner(Pf, h) - weighted_l2_inner(f, Ph)) <= 1e-8 * lp_norm(f, 2) * lp_norm(h, 2));
        // P0 fixes phi
        CHECK((P * phi - phi).norm() <= 1e-8 * phi.norm());
    }
    // second-order scheme: the zero-mode energy shrinks about 4x when the spacing halves
    CHECK(energies[0] / energies[1] >= 3.5);
}

TEST_CASE("classify: ambiguity when e_tol swallows the low spectrum")
{
    auto g = make_grid(6, 10, 300);
    CHECK_THROWS_AS(classify(build_hamiltonian(g, PotentialSpec::zero(), kCls), 5.0), AmbiguityError);
}

TEST_CASE("pc_project: identity at V=0, idempotent, orthogonal to bound states")
{
    auto g = make_grid(6, 40, 300);
    const RadialFunction f = RadialFunction::sample(g, [](double r) { return cplx(std::exp(-r * r / 4), 0.3 * std::exp(-r)); });
    const EigenData E0 = eigensolve(build_hamiltonian(g, PotentialSpec::zero()));
    CHECK((pc_project(E0, f).v - f.v).cwiseAbs().maxCoeff() <= 1e-14);

    const EigenData E = eigensolve(build_hamiltonian(g, PotentialSpec::gaussian(-50, 1.0)));
    const RadialFunction p = pc_project(E, f);
    const RadialFunction pp = pc_project(E, p);
    CHECK(rel_l2(pp, p) <= 1e-10);
    for (int k = 0; k < E.values.size() && E.values[k] < 0; ++k) {
        const RadialFunction b{g, E.u_of(k).cast<cplx>()};
        CHECK(std::abs(weighted_l2_inner(b, p)) <= 1e-10 * lp_norm(b, 2) * lp_norm(f, 2));
    }
    CHECK(lp_norm(p, 2) < lp_norm(f, 2));
    CHECK_THROWS_AS(pc_project(E, RadialFunction::zero(make_grid(6, 40, 200))), ConfigError);
}
