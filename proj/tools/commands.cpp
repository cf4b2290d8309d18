#include "commands.hpp"

#include "wavop/dispersive.hpp"
#include "wavop/error.hpp"
#include "wavop/harmonic.hpp"
#include "wavop/inversion.hpp"
#include "wavop/resolvent.hpp"
#include "wavop/spectral.hpp"
#include "wavop/waveop.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace wavop::cli {

namespace {

constexpr double kResolventGate = 1e-8; // g0 change under Laguerre node doubling
const HamiltonianOptions kClassifyDefault{Scheme::Conservative, OuterBoundary::ZeroEnergyRobin};

const char* kind_name(ThresholdClassification::Kind k)
{
    return k == ThresholdClassification::Kind::Exceptional ? "exceptional" : "generic";
}

json hamiltonian_json(HamiltonianOptions o)
{
    return {{"scheme", o.scheme == Scheme::Conservative ? "conservative" : "centered"},
            {"outer", o.outer == OuterBoundary::Dirichlet ? "dirichlet" : "robin"}};
}

json numbers_json(const std::vector<double>& x)
{
    json a = json::array();
    for (double v : x) a.push_back(jnum(v));
    return a;
}

json setup_json(const ExperimentConfig& c)
{
    return {{"m", c.m}, {"rmax", c.rmax}, {"n", c.n}, {"potential", c.potential.describe()}};
}

double rel_l2(const RadialFunction& a, const RadialFunction& b)
{
    return lp_norm({a.grid, a.v - b.v}, 2) / lp_norm(b, 2);
}

// Hankel-function form of the kernel: (i/4) (lambda / (2 pi rho))^nu H^(1)_nu(lambda rho), nu = m/2 - 1.
cplx hankel_kernel(double lambda, double rho, int m)
{
    if (lambda == 0) return g0_static(rho, m);
    const double nu = 0.5 * m - 1;
    const cplx H(std::cyl_bessel_j(nu, lambda * rho), std::cyl_neumann(nu, lambda * rho));
    return cplx(0, 0.25) * std::pow(lambda / (2 * std::numbers::pi * rho), nu) * H;
}

// Uniform double in [0, 1) from the top 53 bits; the std distributions are not portable.
double unit(std::mt19937_64& rng)
{
    return double(rng() >> 11) * 0x1.0p-53;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi)
{
    return lo * std::pow(hi / lo, unit(rng));
}

CommandOutput finish_csv(const ResultTable& t, const Provenance& prov, const Gates& g)
{
    return {true, render_csv(t, prov, g), g.converged()};
}

CommandOutput finish_json(const json& r, const Provenance& prov, const Gates& g)
{
    return {false, render_json(r, prov, g), g.converged()};
}

// ---- resolvent ----

CommandOutput run_resolvent(const ExperimentConfig& c, const ResolventParams& p, const Provenance& prov)
{
    ResultTable t;
    t.columns = {"table", "lambda", "rho", "value_re", "value_im", "oracle_re", "oracle_im", "rel_err", "doubling_change"};
    Gates gates;
    double worst_doubling = 0;
    for (double l : p.lambdas)
        for (double r : p.rhos) {
            const cplx v = g0_point(l, r, c.m, p.laguerre_nodes);
            const cplx v2 = g0_point(l, r, c.m, 2 * p.laguerre_nodes);
            const cplx o = hankel_kernel(l, r, c.m);
            const double dch = std::abs(v2 - v) / std::abs(v2);
            worst_doubling = std::max(worst_doubling, dch);
            t.add({std::string("g0"), l, r, v.real(), v.imag(), o.real(), o.imag(), std::abs(v - o) / std::abs(o), dch});
        }
    gates.add("g0_laguerre_doubling", worst_doubling, kResolventGate);
    if (!p.expansion_lambdas.empty()) {
        ExpansionOptions eo;
        eo.include_a_term = p.include_a_term;
        const ExpansionReport rep = expansion_check(c.grid(), p.expansion_lambdas, eo);
        for (std::size_t i = 0; i < rep.lambdas.size(); ++i)
            t.add({std::string("expansion_remainder"), rep.lambdas[i], std::string(), rep.remainder_norms[i],
                   std::string(), std::string(), std::string(), std::string(), std::string()});
        t.notes.push_back({"expansion_fitted_exponent", format_double(rep.fitted_exponent)});
        t.notes.push_back({"expansion_gamma", format_double(rep.gamma)});
        t.notes.push_back({"expansion_evenness_defect", format_double(rep.evenness_defect)});
    }
    t.declared_rows = p.lambdas.size() * p.rhos.size() + p.expansion_lambdas.size();
    return finish_csv(t, prov, gates);
}

// ---- classify ----

CommandOutput run_classify(const ExperimentConfig& c, const ClassifyParams& p, const Provenance& prov)
{
    const GridPtr g = c.grid();
    const HamiltonianOptions ho = c.hamiltonian_or(kClassifyDefault);
    const double e_tol = p.e_tol.value_or(default_e_tol(g, ho));
    const ThresholdClassification cls = classify(build_hamiltonian(g, c.potential, ho), e_tol);
    json r = setup_json(c);
    r["hamiltonian"] = hamiltonian_json(ho);
    r["kind"] = kind_name(cls.kind);
    r["d"] = cls.d;
    r["e_tol"] = cls.e_tol;
    r["energies"] = numbers_json(cls.energies);
    r["tail_slopes"] = numbers_json(cls.tail_slopes);
    if (c.potential.kind == PotentialSpec::Kind::ExceptionalM6 && c.potential.scale == 1 && cls.d >= 1) {
        // closed-form zero mode, compared after the best scalar fit
        const RadialFunction phi = RadialFunction::sample(g, [](double x) { return cplx(exceptional_phi(x)); });
        RadialFunction b{g, cls.basis.col(0).cast<cplx>()};
        b.v *= weighted_l2_inner(b, phi) / weighted_l2_inner(b, b);
        r["zero_mode_rel_l2"] = rel_l2(b, phi);
    }
    return finish_json(r, prov, Gates{});
}

// ---- inversion ----

CommandOutput run_inversion(const ExperimentConfig& c, const InversionParams& p, const Provenance& prov)
{
    const GridPtr g = c.grid();
    const HamiltonianOptions ho = c.hamiltonian_or(kClassifyDefault);
    const ThresholdClassification cls = classify(build_hamiltonian(g, c.potential, ho));
    const std::vector<double> lams = p.lambdas.empty() ? singular_fit_ladder() : p.lambdas;
    SingularFitOptions so;
    so.tune_coupling = p.tune_coupling;
    const SingularFit f = singular_fit(g, c.potential, lams, cls, so);
    json r = setup_json(c);
    r["hamiltonian"] = hamiltonian_json(ho);
    r["kind"] = kind_name(cls.kind);
    r["d"] = cls.d;
    r["lambdas"] = numbers_json(f.lambdas);
    r["coupling"] = f.coupling;
    r["relative_error"] = jnum(f.relative_error);
    r["relative_error_weighted"] = jnum(f.relative_error_weighted);
    r["residual_plain"] = jnum(f.residual_plain);
    r["residual_log"] = jnum(f.residual_log);
    r["coefficient_norm"] = jnum(f.coefficient_norm);
    r["v_norm"] = jnum(f.v_norm);
    r["coefficient_over_v"] = jnum(f.v_norm > 0 ? f.coefficient_norm / f.v_norm : 0.0);
    r["numerical_rank"] = f.numerical_rank;
    r["singular_values"] = numbers_json(f.singular_values);
    return finish_json(r, prov, Gates{});
}

// ---- waveop ----

CommandOutput run_waveop(const ExperimentConfig& c, const WaveopParams& p, const Provenance& prov)
{
    const GridPtr g = c.grid();
    const int n = g->n;
    const HamiltonianOptions ho = c.hamiltonian_or({});
    const auto tests = intertwine_test_set(g);
    Eigen::MatrixXcd U(n, p.test_functions);
    for (int k = 0; k < p.test_functions; ++k) U.col(k) = tests[k].v;

    Gates gates;
    json r = setup_json(c);
    r["hamiltonian"] = hamiltonian_json(ho);
    QuadratureRecord rec;
    Eigen::MatrixXcd WU;
    if (p.intertwining) {
        const WaveOpMatrix W = stationary_w(g, c.potential, c.cut, c.quad, ho);
        rec = W.quad;
        WU = W.total * U;
        r["intertwining_residual"] = intertwine_residual(W.total, g, c.potential, ho);
        r["split_defect"] = weighted_opnorm_op(W.low + W.high - W.total, *g, 0, 0);
    } else {
        WU = stationary_w_apply(g, c.potential, U, c.quad, &rec);
    }
    gates.add("lambda_doubling_change", rec.doubling_change, kStrictGate);
    r["quadrature"] = {{"nodes", rec.nodes},
                       {"doubling_change", rec.doubling_change},
                       {"excluded_nodes", rec.excluded_nodes},
                       {"largest_excluded", rec.largest_excluded}};

    json iso = json::array();
    for (int k = 0; k < p.test_functions; ++k)
        iso.push_back(lp_norm({g, WU.col(k)}, 2) / lp_norm(tests[k], 2) - 1);
    r["isometry_defect"] = iso;

    // time-dependent oracle on a larger box with the same spacing
    const int nb = p.oracle_box * n;
    const GridPtr gb = make_grid(c.m, p.oracle_box * g->rmax, nb);
    const PropagatorOracle P = PropagatorOracle::build(gb, c.potential, ho);
    json oracle = json::array();
    for (double t : p.times) {
        json diffs = json::array();
        for (int k = 0; k < p.test_functions; ++k) {
            Eigen::VectorXcd u = Eigen::VectorXcd::Zero(nb);
            u.head(n) = U.col(k);
            const RadialFunction w{g, P.wave(u, t).head(n)};
            diffs.push_back(rel_l2({g, WU.col(k)}, w));
        }
        const double bm = boundary_mass_probe(P, std::abs(t));
        oracle.push_back({{"t", t}, {"rel_l2_diff", diffs}, {"boundary_mass", bm}, {"reflection_warning", bm > 0.01}});
    }
    r["time_dependent_oracle"] = oracle;
    return finish_json(r, prov, gates);
}

// ---- decay ----

CommandOutput run_decay(const ExperimentConfig& c, const DecayParams& p, const Provenance& prov)
{
    const GridPtr g = c.grid();
    const HamiltonianOptions ho = c.hamiltonian_or({});
    const double w2 = p.initial_width * p.initial_width;
    const RadialFunction u0 = RadialFunction::sample(g, [&](double r) { return cplx(std::exp(-r * r / (2 * w2))); });
    const PropagatorOracle P = PropagatorOracle::build(g, c.potential, ho);
    DecayOptions o;
    o.project = p.project;
    o.band_limit = p.band_limit;
    o.hamiltonian = ho;

    ResultTable t;
    t.columns = {"p", "t", "norm", "boundary_mass", "used", "fitted_slope", "theoretical_slope"};
    for (double pp : p.ps) {
        const DecayMeasurement d = decay_scan(P, u0, pp, p.times, o);
        std::size_t kept = 0;
        for (double tt : p.times) {
            if (kept < d.times.size() && d.times[kept] == tt) {
                t.add({pp, tt, d.norms[kept], d.boundary_mass[kept], true, d.fitted_slope, d.theoretical_slope});
                ++kept;
            } else {
                t.add({pp, tt, std::string(), std::string(), false, d.fitted_slope, d.theoretical_slope});
            }
        }
        t.notes.push_back({"p=" + format_double(pp) + " truncated", d.truncated ? "true" : "false"});
        t.notes.push_back({"p=" + format_double(pp) + " band_energy", format_double(d.band_energy)});
    }
    t.declared_rows = p.ps.size() * p.times.size();
    return finish_csv(t, prov, Gates{});
}

// ---- harmonic ----

CommandOutput run_harmonic(const ExperimentConfig& c, const HarmonicParams& p, const Provenance& prov)
{
    ResultTable t;
    t.columns = {"table", "case", "key", "value"};
    Gates gates;
    const int m = c.m;
    auto put = [&](const char* table, long long i, const char* key, Cell v) {
        t.add({std::string(table), i, std::string(key), std::move(v)});
    };

    if (p.pairing_triples) {
        const GridPtr g = c.grid();
        std::mt19937_64 rng(prov.seed);
        for (int i = 0; i < p.pairing_triples; ++i) {
            const double a = log_uniform(rng, 0.5, 2), b = log_uniform(rng, 0.5, 2);
            const double l = log_uniform(rng, p.pairing_lambda_min, p.pairing_lambda_max);
            const Profile psi = [a](double r) { return cplx(std::exp(-a * r * r) * (1 + 0.3 * r * r)); };
            const Profile u = [b](double r) { return cplx(std::exp(-b * r * r)); };
            const Profile1D M = spherical_average(psi, u, m, p.profile_L, p.profile_half, p.profile_smax);
            const cplx v = pairing(M, l, m);
            const cplx o = pairing_oracle(RadialFunction::sample(g, psi), RadialFunction::sample(g, u), l);
            put("pairing", i, "lambda", l);
            put("pairing", i, "psi_a", a);
            put("pairing", i, "u_b", b);
            put("pairing", i, "value_re", v.real());
            put("pairing", i, "value_im", v.imag());
            put("pairing", i, "oracle_re", o.real());
            put("pairing", i, "oracle_im", o.imag());
            put("pairing", i, "rel_err", std::abs(v - o) / std::abs(o));
        }
    }
    for (std::size_t i = 0; i < p.k3_widths.size(); ++i) {
        const double w = p.k3_widths[i];
        const Profile1D M = Profile1D::sample(p.profile_L, p.profile_half, [w](double r) { return cplx(std::exp(-w * r * r)); });
        const K3Report k = k3_identity(M, m, c.cut);
        put("k3", (long long)i, "width", w);
        put("k3", (long long)i, "residual", k.residual);
        put("k3", (long long)i, "f_at_zero", k.f_at_zero);
    }
    for (std::size_t i = 0; i < p.tjk_pairs.size(); ++i) {
        const auto [j, k] = p.tjk_pairs[i];
        const TjkBound which = j == 0 ? TjkBound::T01 : TjkBound::Main;
        const TjkBoundReport rep = tjk_bound_check(j, k, m, c.cut, p.tjk_extent, p.tjk_step, which);
        put("tjk", (long long)i, "j", (long long)j);
        put("tjk", (long long)i, "k", (long long)k);
        put("tjk", (long long)i, "bound", std::string(which == TjkBound::T01 ? "t01" : "main"));
        put("tjk", (long long)i, "max_ratio", rep.max_ratio);
        put("tjk", (long long)i, "argmax_rho", rep.argmax_rho);
        put("tjk", (long long)i, "argmax_r", rep.argmax_r);
        put("tjk", (long long)i, "finite", rep.finite);
        gates.require("tjk_finite_" + std::to_string(j) + std::to_string(k), rep.finite);
    }
    for (std::size_t i = 0; i < p.ap.size(); ++i) {
        const Rational a = Rational::parse(p.ap[i].first), pp = Rational::parse(p.ap[i].second);
        put("ap", (long long)i, "a", p.ap[i].first);
        put("ap", (long long)i, "p", p.ap[i].second);
        put("ap", (long long)i, "admissible", ap_admissible(a, pp));
        if (p.ap_probe) {
            put("ap", (long long)i, "hilbert_max_ratio", weighted_opnorm_probe(OneDimOp::Hilbert, a, pp).max_ratio);
            put("ap", (long long)i, "maximal_max_ratio", weighted_opnorm_probe(OneDimOp::Max, a, pp).max_ratio);
        }
    }
    t.declared_rows = 8 * std::size_t(p.pairing_triples) + 3 * p.k3_widths.size() + 7 * p.tjk_pairs.size() +
                      (p.ap_probe ? 5 : 3) * p.ap.size();
    return finish_csv(t, prov, gates);
}

} // namespace

bool writes_csv(const std::string& subcommand)
{
    return subcommand == "resolvent" || subcommand == "decay" || subcommand == "harmonic";
}

CommandOutput run_command(const ExperimentConfig& cfg, const Provenance& prov)
{
    return std::visit(
        [&](const auto& p) -> CommandOutput {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ResolventParams>) return run_resolvent(cfg, p, prov);
            else if constexpr (std::is_same_v<T, ClassifyParams>) return run_classify(cfg, p, prov);
            else if constexpr (std::is_same_v<T, InversionParams>) return run_inversion(cfg, p, prov);
            else if constexpr (std::is_same_v<T, WaveopParams>) return run_waveop(cfg, p, prov);
            else if constexpr (std::is_same_v<T, DecayParams>) return run_decay(cfg, p, prov);
            else return run_harmonic(cfg, p, prov);
        },
        cfg.params);
}

} // namespace wavop::cli
