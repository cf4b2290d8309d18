#include "config.hpp"

#include "wavop/dispersive.hpp"
#include "wavop/error.hpp"
#include "wavop/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace wavop::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw ConfigError(where + ": " + what);
}

// Drops keys starting with '_' (annotations) at every level.
json strip_annotations(const json& j)
{
    if (j.is_object()) {
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it)
            if (it.key().empty() || it.key()[0] != '_') out[it.key()] = strip_annotations(it.value());
        return out;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& x : j) out.push_back(strip_annotations(x));
        return out;
    }
    return j;
}

// Object reader that rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    Section sub(const std::string& key) { return Section(raw(key), at(key)); }

    double number(const std::string& key, double fallback, double lo, double hi, bool open_lo = false)
    {
        if (!has(key)) return fallback;
        return number_value(raw(key), at(key), lo, hi, open_lo);
    }

    int integer(const std::string& key, int fallback, int lo, int hi)
    {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer()) fail(at(key), "expected an integer");
        const long long x = v.get<long long>();
        if (x < lo || x > hi) fail(at(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return int(x);
    }

    bool boolean(const std::string& key, bool fallback)
    {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) fail(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed)
    {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        const std::string s = v.get<std::string>();
        if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(at(key), "'" + s + "' is not one of " + list);
        }
        return s;
    }

    std::string string(const std::string& key)
    {
        if (!has(key)) fail(at(key), "required");
        const json& v = raw(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, double lo, double hi, std::size_t min_count, bool open_lo = false)
    {
        if (!has(key)) fail(at(key), "required");
        const json& v = raw(key);
        if (!v.is_array()) fail(at(key), "expected an array");
        if (v.size() < min_count) fail(at(key), "needs at least " + std::to_string(min_count) + " entries");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(number_value(v[i], at(key) + "[" + std::to_string(i) + "]", lo, hi, open_lo));
        return out;
    }

    // rejects leftovers
    void done() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    static double number_value(const json& v, const std::string& where, double lo, double hi, bool open_lo)
    {
        double x;
        if (v.is_number()) x = v.get<double>();
        else if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
            x = std::numeric_limits<double>::infinity();
        else fail(where, "expected a number");
        if (std::isnan(x) || x < lo || x > hi || (open_lo && x == lo)) {
            std::ostringstream os;
            os << "value " << x << " outside " << (open_lo ? "(" : "[") << lo << ", " << hi << "]";
            fail(where, os.str());
        }
        return x;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_increasing(const std::vector<double>& x, const std::string& where)
{
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) fail(where, "values must be strictly increasing");
}

PotentialSpec parse_potential(Section s, int m, const std::string& base_dir)
{
    const std::string kind = s.choice("kind", "zero", {"zero", "gaussian", "exceptional", "tabulated"});
    const double scale = s.number("scale", 1.0, -1e6, 1e6);
    PotentialSpec V;
    if (kind == "zero") {
        V = PotentialSpec::zero();
    } else if (kind == "gaussian") {
        const double v0 = s.number("v0", -0.5, -1e6, 1e6);
        const double width = s.number("width", 1.0, 0, 1e6, true);
        const double delta = s.number("delta", 12.0, 0, 1e3);
        V = PotentialSpec::gaussian(v0, width, delta);
    } else if (kind == "exceptional") {
        if (m != 6) fail(s.at("kind"), "the exceptional potential is shipped for m = 6 only");
        V = make_exceptional_potential(m);
    } else {
        std::filesystem::path file = s.string("file");
        if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
        const double delta = s.number("delta", kInf, 0, kInf);
        const double bound = s.number("bound", 0, 0, 1e12, true);
        if (!s.has("bound")) fail(s.at("bound"), "required for a tabulated potential");
        V = PotentialSpec::from_file(file.string(), delta, bound);
    }
    s.done();
    return V.scaled(scale);
}

ResolventParams parse_resolvent(Section s)
{
    ResolventParams p;
    p.lambdas = s.numbers("lambdas", 0, 1e3, 1);
    p.rhos = s.numbers("rhos", 0, 1e4, 1, true);
    p.laguerre_nodes = s.integer("laguerre_nodes", 128, 16, 1024);
    if (s.has("expansion")) {
        Section e = s.sub("expansion");
        p.expansion_lambdas = e.numbers("lambdas", 0, 1, 3, true);
        require_increasing(p.expansion_lambdas, e.at("lambdas"));
        p.include_a_term = e.boolean("include_a_term", true);
        e.done();
    }
    s.done();
    return p;
}

ClassifyParams parse_classify(Section s)
{
    ClassifyParams p;
    if (s.has("e_tol")) p.e_tol = s.number("e_tol", 0, 0, 1e6, true);
    s.done();
    return p;
}

InversionParams parse_inversion(Section s)
{
    InversionParams p;
    if (s.has("lambdas")) {
        p.lambdas = s.numbers("lambdas", 0, 1, 6, true);
        require_increasing(p.lambdas, s.at("lambdas"));
    }
    p.tune_coupling = s.boolean("tune_coupling", true);
    s.done();
    return p;
}

WaveopParams parse_waveop(Section s)
{
    WaveopParams p;
    p.test_functions = s.integer("test_functions", 5, 1, 10);
    if (s.has("times")) p.times = s.numbers("times", -1e4, 0, 1);
    for (std::size_t i = 0; i < p.times.size(); ++i) {
        if (!(p.times[i] < 0)) fail(s.at("times"), "times must be negative");
        if (i && !(std::abs(p.times[i]) > std::abs(p.times[i - 1]))) fail(s.at("times"), "|t| must increase");
    }
    p.oracle_box = s.integer("oracle_box", p.oracle_box, 1, 16);
    p.intertwining = s.boolean("intertwining", true);
    s.done();
    return p;
}

DecayParams parse_decay(Section s)
{
    DecayParams p;
    p.ps = s.numbers("p", 2, kInf, 1);
    p.times = s.numbers("times", 5, 1e6, 2);
    require_increasing(p.times, s.at("times"));
    p.initial_width = s.number("initial_width", 1.0, 0, 1e3, true);
    p.project = s.boolean("project", true);
    p.band_limit = s.boolean("band_limit", true);
    s.done();
    return p;
}

HarmonicParams parse_harmonic(Section s, int m)
{
    HarmonicParams p;
    if (s.has("profile")) {
        Section q = s.sub("profile");
        p.profile_L = q.number("L", p.profile_L, 0, 1e3, true);
        p.profile_half = q.integer("half", p.profile_half, 8, 1 << 16);
        p.profile_smax = q.number("smax", p.profile_smax, 0, 1e3, true);
        q.done();
    }
    if (s.has("pairing")) {
        Section q = s.sub("pairing");
        p.pairing_triples = q.integer("triples", 10, 1, 1000);
        p.pairing_lambda_min = q.number("lambda_min", p.pairing_lambda_min, 0, 100, true);
        p.pairing_lambda_max = q.number("lambda_max", p.pairing_lambda_max, 0, 100, true);
        if (!(p.pairing_lambda_max >= p.pairing_lambda_min)) fail(q.at("lambda_max"), "must be >= lambda_min");
        q.done();
    }
    if (s.has("k3")) {
        Section q = s.sub("k3");
        p.k3_widths = q.numbers("widths", 0, 100, 1, true);
        q.done();
    }
    if (s.has("tjk")) {
        Section q = s.sub("tjk");
        const json& pairs = q.raw("pairs");
        if (!pairs.is_array() || pairs.empty()) fail(q.at("pairs"), "expected a non-empty array of [j, k]");
        const int top = kjk_max_index(m);
        for (const auto& pr : pairs) {
            if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number_integer() || !pr[1].is_number_integer())
                fail(q.at("pairs"), "each entry must be [j, k] with integers");
            const int j = pr[0].get<int>(), k = pr[1].get<int>();
            const bool main = j >= 1 && k >= 1 && j <= top && k <= top;
            const bool t01 = j == 0 && k == 1;
            if (!main && !t01)
                fail(q.at("pairs"), "[" + std::to_string(j) + ", " + std::to_string(k) + "] has no shipped bound (need 1 <= j,k <= " +
                                        std::to_string(top) + " or [0, 1])");
            p.tjk_pairs.emplace_back(j, k);
        }
        p.tjk_extent = q.number("extent", p.tjk_extent, 0, 1e3, true);
        p.tjk_step = q.number("step", p.tjk_step, 0, p.tjk_extent, true);
        q.done();
    }
    if (s.has("ap")) {
        Section q = s.sub("ap");
        const json& cases = q.raw("cases");
        if (!cases.is_array() || cases.empty()) fail(q.at("cases"), "expected a non-empty array of [a, p]");
        for (const auto& c : cases) {
            if (!c.is_array() || c.size() != 2 || !c[0].is_string() || !c[1].is_string())
                fail(q.at("cases"), "each entry must be [\"a\", \"p\"] with rational strings");
            const std::string a = c[0].get<std::string>(), pp = c[1].get<std::string>();
            Rational::parse(a);
            if (!(Rational::parse(pp).value() > 1)) fail(q.at("cases"), "p = " + pp + " must exceed 1");
            p.ap.emplace_back(a, pp);
        }
        p.ap_probe = q.boolean("probe", false);
        q.done();
    }
    if (!p.pairing_triples && p.k3_widths.empty() && p.tjk_pairs.empty() && p.ap.empty())
        fail("harmonic", "nothing to do: give at least one of pairing, k3, tjk, ap");
    s.done();
    return p;
}

} // namespace

GridPtr ExperimentConfig::grid() const
{
    return make_grid(m, rmax, n);
}

ExperimentConfig parse_config(const std::string& subcommand, const json& tree, const std::string& base_dir)
{
    if (std::find(kSubcommands.begin(), kSubcommands.end(), subcommand) == kSubcommands.end())
        throw ConfigError("unknown subcommand " + subcommand);
    ExperimentConfig c;
    c.subcommand = subcommand;
    c.canonical = strip_annotations(tree);
    c.canonical_text = c.canonical.dump();

    Section top(c.canonical, "");
    c.m = top.integer("m", 6, 2, 64);
    if (c.m < 4 || c.m % 2) fail("m", "dimension must be even and >= 4");
    if (top.has("grid")) {
        Section g = top.sub("grid");
        c.rmax = g.number("rmax", c.rmax, 0, 1e5, true);
        c.n = g.integer("n", c.n, 16, 20000);
        g.done();
    }
    c.cut.lambda0 = top.number("lambda0", c.cut.lambda0, 0, 100, true);
    c.cut.ramp = top.number("cutoff_ramp", c.cut.ramp, 0, 1);
    c.cut.validate();
    c.quad.lambda0 = c.cut.lambda0;
    if (top.has("quadrature")) {
        Section q = top.sub("quadrature");
        c.quad.lambda_min = q.number("lambda_min_factor", 1e-4, 0, 0.5, true) * c.cut.lambda0;
        c.quad.log_panels = q.integer("log_panels", c.quad.log_panels, 1, 256);
        c.quad.panel_width = q.number("panel_width", c.quad.panel_width, 0, 100, true);
        c.quad.nodes = q.integer("nodes_per_panel", c.quad.nodes, 2, 256);
        c.quad.lambda_max = q.number("lambda_max", c.quad.lambda_max, 0, 1e3, true);
        q.done();
    } else {
        c.quad.lambda_min = 1e-4 * c.cut.lambda0;
    }
    c.quad.validate();
    if (top.has("hamiltonian")) {
        Section h = top.sub("hamiltonian");
        HamiltonianOptions o;
        o.scheme = h.choice("scheme", "centered", {"centered", "conservative"}) == "conservative" ? Scheme::Conservative
                                                                                                   : Scheme::Centered;
        o.outer = h.choice("outer", "robin", {"robin", "dirichlet"}) == "dirichlet" ? OuterBoundary::Dirichlet
                                                                                      : OuterBoundary::ZeroEnergyRobin;
        h.done();
        c.hamiltonian = o;
    }
    c.potential = top.has("potential") ? parse_potential(top.sub("potential"), c.m, base_dir) : PotentialSpec::zero();

    // the subcommand's own block; blocks of other subcommands are rejected as unknown
    const bool has_block = top.has(subcommand);
    const json empty = json::object();
    Section block = has_block ? top.sub(subcommand) : Section(empty, subcommand);
    if (subcommand == "resolvent") c.params = parse_resolvent(std::move(block));
    else if (subcommand == "classify") c.params = parse_classify(std::move(block));
    else if (subcommand == "inversion") c.params = parse_inversion(std::move(block));
    else if (subcommand == "waveop") c.params = parse_waveop(std::move(block));
    else if (subcommand == "decay") c.params = parse_decay(std::move(block));
    else c.params = parse_harmonic(std::move(block), c.m);
    top.done();

    // grid-dependent checks last, so every field above has been range-checked first
    c.potential.validate(*c.grid());
    if (subcommand == "decay")
        for (double p : std::get<DecayParams>(c.params).ps) theoretical_slope(p, c.m);
    return c;
}

ExperimentConfig load_config(const std::string& subcommand, const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json tree;
    try {
        tree = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();
    return parse_config(subcommand, tree, dir.empty() ? "." : dir.string());
}

} // namespace wavop::cli
