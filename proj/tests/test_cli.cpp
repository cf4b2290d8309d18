#include "doctest.h"

#include "json.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = WAVOP_CLI;
const fs::path kConfigs = WAVOP_CONFIGS;

fs::path scratch()
{
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("wavop_cli_test_" + std::to_string(getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" + kCli + "' " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path write_config(const std::string& name, const json& j)
{
    const fs::path p = scratch() / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

json load(const fs::path& p)
{
    return json::parse(slurp(p));
}

std::string invoke(const std::string& sub, const fs::path& cfg, const fs::path& out, const std::string& extra = "")
{
    return sub + " --config '" + cfg.string() + "' --out '" + out.string() + "'" + (extra.empty() ? "" : " " + extra);
}

// "# key value" header lines of a CSV output
std::string csv_meta(const std::string& text, const std::string& key)
{
    std::istringstream in(text);
    std::string line;
    const std::string prefix = "# " + key + " ";
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    return "";
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

json small_harmonic()
{
    return {{"m", 6},
            {"grid", {{"rmax", 20}, {"n", 400}}},
            {"harmonic",
             {{"pairing", {{"triples", 2}}},
              {"k3", {{"widths", {1.0}}}},
              {"ap", {{"cases", json::array({json::array({"0", "2"}), json::array({"1", "2"}), json::array({"3/2", "3"})})}}}}}};
}

} // namespace

TEST_CASE("classify on the shipped exceptional config")
{
    const fs::path out = scratch() / "classify.json";
    REQUIRE(run(invoke("classify", kConfigs / "classify.json", out)) == 0);
    const json j = load(out);
    CHECK(j["result"]["kind"] == "exceptional");
    CHECK(j["result"]["d"] == 1);
    CHECK(j["result"]["zero_mode_rel_l2"].get<double>() <= 1e-3);
    CHECK(j["status"] == "ok");
    CHECK(j["convergence"]["converged"] == true);
    CHECK(j["provenance"]["config_sha256"].get<std::string>().size() == 64);
    CHECK(j["provenance"]["modules"].size() == 8);
    CHECK(j["provenance"]["threads"] == 1);

    // byte-identical reruns
    const fs::path again = scratch() / "classify2.json";
    REQUIRE(run(invoke("classify", kConfigs / "classify.json", again)) == 0);
    CHECK(slurp(out) == slurp(again));
}

TEST_CASE("decay on the shipped free config")
{
    const fs::path out = scratch() / "decay.csv";
    REQUIRE(run(invoke("decay", kConfigs / "decay.json", out)) == 0);
    const std::string text = slurp(out);
    CHECK(csv_meta(text, "status") == "ok");
    CHECK(csv_meta(text, "converged") == "true");
    const auto rows = csv_rows(text);
    REQUIRE(rows.size() == 1 + 12);
    CHECK(rows[0] == std::vector<std::string>{"p", "t", "norm", "boundary_mass", "used", "fitted_slope", "theoretical_slope"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][0] == "inf") {
            CHECK(std::abs(std::stod(rows[i][5]) + 3) <= 0.02);
            CHECK(rows[i][6] == "-3");
        } else {
            CHECK(rows[i][0] == "2");
            CHECK(std::abs(std::stod(rows[i][5])) <= 0.01);
        }
    }
}

TEST_CASE("validation errors exit 2 and write nothing")
{
    const json base = load(kConfigs / "classify.json");
    auto rejected = [&](const std::string& sub, json cfg, const std::string& name) {
        const fs::path out = scratch() / (name + ".out");
        fs::remove(out);
        const int code = run(invoke(sub, write_config(name + ".json", cfg), out));
        CHECK_MESSAGE(code == 2, name);
        CHECK_MESSAGE(!fs::exists(out), name);
    };
    json odd = base;
    odd["m"] = 5;
    rejected("classify", odd, "odd_m");
    json typo = base;
    typo["grid"]["nn"] = 10;
    rejected("classify", typo, "unknown_key");
    json small = base;
    small["grid"]["n"] = 4;
    rejected("classify", small, "tiny_grid");
    json other = base;
    other["decay"] = json::object();
    rejected("classify", other, "foreign_block");
    json pot = base;
    pot["potential"] = {{"kind", "gaussian"}, {"width", -1}};
    rejected("classify", pot, "bad_width");
    json decay = load(kConfigs / "decay.json");
    decay["decay"]["times"] = {1, 2};
    rejected("decay", decay, "early_times");
    decay = load(kConfigs / "decay.json");
    decay["decay"]["p"] = {1.5};
    rejected("decay", decay, "p_below_2");

    const fs::path broken = scratch() / "broken.json";
    std::ofstream(broken) << "{ \"m\": 6, ";
    CHECK(run(invoke("classify", broken, scratch() / "broken.out")) == 2);
    CHECK(!fs::exists(scratch() / "broken.out"));
    CHECK(run(invoke("classify", scratch() / "missing.json", scratch() / "missing.out")) == 2);
    CHECK(run("nosuch --config x --out y") == 2);
    CHECK(run(invoke("classify", kConfigs / "classify.json", scratch() / "no_dir" / "x.json")) == 2);
}

TEST_CASE("convergence failures exit 3 and mark the output")
{
    // too few Laguerre nodes for small lambda*rho: the doubling gate fails, the table is written and marked
    const json res = {{"resolvent", {{"lambdas", {0.1, 1.0}}, {"rhos", {0.5, 20.0}}, {"laguerre_nodes", 16}}}};
    const fs::path out = scratch() / "res.csv";
    CHECK(run(invoke("resolvent", write_config("res.json", res), out)) == 3);
    const std::string text = slurp(out);
    CHECK(csv_meta(text, "status") == "convergence_failure");
    CHECK(csv_meta(text, "converged") == "false");
    CHECK(csv_rows(text).size() == 1 + 4);

    // a box so small that every time reflects: nothing left to fit
    const json dec = {{"grid", {{"rmax", 20}, {"n", 150}}}, {"decay", {{"p", {"inf"}}, {"times", {5, 10, 20, 40, 80}}}}};
    const fs::path dout = scratch() / "dec.csv";
    CHECK(run(invoke("decay", write_config("dec.json", dec), dout)) == 3);
    const std::string dtext = slurp(dout);
    CHECK(csv_meta(dtext, "status") == "convergence_failure");
    CHECK(!csv_meta(dtext, "error").empty());
}

TEST_CASE("resolvent table passes its gate at the default node count")
{
    const json res = {{"resolvent", {{"lambdas", {0.0, 1.0}}, {"rhos", {1.0, 5.0}}}}};
    const fs::path out = scratch() / "res_ok.csv";
    REQUIRE(run(invoke("resolvent", write_config("res_ok.json", res), out)) == 0);
    const auto rows = csv_rows(slurp(out));
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][7]) <= 1e-6);
}

TEST_CASE("seed, threads, annotations and the config hash")
{
    const fs::path cfg = write_config("harm.json", small_harmonic());
    const fs::path a = scratch() / "h_a.csv", b = scratch() / "h_b.csv", c = scratch() / "h_c.csv";
    REQUIRE(run(invoke("harmonic", cfg, a, "--seed 7")) == 0);
    REQUIRE(run(invoke("harmonic", cfg, b, "--seed 7")) == 0);
    REQUIRE(run(invoke("harmonic", cfg, c, "--seed 8")) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));
    CHECK(csv_meta(slurp(a), "seed") == "7");
    const auto rows = csv_rows(slurp(a));
    REQUIRE(rows.size() == 1 + 16 + 3 + 9);
    for (const auto& r : rows)
        if (r[0] == "pairing" && r[2] == "rel_err") CHECK(std::stod(r[3]) <= 1e-5);

    json annotated = small_harmonic();
    annotated["_comment"] = "annotations do not enter the hash";
    annotated["harmonic"]["_note"] = 1;
    const fs::path d = scratch() / "h_d.csv";
    REQUIRE(run(invoke("harmonic", write_config("harm_annot.json", annotated), d, "--seed 7")) == 0);
    CHECK(slurp(d) == slurp(a));

    json changed = small_harmonic();
    changed["harmonic"]["k3"]["widths"] = {2.0};
    const fs::path e = scratch() / "h_e.csv";
    REQUIRE(run(invoke("harmonic", write_config("harm_changed.json", changed), e, "--seed 7")) == 0);
    CHECK(csv_meta(slurp(e), "config_sha256") != csv_meta(slurp(a), "config_sha256"));

    const fs::path t2 = scratch() / "h_t2.csv", t1 = scratch() / "h_t1.csv";
    REQUIRE(run(invoke("harmonic", cfg, t2), "WAVOP_THREADS=2") == 0);
    CHECK(csv_meta(slurp(t2), "threads") == "2");
    REQUIRE(run(invoke("harmonic", cfg, t1, "--threads 1"), "WAVOP_THREADS=2") == 0);
    CHECK(csv_meta(slurp(t1), "threads") == "1");
}
