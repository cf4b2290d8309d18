// wavop <subcommand> --config <path> --out <path> [--threads N] [--seed N]
//
// Exit codes: 0 ok, 1 unexpected failure, 2 invalid input (no output written),
// 3 numerical convergence failure (output written and marked).

#include "CLI11.hpp"

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

#include "wavop/error.hpp"
#include "wavop/parallel.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace wavop;
using namespace wavop::cli;

namespace {

constexpr int kExitOk = 0, kExitFailure = 1, kExitInvalid = 2, kExitConvergence = 3;

struct Args {
    std::string config;
    std::string out;
    int threads = 0;
    std::uint64_t seed = 0;
};

int run(const std::string& sub, const Args& a)
{
    ExperimentConfig cfg;
    try {
        const std::filesystem::path dir = std::filesystem::path(a.out).parent_path();
        if (!dir.empty() && !std::filesystem::is_directory(dir))
            throw ConfigError("output directory " + dir.string() + " does not exist");
        cfg = load_config(sub, a.config);
    } catch (const ConfigError& e) {
        std::cerr << "wavop: invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const DomainError& e) {
        std::cerr << "wavop: invalid input: " << e.what() << "\n";
        return kExitInvalid;
    }

    set_threads(a.threads);
    const Provenance prov{sub, sha256_hex(cfg.canonical_text), a.seed, current_threads()};
    try {
        const CommandOutput out = run_command(cfg, prov);
        write_file_atomic(a.out, out.text);
        if (!out.converged) {
            std::cerr << "wavop: a convergence gate failed; see the status line in " << a.out << "\n";
            return kExitConvergence;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "wavop: invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const DomainError& e) {
        std::cerr << "wavop: invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const ConvergenceError& e) {
        std::cerr << "wavop: convergence failure: " << e.what() << "\n";
        write_file_atomic(a.out, render_failure(writes_csv(sub), e.what(), prov));
        return kExitConvergence;
    } catch (const NumericalError& e) {
        std::cerr << "wavop: numerical failure: " << e.what() << "\n";
        write_file_atomic(a.out, render_failure(writes_csv(sub), e.what(), prov));
        return kExitConvergence;
    } catch (const std::exception& e) {
        std::cerr << "wavop: " << e.what() << "\n";
        return kExitFailure;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wave operator experiments on radial grids"};
    app.require_subcommand(1);
    Args args;
    for (const std::string& name : kSubcommands) {
        CLI::App* s = app.add_subcommand(name);
        s->add_option("--config", args.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
        s->add_option("--out", args.out, "output file (CSV or JSON by subcommand)")->required();
        s->add_option("--threads", args.threads, std::string("worker threads; default ") + kThreadsEnv + " or all cores")
            ->check(CLI::Range(1, 1024));
        s->add_option("--seed", args.seed, "seed for randomized test inputs");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }
    return run(app.get_subcommands().front()->get_name(), args);
}
