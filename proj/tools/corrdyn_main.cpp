#include "corrdyn/commands.hpp"
#include "corrdyn/io.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

namespace {

constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_unverified = 4;

const char* describe(const std::string& name)
{
    if (name == "analyze")
        return "degrees, critical values, critical orbits and a norm estimate";
    if (name == "equidistribute")
        return "backward (or forward) clouds, their convergence rate and invariance";
    if (name == "spectra")
        return "power iteration of the normalized one-form pullback and pushforward";
    if (name == "mixing")
        return "correlations I_n for dictionary pairs";
    if (name == "periodic")
        return "periodic points with multipliers and classes";
    return "density image of a cloud";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dynamics of holomorphic correspondences on the Riemann sphere"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "runs";
    bool serial = false, strict = false;
    std::uint64_t seed = 0;

    for (const auto& name : corrdyn::command_names()) {
        auto* sub = app.add_subcommand(name, describe(name));
        sub->add_option("--config", config_path, "JSON config or manifest")->required();
        sub->add_option("--out", out_dir, "output root; each run gets <command>-<hash>");
        sub->add_flag("--serial", serial, "single thread");
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_flag("--strict", strict, "exit 4 when the periodic-critical-value hypothesis is unverified");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    if (serial)
        setenv("CORRDYN_THREADS", "1", 1);

    try {
        auto config = corrdyn::parse_config(corrdyn::read_text(config_path));
        if (app.get_subcommands().front()->count("--seed"))
            config.seed = seed;
        const auto res = corrdyn::run_command(command, config, out_dir, serial);
        std::cout << res.summary << "output: " << res.directory << "\n";
        if (res.hypothesis_unverified && strict) {
            std::cerr << "hypothesis unverified: a critical value may be periodic\n";
            return exit_unverified;
        }
        return 0;
    } catch (const corrdyn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const corrdyn::Error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return exit_numeric;
    }
}
