// lcdyn: batch front-end for the light-cone dynamics library.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lcd/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Light-cone interaction dynamics: bounds, Neumann evaluation and structural checks"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (overrides io.out_dir)");
    app.add_option("--seed", seed, "Quadrature seed (overrides quadrature.seed)");
    app.add_option("--threads", threads, "Worker threads (overrides solve.threads)")->check(CLI::PositiveNumber);
    app.fallthrough();

    using Command = int (*)(const lcd::RunConfig&, std::ostream&);
    Command command = nullptr;
    const std::pair<const char*, Command> commands[] = {
        {"bounds", [](const lcd::RunConfig& c, std::ostream& o) { return lcd::cmd_bounds(c, o); }},
        {"evaluate", [](const lcd::RunConfig& c, std::ostream& o) { return lcd::cmd_evaluate(c, o); }},
        {"verify", [](const lcd::RunConfig& c, std::ostream& o) { return lcd::cmd_verify(c, o); }},
        {"propagation", [](const lcd::RunConfig& c, std::ostream& o) { return lcd::cmd_propagation(c, o); }},
        {"flrw", [](const lcd::RunConfig& c, std::ostream& o) { return lcd::cmd_flrw(c, o); }},
    };
    const char* help[] = {"Operator-norm ledger, sweeps, N-particle and FLRW bounds",
                          "Truncated Neumann series on the configured cloud",
                          "Invariant and bound checks; exit 1 on any failure",
                          "Finite propagation speed for compactly supported data",
                          "Conformally rescaled FLRW solve with psi-frame values"};
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        auto* sub = app.add_subcommand(commands[i].first, help[i]);
        sub->callback([&, i] { command = commands[i].second; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? lcd::exit_ok : lcd::exit_usage;
    }

    lcd::RunConfig cfg;
    try {
        cfg = lcd::load_config(config_path);
        if (out_dir) cfg.io.out_dir = *out_dir;
        if (seed) cfg.quadrature.seed = *seed;
        if (threads) cfg.solve.threads = *threads;
        lcd::validate(cfg);
    } catch (const lcd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return lcd::exit_usage;
    }

    try {
        return command(cfg, std::cout);
    } catch (const lcd::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lcd::exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lcd::exit_failure;
    }
}
