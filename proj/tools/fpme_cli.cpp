// fpme — configuration-driven experiment runner for the evolving-surface
// fractional porous medium solver. Verbs: verify, solve, sweep, compare.
// Exit codes: 0 pass, 1 tolerance failure, 2 usage/config error, 3 solver
// failure.

#include "fpme/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int run_verb(const std::string& verb, const std::string& config, const std::string& out_dir) {
    const auto outcome = fpme::harness::run_config_file(config, out_dir, verb);
    for (const auto& suite : outcome.suites) std::cout << suite.summary() << "\n";
    if (!outcome.error.empty()) std::cerr << "error: " << outcome.error << "\n";
    return static_cast<int>(outcome.code);
}

void list_suites() {
    for (const auto& s : fpme::harness::builtin_suites())
        std::cout << s.name << "  [" << s.kind << ", configs/" << s.config_file << "]\n    "
                  << s.description << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral solver and verification suite for fractional porous medium flows on "
                 "evolving closed manifolds"};
    app.require_subcommand(0, 1);

    bool list = false;
    app.add_flag("--list-suites", list, "List the built-in verification suites");

    struct VerbArgs {
        std::string config;
        std::string out = "out";
    };
    std::map<std::string, VerbArgs> args;
    for (const std::string verb : {"verify", "solve", "sweep", "compare"}) {
        auto* sub = app.add_subcommand(verb, "Run a " + verb + " experiment from a config file");
        sub->add_option("--config", args[verb].config, "Path to the JSON experiment config")
            ->required();
        sub->add_option("--out", args[verb].out, "Output directory for CSV results");
    }

    CLI11_PARSE(app, argc, argv);

    if (list) {
        list_suites();
        return 0;
    }
    for (const auto& [verb, a] : args) {
        if (app.get_subcommand(verb)->parsed()) return run_verb(verb, a.config, a.out);
    }
    std::cerr << app.help();
    return 2;
}
