#include "safesim/simulator.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace safesim {

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"deterministic partition-safety scenario runner"};
    std::string scenario_path;
    std::string out_dir;
    std::uint64_t seed_override = 0;
    bool has_seed = false;
    bool expect_safe_stop = false;

    app.add_option("--scenario", scenario_path, "scenario JSON file")->required();
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--seed", seed_override, "override the scenario seed")
        ->each([&](const std::string&) { has_seed = true; });
    app.add_flag("--expect-safe-stop", expect_safe_stop,
                 "exit 0 even when the run ends in SAFE_STOP");

    // CLI11 wants argv-style reversed arguments.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    Scenario scenario;
    try {
        scenario = load_scenario(scenario_path);
    } catch (const InvalidScenario& e) {
        std::cerr << "invalid scenario: " << e.what() << '\n';
        return 2;
    } catch (const std::ios_base::failure& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    if (has_seed) scenario.seed = seed_override;

    RunResult result;
    try {
        result = run(scenario);
    } catch (const InvalidScenario& e) {
        std::cerr << "invalid scenario: " << e.what() << '\n';
        return 2;
    }

    try {
        write_run_outputs(result, out_dir);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }

    if (result.final_state.safe_io.mode == SafeIoMode::SafeStop && !expect_safe_stop) {
        std::cerr << "run ended in SAFE_STOP (cause: "
                  << to_string(result.final_state.safe_io.cause) << ")\n";
        return 3;
    }
    return 0;
}

} // namespace safesim
