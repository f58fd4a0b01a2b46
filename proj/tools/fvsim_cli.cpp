// fvsim command-line runner: scenario-driven experiments with killed
// diffusions, Fleming-Viot particle systems and coupled pairs.

#include <CLI11.hpp>
#include <iostream>

#include "fvsim/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fvsim - killed-diffusion and Fleming-Viot particle simulations"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    std::string model_name;
    uint64_t seed = 0;
    int workers = 0;
    bool seed_set = false, workers_set = false, out_set = false;

    auto add_common = [&](CLI::App* cmd, bool scenario_required) {
        cmd->add_option("--scenario", scenario_path, "scenario JSON file")
            ->required(scenario_required);
        cmd->add_option("--seed", seed, "override the scenario seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--workers", workers, "cap worker threads (outputs are unaffected)")
            ->each([&](const std::string&) { workers_set = true; });
        cmd->add_option("--out", out_dir, "override the output directory")
            ->each([&](const std::string&) { out_set = true; });
    };

    CLI::App* run = app.add_subcommand("run", "execute a scenario file");
    add_common(run, true);

    CLI::App* check = app.add_subcommand("check-model", "run the model validators");
    add_common(check, true);

    app.add_subcommand("list-models", "list the built-in model library");

    CLI::App* describe = app.add_subcommand("describe", "describe one library model");
    describe->add_option("model", model_name, "model name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("list-models")) {
            std::cout << fvsim::list_models_text();
            return 0;
        }
        if (app.got_subcommand("describe")) {
            std::cout << fvsim::describe_model_text(model_name);
            return 0;
        }

        fvsim::ScenarioOverrides ov;
        if (seed_set) ov.seed = seed;
        if (workers_set) ov.workers = workers;
        if (out_set) ov.out_dir = out_dir;

        if (app.got_subcommand("check-model")) {
            fvsim::Scenario sc = fvsim::load_scenario(scenario_path, ov);
            sc.experiment = "check-model";
            sc.raw["experiment"] = "check-model";
            return fvsim::run_scenario(sc).exit_code;
        }
        return fvsim::run_scenario_file(scenario_path, ov).exit_code;
    } catch (const std::exception& e) {
        fvsim::Json err;
        err["error"]["type"] = "cli";
        err["error"]["message"] = e.what();
        std::cout << err.dump() << "\n";
        return 1;
    }
}
