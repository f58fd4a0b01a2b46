#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "fvsim/coupling.hpp"
#include "fvsim/fleming_viot.hpp"

namespace fvsim {

using Json = nlohmann::json;

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One experiment, fully described by a JSON file. Sweep fields (lists of N,
/// separations, times) are expanded deterministically inside the experiment.
struct Scenario {
    Json raw;  // resolved copy, embedded in every output

    std::string experiment;  // fv-run | conditioned-mc | mixing-curve | fv-vs-mc |
                             // coupling-sweep | check-model
    Domain domain = Domain::interval(0.0, 1.0);
    std::string model_name;
    std::map<std::string, double> model_params;
    SimParams sim;

    InitialLaw init = InitialLaw::uniform();
    std::optional<InitialLaw> init2;  // mixing-curve second law

    long n_particles = 0;
    double s = 0.0;
    double t_end = 0.0;
    std::vector<double> checkpoints;
    long target_survivors = 0;
    long max_replicas = 0;
    long replicas = 0;
    int bins = 0;  // 0 = default rule
    double alpha = 0.0;  // 0 = default 0.1 * inradius
    std::optional<double> noise_floor;
    std::optional<double> lambda0;
    std::vector<double> separations;
    std::vector<double> times;
    double ref_leg = 1.0;
    int validator_samples = 10000;

    std::filesystem::path out_dir = "out";

    TimePeriodicModel build() const;
};

struct ScenarioOverrides {
    std::optional<uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
};

Scenario load_scenario(const std::filesystem::path& path,
                       const ScenarioOverrides& overrides = {});
Scenario parse_scenario(const Json& j, const ScenarioOverrides& overrides = {});

struct RunResult {
    int exit_code = 0;
    Json summary;
};

/// Execute the scenario: writes CSV/JSON artifacts under out_dir (atomic
/// temp+rename), prints a one-line summary per checkpoint, and returns the
/// summary document. Failures return nonzero exit_code and an error object
/// in place of the summary.
RunResult run_scenario(const Scenario& scenario);

/// Convenience wrapper: load then run; parse failures become error results.
RunResult run_scenario_file(const std::filesystem::path& path,
                            const ScenarioOverrides& overrides = {});

std::string list_models_text();
std::string describe_model_text(const std::string& name);

}  // namespace fvsim
