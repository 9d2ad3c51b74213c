#include <CLI11.hpp>
#include <iostream>

#include "ltmcli/commands.hpp"
#include "ltmcli/scenario.hpp"

int main(int argc, char** argv) {
    using namespace ltm::cli;

    CLI::App app{
        "Linked twist map chaos certification for periodically switched planar "
        "Hamiltonian systems"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string scenario_path;
    Options opts;
    bool dump = false;

    app.add_option("--scenario", scenario_path, "scenario file (key = value sections)");
    app.add_option("--out", opts.out_dir, "output directory for CSV artifacts")
        ->capture_default_str();
    app.add_option("--tol-rel", opts.tol_rel, "override the integrator's relative tolerance");
    app.add_option("--path-samples", opts.path_samples,
                   "override the number of path samples for stretch checks");
    app.add_flag("--dump-canonical", dump,
                 "print the canonical form of the scenario and exit");

    const std::vector<std::pair<std::string, std::string>> scenario_cmds = {
        {"centers", "print the phase centers, minimum energies and frequencies"},
        {"periods", "sweep orbit periods over the annulus energies (CSV)"},
        {"link", "certify the linked-annuli interleaving and emit rectangle polygons"},
        {"thresholds", "compute the minimal switching durations"},
        {"stretch", "verify the stretching conditions on every rectangle pair"},
        {"itinerary", "find a start point realizing the scenario's symbol sequence"},
        {"portrait", "emit the four boundary orbit polylines (CSV)"}};
    for (const auto& [name, desc] : scenario_cmds) app.add_subcommand(name, desc);
    auto* reproduce = app.add_subcommand(
        "reproduce", "run a builtin configuration and diff against reference values");
    std::string builtin;
    reproduce->add_option("name", builtin, "ex18, ex16, bio-r or bio-k")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string command = app.get_subcommands().front()->get_name();
        if (command == "reproduce") {
            if (dump) {
                std::cout << dump_canonical(builtin_scenario(builtin));
                return kExitOk;
            }
            return run_reproduce(builtin, opts, std::cout);
        }
        if (scenario_path.empty())
            throw ltm::ValidationError("--scenario PATH is required for this command");
        const Scenario s = load_scenario(scenario_path);
        if (dump) {
            std::cout << dump_canonical(s);
            return kExitOk;
        }
        return run_command(command, s, opts, std::cout);
    } catch (...) {
        return exit_code_for_current_exception(std::cerr);
    }
}
