#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ltm/models.hpp"
#include "ltm/ode.hpp"
#include "ltm/twist.hpp"

namespace ltm::cli {

/// Parse failure with the offending location.
struct ParseError : ValidationError {
    ParseError(const std::string& what, int line, int column)
        : ValidationError(what + " (line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ")"),
          line(line),
          column(column) {}
    int line;
    int column;
};

enum class BioSwitch { None, GrowthRates, CarryingCapacities };

/// One fully specified experiment: two phases, the annulus energies, the
/// switching schedule, and tool options.
struct Scenario {
    models::Variant variant = models::Variant::NegMed;
    BioSwitch bio_switch = BioSwitch::None;
    models::SystemSpec sys1, sys2;
    double e1 = 0.0, e2 = 0.0, h1 = 0.0, h2 = 0.0;
    double T1 = 0.0, T2 = 0.0;
    ode::IntegratorConfig integrator;
    int path_samples = 256;
    std::vector<int> itinerary;  // rectangle indices
    double perturb_eps = 0.0;
    twist::PerturbShape perturb_shape = twist::PerturbShape::SquareWave;
    int sweep_count = 9;
    std::optional<std::vector<double>> e_grid, h_grid;

    annuli::Annulus annulus1() const { return annuli::make_annulus(sys1, e1, e2); }
    annuli::Annulus annulus2() const { return annuli::make_annulus(sys2, h1, h2); }
    twist::SwitchSchedule schedule() const {
        return twist::make_schedule(sys1, sys2, T1, T2);
    }
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Canonical line-oriented rendering; parses back to an equal scenario.
std::string dump_canonical(const Scenario& s);

bool operator==(const Scenario& a, const Scenario& b);

/// Built-in reference scenarios: ex18, ex16, bio-r, bio-k.
Scenario builtin_scenario(const std::string& name);

}  // namespace ltm::cli
