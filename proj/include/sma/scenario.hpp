#pragma once

#include "sma/asymptotics.hpp"
#include "sma/constitutive.hpp"
#include "sma/quasistatic.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sma {

// Malformed text, wrong types, unknown keys.  what() lists every problem found.
struct ParseError : std::runtime_error {
    explicit ParseError(std::vector<std::string> problems);
    std::vector<std::string> problems;
};

// Well-formed but inconsistent values.
struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<std::string> problems);
    std::vector<std::string> problems;
};

enum class ScenarioKind { PointTest, ConvTau, ConvRho, BvpRun, BvpConv, GammaTable };

const char* kind_name(ScenarioKind k);
std::optional<ScenarioKind> parse_kind(const std::string& s);

struct Scenario {
    ScenarioKind kind = ScenarioKind::PointTest;
    MaterialParams params;
    double R = 0.5;

    // time
    double T = 1.0;
    int N = 64;

    // point kinds
    StressPath path;
    int probes = 0;  // stability probes per node (point-test, bvp-run); 0 = skip

    // BVP kinds
    int n = 2;
    Eigen::Vector3d extents{1.0, 1.0, 1.0};
    std::vector<BoxSide> dirichlet_sides{BoxSide::XMin};
    LoadProgram loads;
    double bvp_tolerance = 1e-9;
    int dump_every = 0;  // field dump every k-th node (bvp-run); 0 = none

    // conv-tau
    std::vector<double> taus;
    double reference_tau = 0.0;

    // conv-rho, bvp-conv
    LimitSchedule schedule;
    bool inter_level = false;
    bool minproblem = false;  // bvp-conv: single step at minproblem_t instead of evolutions
    double minproblem_t = 0.5;

    // gamma-table
    std::vector<double> gamma_rhos;
    int gamma_samples = 50;

    std::filesystem::path output{"out"};
    std::uint64_t seed = 1;
    int threads = 1;

    BvpProblem bvp_problem() const;
};

// JSON text -> validated scenario.  Throws ParseError or ValidationError.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& file);

// Every constraint that fails, empty when valid.
std::vector<std::string> scenario_violations(const Scenario& s);

struct RunResult {
    int status = 0;
    std::vector<std::string> files;  // relative to the output directory
    double wall_seconds = 0.0;
};

// Writes the kind-specific outputs plus manifest.json (deterministic) and
// timing.json (wall time) into s.output.
RunResult run_scenario(const Scenario& s);

} // namespace sma
