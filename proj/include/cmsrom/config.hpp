#pragma once

#include "cmsrom/beam.hpp"
#include "cmsrom/types.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace cmsrom {

struct ComponentConfig {
    enum class Kind { euler_beam, matrix_files };

    std::string name;
    Kind kind = Kind::euler_beam;

    // euler_beam
    EulerBeamParams beam;
    std::vector<BeamPort> input_ports;
    std::vector<BeamPort> output_ports;

    // matrix_files (paths resolved against the config directory)
    std::map<std::string, std::string> files;
    std::vector<int> boundary_dofs;

    double modal_damping = 0.0;
    bool reduce = true;
};

struct SweepSpec {
    enum class Variable { none, coupling_stiffness, f_max_hz };
    Variable variable = Variable::none;
    std::vector<double> values;
};

struct ExperimentConfig {
    std::string name;
    std::vector<ComponentConfig> components;

    Matrix k_bb, k_ba, k_ab;
    Matrix k_bb_pattern; // scaled by the sweep value when sweeping coupling stiffness
    bool has_pattern = false;

    double f_min_hz = 0.1;
    double f_max_hz = 400.0;
    int grid_points = 100;

    double gamma = 0.05;
    double weight_scale = 1.0;
    double preselection_multiplier = 5.0;

    std::vector<std::string> methods;
    std::vector<double> baselines;
    SweepSpec sweep;
    double brute_budget = 2e6;
    std::uint64_t seed = 1;

    std::string source_path;
    std::string raw_text;
    std::uint64_t config_hash = 0;

    /// Sweep values, or the single implicit point when no sweep is configured.
    std::vector<double> sweep_points() const;
    double effective_f_max(double sweep_value) const;
    Matrix effective_k_bb(double sweep_value) const;
};

extern const std::vector<std::string> kKnownMethods;

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin);

std::uint64_t fnv1a64(const std::string& text);

} // namespace cmsrom
