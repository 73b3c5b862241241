#pragma once

#include "cmsrom/config.hpp"
#include "cmsrom/coupling.hpp"
#include "cmsrom/selection.hpp"
#include "cmsrom/weights.hpp"

namespace cmsrom {

struct BuiltComponent {
    std::string name;
    SecondOrderModel model; // damped, ports attached
    ModeSet modes;          // full spectrum
    bool reduce = true;
};

/// Instantiates, damps and validates every configured component.
std::vector<BuiltComponent> build_components(const ExperimentConfig& cfg);

/// Interconnection for one sweep point (port dims derived from the components).
Interconnection make_interconnection(const ExperimentConfig& cfg,
                                     const std::vector<BuiltComponent>& components,
                                     double sweep_value);

struct AposterioriResult {
    std::vector<double> rel_values;
    std::vector<std::uint8_t> rel_defined;
    double rel_max = 0.0;
    bool rel_ok = false; // all defined points < gamma
    std::vector<double> weighted_values;
    double weighted_max = 0.0;
    bool weighted_ok = false; // || V_A E_A W_A || < 1 everywhere (when weights given)
};

/// Couples both FRF stacks, forms the assembly error and checks the
/// relative-error bound (and the weighted assembly set when provided).
AposterioriResult verify_aposteriori(const std::vector<FrfData>& full_components,
                                     const std::vector<FrfData>& reduced_components,
                                     const Interconnection& kc, double gamma,
                                     const FrequencyGrid& grid,
                                     const AssemblyWeights* assembly = nullptr);

struct BaselineComponentResult {
    std::string component;
    bool reduced = true;
    int available_modes = 0;
    std::vector<int> selected_mode_ids;
};

struct BaselineResult {
    double multiplier = 0.0;
    std::vector<BaselineComponentResult> components;
    int total_selected = 0;
    AposterioriResult aposteriori;
};

/// Industrial standard: all elastic modes with f <= multiplier * f_max per
/// component; no component requirement involved.
BaselineResult standard_cutoff_baseline(const ExperimentConfig& cfg,
                                        const std::vector<BuiltComponent>& components,
                                        double multiplier, double sweep_value, int threads);

struct ComponentRun {
    std::string component;
    bool reduced = true;
    int preselected = 0;
    std::vector<int> selected_mode_ids;
    bool satisfied = true;
    long long iterations = 0;
    long long frf_evals = 0;
    double scaled_error_max = 0.0;
};

struct MethodRun {
    std::string method;
    bool is_baseline = false;
    std::vector<ComponentRun> components;
    int total_selected = 0;
    bool all_components_satisfied = false;
    bool guarantee_claimed = false; // selection method with every reduced component satisfied
    AposterioriResult aposteriori;
    std::string error; // stage error, empty when the method ran
    double wall_seconds = 0.0;
};

struct SweepPointRun {
    double sweep_value = std::numeric_limits<double>::quiet_NaN();
    double f_max_hz = 0.0;
    double gamma = 0.0;
    double gamma_threshold = 0.0; // the guaranteed relative-error bound
    std::vector<int> infeasible_points;
    std::vector<MethodRun> methods;
    std::vector<std::string> errors;
};

struct RunReport {
    std::string config_name;
    std::uint64_t config_hash = 0;
    std::string sweep_variable;
    double gamma = 0.0;
    std::vector<SweepPointRun> points;

    bool all_guarantees_verified() const;
    bool any_translation_infeasible() const;
};

struct PipelineOptions {
    int threads = 1;
    std::vector<std::string> methods; // override config.methods when non-empty
    double brute_budget = -1.0;       // override when >= 0
    bool run_baselines = true;
    bool collect_timings = true;
};

RunReport run_pipeline(const ExperimentConfig& cfg, const PipelineOptions& opts = {});

/// Weights for one sweep point (exported by the CLI `translate` subcommand).
WeightSet translate_for_point(const ExperimentConfig& cfg,
                              const std::vector<BuiltComponent>& components, double sweep_value,
                              int threads, AssemblyWeights* assembly_out = nullptr,
                              FrequencyGrid* grid_out = nullptr);

} // namespace cmsrom
