#include "cmsrom/pipeline.hpp"

#include "cmsrom/hh.hpp"
#include "cmsrom/matrixio.hpp"
#include "cmsrom/modal.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <numbers>
#include <stdexcept>

namespace cmsrom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SecondOrderModel instantiate(const ComponentConfig& cc) {
    SecondOrderModel model;
    if (cc.kind == ComponentConfig::Kind::euler_beam) {
        model = build_euler_beam(cc.beam);
        attach_ports(model, cc.beam, cc.input_ports, cc.output_ports);
    } else {
        model.mass = load_matrix(cc.files.at("mass"));
        model.stiffness = load_matrix(cc.files.at("stiffness"));
        const int n = model.dof_count();
        model.damping = cc.files.count("damping") ? load_matrix(cc.files.at("damping"))
                                                  : Matrix::Zero(n, n);
        model.input_map = load_matrix(cc.files.at("input"));
        model.output_map = load_matrix(cc.files.at("output"));
        model.boundary_dofs = cc.boundary_dofs;
    }
    model.name = cc.name;
    return model;
}

std::vector<int> modes_below(const ModeSet& modes, double limit_rad) {
    std::vector<int> ids;
    for (int i = modes.rigid_count; i < modes.count(); ++i)
        if (modes.frequencies_rad(i) <= limit_rad) ids.push_back(i);
    return ids;
}

// Classical industry-standard ROM: free-interface modal truncation over the
// kept modes (rigid modes always included), no interface statics.
FrfData truncation_frf(const BuiltComponent& comp, const std::vector<int>& elastic_ids,
                       const FrequencyGrid& grid) {
    std::vector<int> kept;
    for (int i = 0; i < comp.modes.rigid_count; ++i) kept.push_back(i);
    kept.insert(kept.end(), elastic_ids.begin(), elastic_ids.end());
    return frf_modal(comp.modes, comp.model, grid, kept);
}

SelectionResult run_method(const std::string& method, const SelectionProblem& problem,
                           double brute_budget) {
    problem.clear_cache();
    if (method == "freq_ordered") return select_frequency_ordered(problem);
    if (method == "rmi_a_apriori") return select_rmi_a_apriori(problem);
    if (method == "rmi_a_incremental") return select_rmi_a_incremental(problem);
    if (method == "rmi_r_apriori") return select_rmi_r_apriori(problem);
    if (method == "rmi_r_incremental") return select_rmi_r_incremental(problem);
    if (method == "brute_force") return select_brute_force(problem, -1, brute_budget);
    throw std::invalid_argument("unknown selection method '" + method + "'");
}

} // namespace

std::vector<BuiltComponent> build_components(const ExperimentConfig& cfg) {
    std::vector<BuiltComponent> out;
    for (const auto& cc : cfg.components) {
        BuiltComponent built;
        built.name = cc.name;
        built.reduce = cc.reduce;
        built.model = instantiate(cc);
        built.model.validate(/*cms_ready=*/true);
        const ModeSet all_modes = solve_undamped_modes(built.model, 1e15);
        if (cc.modal_damping > 0.0)
            built.model = apply_modal_damping(built.model, all_modes, cc.modal_damping);
        built.modes = all_modes;
        out.push_back(std::move(built));
    }
    return out;
}

Interconnection make_interconnection(const ExperimentConfig& cfg,
                                     const std::vector<BuiltComponent>& components,
                                     double sweep_value) {
    Interconnection kc;
    for (const auto& c : components) {
        kc.port_dims.inputs.push_back(c.model.input_count());
        kc.port_dims.outputs.push_back(c.model.output_count());
    }
    kc.k_bb = cfg.effective_k_bb(sweep_value);
    kc.k_ba = cfg.k_ba;
    kc.k_ab = cfg.k_ab;
    kc.port_dims.ext_inputs = static_cast<int>(cfg.k_ba.cols());
    kc.port_dims.ext_outputs = static_cast<int>(cfg.k_ab.rows());
    kc.validate();
    return kc;
}

AposterioriResult verify_aposteriori(const std::vector<FrfData>& full_components,
                                     const std::vector<FrfData>& reduced_components,
                                     const Interconnection& kc, double gamma,
                                     const FrequencyGrid& grid, const AssemblyWeights* assembly) {
    const auto h_b_full = block_diag_frf(full_components);
    const auto h_b_red = block_diag_frf(reduced_components);
    if (!h_b_full.grid.same_as(grid) || !h_b_red.grid.same_as(grid))
        throw std::invalid_argument("verify_aposteriori: grid mismatch");

    const auto h_a_full = couple(h_b_full, kc);
    const auto h_a_red = couple(h_b_red, kc);
    const auto e_a = assembly_error(h_a_full, h_a_red);
    const auto rel = relative_error(e_a, h_a_full.h_a);

    AposterioriResult out;
    out.rel_values = rel.values;
    out.rel_defined = rel.defined;
    out.rel_ok = true;
    for (size_t i = 0; i < rel.values.size(); ++i) {
        if (!rel.defined[i]) {
            out.rel_ok = false;
            continue;
        }
        out.rel_max = std::max(out.rel_max, rel.values[i]);
        if (!(rel.values[i] < gamma)) out.rel_ok = false;
    }

    if (assembly) {
        const auto check =
            check_requirement(e_a, assembly->v_a, assembly->w_a, RequirementForm::assembly);
        out.weighted_values = check.values;
        out.weighted_max = check.max_value;
        out.weighted_ok = check.satisfied;
    }
    return out;
}

BaselineResult standard_cutoff_baseline(const ExperimentConfig& cfg,
                                        const std::vector<BuiltComponent>& components,
                                        double multiplier, double sweep_value, int threads) {
    const double f_max = cfg.effective_f_max(sweep_value);
    const auto grid = FrequencyGrid::log_spaced(cfg.f_min_hz, f_max, cfg.grid_points);
    const auto kc = make_interconnection(cfg, components, sweep_value);

    std::vector<FrfData> full, reduced;
    BaselineResult result;
    result.multiplier = multiplier;
    for (const auto& comp : components) {
        full.push_back(frf_direct(comp.model, grid, threads));
        BaselineComponentResult cr;
        cr.component = comp.name;
        cr.reduced = comp.reduce;
        cr.available_modes = comp.modes.elastic_count();
        if (comp.reduce) {
            cr.selected_mode_ids = modes_below(comp.modes, kTwoPi * multiplier * f_max);
            reduced.push_back(truncation_frf(comp, cr.selected_mode_ids, grid));
            result.total_selected += static_cast<int>(cr.selected_mode_ids.size());
        } else {
            reduced.push_back(full.back());
        }
        result.components.push_back(std::move(cr));
    }

    const auto h_a = couple(block_diag_frf(full), kc);
    const auto assembly = design_relative_weights(h_a, cfg.gamma, cfg.weight_scale);
    const double gamma_threshold = cfg.gamma / (cfg.weight_scale * cfg.weight_scale);
    result.aposteriori = verify_aposteriori(full, reduced, kc, gamma_threshold, grid, &assembly);
    return result;
}

WeightSet translate_for_point(const ExperimentConfig& cfg,
                              const std::vector<BuiltComponent>& components, double sweep_value,
                              int threads, AssemblyWeights* assembly_out,
                              FrequencyGrid* grid_out) {
    const double f_max = cfg.effective_f_max(sweep_value);
    const auto grid = FrequencyGrid::log_spaced(cfg.f_min_hz, f_max, cfg.grid_points);
    const auto kc = make_interconnection(cfg, components, sweep_value);

    std::vector<FrfData> full;
    for (const auto& comp : components) full.push_back(frf_direct(comp.model, grid, threads));
    const auto h_b = block_diag_frf(full);
    const auto h_a = couple(h_b, kc);
    const auto assembly = design_relative_weights(h_a, cfg.gamma, cfg.weight_scale);

    std::vector<CMatrix> n_samples;
    for (int i = 0; i < grid.size(); ++i) n_samples.push_back(build_n(h_b.samples[i], kc));

    TranslateOptions opts;
    opts.threads = threads;
    auto ws = translate(n_samples, assembly, kc.port_dims, grid, opts);
    if (assembly_out) *assembly_out = assembly;
    if (grid_out) *grid_out = grid;
    return ws;
}

bool RunReport::all_guarantees_verified() const {
    for (const auto& point : points) {
        if (!point.errors.empty()) return false;
        if (!point.infeasible_points.empty()) return false;
        for (const auto& run : point.methods) {
            if (run.is_baseline) continue;
            if (!run.error.empty()) return false;
            if (!run.guarantee_claimed) return false;
            if (!run.aposteriori.rel_ok || !run.aposteriori.weighted_ok) return false;
        }
    }
    return true;
}

bool RunReport::any_translation_infeasible() const {
    for (const auto& point : points)
        if (!point.infeasible_points.empty()) return true;
    return false;
}

RunReport run_pipeline(const ExperimentConfig& cfg, const PipelineOptions& opts) {
    const auto components = build_components(cfg);
    const auto methods = opts.methods.empty() ? cfg.methods : opts.methods;
    const double brute_budget = opts.brute_budget >= 0.0 ? opts.brute_budget : cfg.brute_budget;

    RunReport report;
    report.config_name = cfg.name;
    report.config_hash = cfg.config_hash;
    report.gamma = cfg.gamma;
    switch (cfg.sweep.variable) {
        case SweepSpec::Variable::none: report.sweep_variable = "none"; break;
        case SweepSpec::Variable::coupling_stiffness:
            report.sweep_variable = "coupling_stiffness";
            break;
        case SweepSpec::Variable::f_max_hz: report.sweep_variable = "f_max_hz"; break;
    }

    // component FRFs depend only on the grid; cache across sweep points
    std::map<double, std::vector<FrfData>> frf_cache;

    for (double sweep_value : cfg.sweep_points()) {
        SweepPointRun point;
        point.sweep_value = sweep_value;
        point.gamma = cfg.gamma;
        point.gamma_threshold = cfg.gamma / (cfg.weight_scale * cfg.weight_scale);
        try {
            const double f_max = cfg.effective_f_max(sweep_value);
            point.f_max_hz = f_max;
            const auto grid = FrequencyGrid::log_spaced(cfg.f_min_hz, f_max, cfg.grid_points);
            const auto kc = make_interconnection(cfg, components, sweep_value);

            auto cache_it = frf_cache.find(f_max);
            if (cache_it == frf_cache.end()) {
                std::vector<FrfData> frfs;
                for (const auto& comp : components)
                    frfs.push_back(frf_direct(comp.model, grid, opts.threads));
                cache_it = frf_cache.emplace(f_max, std::move(frfs)).first;
            }
            const auto& full_frfs = cache_it->second;
            for (size_t j = 0; j < full_frfs.size(); ++j)
                if (!full_frfs[j].all_points_ok())
                    point.errors.push_back("component '" + components[j].name +
                                           "': flagged FRF points");

            const auto h_b = block_diag_frf(full_frfs);
            const auto h_a = couple(h_b, kc);
            if (!h_a.h_a.all_points_ok())
                point.errors.push_back("assembly FRF: flagged points (near-singular resolvent)");
            const auto assembly = design_relative_weights(h_a, cfg.gamma, cfg.weight_scale);

            std::vector<CMatrix> n_samples;
            for (int i = 0; i < grid.size(); ++i)
                n_samples.push_back(build_n(h_b.samples[i], kc));

            TranslateOptions topts;
            topts.threads = opts.threads;
            const auto ws = translate(n_samples, assembly, kc.port_dims, grid, topts);
            point.infeasible_points = ws.infeasible_points();
            if (!point.infeasible_points.empty())
                std::cerr << "WARNING: requirement translation infeasible at "
                          << point.infeasible_points.size()
                          << " grid points; they are excluded from the selection\n";

            std::vector<std::uint8_t> mask(grid.size(), 1);
            for (int i : point.infeasible_points) mask[i] = 0;

            // selection problems for the reduced components
            std::map<int, std::unique_ptr<SelectionProblem>> problems;
            const double preselect_limit = kTwoPi * cfg.preselection_multiplier * f_max;
            for (size_t j = 0; j < components.size(); ++j) {
                if (!components[j].reduce) continue;
                std::vector<Vector> v_req(grid.size()), w_req(grid.size());
                for (int i = 0; i < grid.size(); ++i) {
                    if (ws.at[i].feasible) {
                        v_req[i] = ws.at[i].v[j];
                        w_req[i] = ws.at[i].w[j];
                    } else {
                        v_req[i] = Vector::Zero(kc.port_dims.inputs[j]);
                        w_req[i] = Vector::Zero(kc.port_dims.outputs[j]);
                    }
                }
                const auto preselection = modes_below(components[j].modes, preselect_limit);
                problems.emplace(static_cast<int>(j),
                                 std::make_unique<SelectionProblem>(
                                     components[j].model, components[j].modes, preselection,
                                     std::move(v_req), std::move(w_req), grid, full_frfs[j], mask));
            }

            for (const auto& method : methods) {
                MethodRun run;
                run.method = method;
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    std::vector<FrfData> reduced_frfs;
                    run.all_components_satisfied = true;
                    for (size_t j = 0; j < components.size(); ++j) {
                        ComponentRun cr;
                        cr.component = components[j].name;
                        cr.reduced = components[j].reduce;
                        if (!components[j].reduce) {
                            reduced_frfs.push_back(full_frfs[j]);
                            run.components.push_back(std::move(cr));
                            continue;
                        }
                        const auto& problem = *problems.at(static_cast<int>(j));
                        const auto res = run_method(method, problem, brute_budget);
                        cr.preselected = problem.candidate_count();
                        cr.selected_mode_ids = res.selected_mode_ids;
                        cr.satisfied = res.satisfied;
                        cr.iterations = res.iterations;
                        cr.frf_evals = res.frf_evals;
                        cr.scaled_error_max = problem.scaled_max(res.selected_positions);
                        run.total_selected += static_cast<int>(res.selected_mode_ids.size());
                        run.all_components_satisfied &= res.satisfied;
                        reduced_frfs.push_back(problem.reduced_frf(res.selected_positions));
                        run.components.push_back(std::move(cr));
                    }
                    run.guarantee_claimed = run.all_components_satisfied;
                    run.aposteriori = verify_aposteriori(full_frfs, reduced_frfs, kc,
                                                         point.gamma_threshold, grid, &assembly);
                } catch (const std::exception& e) {
                    run.error = e.what();
                }
                run.wall_seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                point.methods.push_back(std::move(run));
            }

            if (opts.run_baselines) {
                for (double mult : cfg.baselines) {
                    MethodRun run;
                    char label[32];
                    std::snprintf(label, sizeof(label), "baseline_%gx", mult);
                    run.method = label;
                    run.is_baseline = true;
                    const auto t0 = std::chrono::steady_clock::now();
                    try {
                        std::vector<FrfData> reduced_frfs;
                        for (size_t j = 0; j < components.size(); ++j) {
                            ComponentRun cr;
                            cr.component = components[j].name;
                            cr.reduced = components[j].reduce;
                            if (!components[j].reduce) {
                                reduced_frfs.push_back(full_frfs[j]);
                            } else {
                                cr.selected_mode_ids =
                                    modes_below(components[j].modes, kTwoPi * mult * f_max);
                                cr.preselected = components[j].modes.elastic_count();
                                reduced_frfs.push_back(truncation_frf(
                                    components[j], cr.selected_mode_ids, grid));
                                run.total_selected +=
                                    static_cast<int>(cr.selected_mode_ids.size());
                            }
                            run.components.push_back(std::move(cr));
                        }
                        run.aposteriori = verify_aposteriori(full_frfs, reduced_frfs, kc,
                                                             point.gamma_threshold, grid,
                                                             &assembly);
                    } catch (const std::exception& e) {
                        run.error = e.what();
                    }
                    run.wall_seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
                    point.methods.push_back(std::move(run));
                }
            }
        } catch (const std::exception& e) {
            point.errors.push_back(e.what());
        }
        report.points.push_back(std::move(point));
    }
    return report;
}

} // namespace cmsrom
