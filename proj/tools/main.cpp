#include "cmsrom/matrixio.hpp"
#include "cmsrom/modal.hpp"
#include "cmsrom/pipeline.hpp"
#include "cmsrom/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

using namespace cmsrom;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string format = "csv";
    std::vector<std::string> methods;
    double brute_budget = -1.0;
    int parallel = 1;
    double sweep_value = std::numeric_limits<double>::quiet_NaN();
    bool has_sweep_value = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_output = true) {
    cmd->add_option("--config", args.config_path, "experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    if (with_output) {
        cmd->add_option("--out", args.out_dir, "output directory");
        cmd->add_option("--format", args.format, "report format")
            ->check(CLI::IsMember({"csv", "json"}));
    }
    cmd->add_option("--methods", args.methods, "selection methods to run")->delimiter(',');
    cmd->add_option("--brute-budget", args.brute_budget,
                    "maximum brute-force subset checks before refusal");
    cmd->add_option("--parallel", args.parallel, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--sweep-value", args.sweep_value, "evaluate one sweep point only")
        ->each([&args](const std::string&) { args.has_sweep_value = true; });
}

double pick_sweep_value(const ExperimentConfig& cfg, const CommonArgs& args) {
    if (args.has_sweep_value) return args.sweep_value;
    const auto points = cfg.sweep_points();
    if (cfg.sweep.variable != SweepSpec::Variable::none && points.size() > 1)
        std::cerr << "note: config defines a sweep; using its first value "
                  << points.front() << " (override with --sweep-value)\n";
    return points.front();
}

ExperimentConfig single_point_config(ExperimentConfig cfg, double value) {
    if (cfg.sweep.variable != SweepSpec::Variable::none) cfg.sweep.values = {value};
    return cfg;
}

void print_point_summary(const SweepPointRun& point, const std::string& sweep_variable) {
    std::cout << "== sweep point";
    if (sweep_variable != "none") std::cout << " " << sweep_variable << " = " << point.sweep_value;
    std::cout << " (f_max " << point.f_max_hz << " Hz, bound " << point.gamma_threshold << ")\n";
    if (!point.infeasible_points.empty())
        std::cout << "   translation infeasible at " << point.infeasible_points.size()
                  << " grid points\n";
    for (const auto& e : point.errors) std::cout << "   error: " << e << "\n";
    for (const auto& run : point.methods) {
        std::cout << "   " << run.method << ": ";
        if (!run.error.empty()) {
            std::cout << "ERROR: " << run.error << "\n";
            continue;
        }
        std::cout << "modes " << run.total_selected;
        std::cout << " [";
        bool first = true;
        for (const auto& comp : run.components) {
            if (!comp.reduced) continue;
            if (!first) std::cout << " ";
            std::cout << comp.component << ":" << comp.selected_mode_ids.size();
            first = false;
        }
        std::cout << "]";
        if (!run.is_baseline)
            std::cout << (run.guarantee_claimed ? " guaranteed" : " NOT-SATISFIED");
        std::cout << " | rel_err_max " << run.aposteriori.rel_max
                  << (run.aposteriori.rel_ok ? " < " : " >= ") << point.gamma_threshold
                  << (run.aposteriori.rel_ok ? " ok" : " VIOLATED") << "\n";
    }
}

int run_report_command(const CommonArgs& args, bool full_sweep) {
    auto cfg = load_config(args.config_path);
    if (!full_sweep) cfg = single_point_config(cfg, pick_sweep_value(cfg, args));

    PipelineOptions opts;
    opts.threads = args.parallel;
    opts.methods = args.methods;
    opts.brute_budget = args.brute_budget;
    const auto report = run_pipeline(cfg, opts);

    for (const auto& point : report.points) print_point_summary(point, report.sweep_variable);
    const auto files = emit_report(report, args.out_dir, args.format);
    std::cout << "report: " << files.report_path << "\ncurves: " << files.curves_path
              << "\ntimings: " << files.timings_path << "\n";

    const bool ok = report.all_guarantees_verified();
    std::cout << (ok ? "all requested guarantees verified\n"
                     : "NOT all requested guarantees verified\n");
    return ok ? 0 : 1;
}

int cmd_translate(const CommonArgs& args) {
    const auto cfg = load_config(args.config_path);
    const auto components = build_components(cfg);
    const double value = pick_sweep_value(cfg, args);
    const auto ws = translate_for_point(cfg, components, value, args.parallel);

    std::filesystem::create_directories(args.out_dir);
    const std::string path = args.out_dir + "/weights.json";
    std::ofstream out(path, std::ios::binary);
    out << weights_to_json(ws);
    out.close();

    const auto infeasible = ws.infeasible_points();
    std::cout << "weights: " << path << " (" << ws.at.size() << " grid points, "
              << infeasible.size() << " infeasible)\n";
    return infeasible.empty() ? 0 : 1;
}

int cmd_select(const CommonArgs& args, const std::string& weights_path,
               const std::string& component, const std::string& method) {
    const auto cfg = load_config(args.config_path);
    const auto components = build_components(cfg);

    std::ifstream in(weights_path);
    if (!in) throw std::runtime_error("cannot open weights file: " + weights_path);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto ws = weights_from_json(buf.str());
    ws.grid.validate();

    int index = -1;
    for (size_t j = 0; j < components.size(); ++j)
        if (components[j].name == component) index = static_cast<int>(j);
    if (index < 0) throw std::runtime_error("unknown component '" + component + "'");

    const auto& comp = components[index];
    const auto frf = frf_direct(comp.model, ws.grid, args.parallel);

    std::vector<Vector> v_req(ws.at.size()), w_req(ws.at.size());
    std::vector<std::uint8_t> mask(ws.at.size(), 1);
    for (size_t i = 0; i < ws.at.size(); ++i) {
        if (ws.at[i].feasible) {
            v_req[i] = ws.at[i].v[index];
            w_req[i] = ws.at[i].w[index];
        } else {
            v_req[i] = Vector::Zero(ws.port_dims.inputs[index]);
            w_req[i] = Vector::Zero(ws.port_dims.outputs[index]);
            mask[i] = 0;
        }
    }

    const double f_max = ws.grid.hz(ws.grid.size() - 1);
    const double limit = 2.0 * std::numbers::pi * cfg.preselection_multiplier * f_max;
    std::vector<int> preselection;
    for (int i = comp.modes.rigid_count; i < comp.modes.count(); ++i)
        if (comp.modes.frequencies_rad(i) <= limit) preselection.push_back(i);

    SelectionProblem problem(comp.model, comp.modes, preselection, v_req, w_req, ws.grid, frf,
                             mask);
    SelectionResult res;
    if (method == "freq_ordered") res = select_frequency_ordered(problem);
    else if (method == "rmi_a_apriori") res = select_rmi_a_apriori(problem);
    else if (method == "rmi_a_incremental") res = select_rmi_a_incremental(problem);
    else if (method == "rmi_r_apriori") res = select_rmi_r_apriori(problem);
    else if (method == "rmi_r_incremental") res = select_rmi_r_incremental(problem);
    else if (method == "brute_force")
        res = select_brute_force(problem, -1, args.brute_budget >= 0 ? args.brute_budget
                                                                     : cfg.brute_budget);
    else throw std::runtime_error("unknown method '" + method + "'");

    std::cout << component << " " << method << ": selected " << res.selected_mode_ids.size()
              << " of " << problem.candidate_count() << " modes [";
    for (size_t i = 0; i < res.selected_mode_ids.size(); ++i)
        std::cout << (i ? ";" : "") << res.selected_mode_ids[i];
    std::cout << "] satisfied=" << (res.satisfied ? "yes" : "no")
              << " iterations=" << res.iterations << " frf_evals=" << res.frf_evals << "\n";
    return res.satisfied ? 0 : 1;
}

int cmd_verify(const CommonArgs& args, const std::vector<std::string>& mode_specs) {
    const auto cfg = load_config(args.config_path);
    const auto components = build_components(cfg);
    const double value = pick_sweep_value(cfg, args);
    const double f_max = cfg.effective_f_max(value);
    const auto grid = FrequencyGrid::log_spaced(cfg.f_min_hz, f_max, cfg.grid_points);
    const auto kc = make_interconnection(cfg, components, value);

    std::map<std::string, std::vector<int>> selections;
    for (const auto& spec : mode_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--modes expects component=id;id;..., got '" + spec + "'");
        std::vector<int> ids;
        std::stringstream ss(spec.substr(eq + 1));
        std::string token;
        while (std::getline(ss, token, ';'))
            if (!token.empty()) ids.push_back(std::stoi(token));
        selections[spec.substr(0, eq)] = ids;
    }

    std::vector<FrfData> full, reduced;
    for (const auto& comp : components) {
        full.push_back(frf_direct(comp.model, grid, args.parallel));
        if (!comp.reduce) {
            reduced.push_back(full.back());
            continue;
        }
        const auto it = selections.find(comp.name);
        if (it == selections.end())
            throw std::runtime_error("verify: no --modes given for reduced component '" +
                                     comp.name + "'");
        const auto basis = build_hh_basis(comp.model, comp.modes, it->second);
        reduced.push_back(frf_direct(reduce(comp.model, basis).model, grid, args.parallel));
    }

    const auto h_a = couple(block_diag_frf(full), kc);
    const auto assembly = design_relative_weights(h_a, cfg.gamma, cfg.weight_scale);
    const double bound = cfg.gamma / (cfg.weight_scale * cfg.weight_scale);
    const auto result = verify_aposteriori(full, reduced, kc, bound, grid, &assembly);

    std::cout << "rel_err_max " << result.rel_max << (result.rel_ok ? " < " : " >= ") << bound
              << (result.rel_ok ? " ok" : " VIOLATED") << "; weighted_max "
              << result.weighted_max << (result.weighted_ok ? " ok" : " VIOLATED") << "\n";
    return (result.rel_ok && result.weighted_ok) ? 0 : 1;
}

int cmd_baseline(const CommonArgs& args, double multiplier) {
    const auto cfg = load_config(args.config_path);
    const auto components = build_components(cfg);
    const double value = pick_sweep_value(cfg, args);
    const auto result = standard_cutoff_baseline(cfg, components, multiplier, value, args.parallel);

    std::cout << "baseline " << multiplier << "x f_max:";
    for (const auto& comp : result.components) {
        std::cout << " " << comp.component << "=";
        if (comp.reduced)
            std::cout << comp.selected_mode_ids.size();
        else
            std::cout << "full";
    }
    std::cout << " total=" << result.total_selected << "; rel_err_max "
              << result.aposteriori.rel_max << (result.aposteriori.rel_ok ? " ok" : " VIOLATED")
              << "\n";
    return (result.aposteriori.rel_ok && result.aposteriori.weighted_ok) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guaranteed-accuracy component mode synthesis toolkit"};
    app.require_subcommand(1);

    CommonArgs analyze_args, sweep_args, translate_args, select_args, verify_args, baseline_args;

    auto* analyze = app.add_subcommand("analyze", "run one sweep point end to end");
    add_common(analyze, analyze_args);

    auto* sweep = app.add_subcommand("sweep", "run every sweep point");
    add_common(sweep, sweep_args);

    auto* translate_cmd =
        app.add_subcommand("translate", "export per-frequency component requirements");
    add_common(translate_cmd, translate_args);

    auto* select = app.add_subcommand("select", "select modes for one component using exported weights");
    add_common(select, select_args, /*with_output=*/false);
    std::string weights_path, component, method = "rmi_a_incremental";
    select->add_option("--weights", weights_path, "weights JSON from 'translate'")
        ->required()
        ->check(CLI::ExistingFile);
    select->add_option("--component", component, "component name")->required();
    select->add_option("--method", method, "selection method");

    auto* verify = app.add_subcommand("verify", "a-posteriori assembly accuracy check");
    add_common(verify, verify_args, /*with_output=*/false);
    std::vector<std::string> mode_specs;
    verify->add_option("--modes", mode_specs, "per-component selection, component=id;id;...")
        ->required();

    auto* baseline = app.add_subcommand("baseline", "standard cut-off frequency reduction");
    add_common(baseline, baseline_args, /*with_output=*/false);
    double multiplier = 3.0;
    baseline->add_option("--multiplier", multiplier, "cut-off as a multiple of f_max");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return run_report_command(analyze_args, /*full_sweep=*/false);
        if (sweep->parsed()) return run_report_command(sweep_args, /*full_sweep=*/true);
        if (translate_cmd->parsed()) return cmd_translate(translate_args);
        if (select->parsed()) return cmd_select(select_args, weights_path, component, method);
        if (verify->parsed()) return cmd_verify(verify_args, mode_specs);
        if (baseline->parsed()) return cmd_baseline(baseline_args, multiplier);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
