#include "cmsrom/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace cmsrom {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_ids(const std::vector<int>& ids) {
    std::string out;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(ids[i]);
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

} // namespace

std::string report_to_csv(const RunReport& report) {
    std::ostringstream out;
    out << "config,config_hash,sweep_variable,sweep_value,f_max_hz,method,is_baseline,component,"
           "reduced,n_preselected,r_selected,selected_modes,comp_satisfied,iterations,frf_evals,"
           "scaled_error_max,total_selected,all_satisfied,guarantee_claimed,weighted_max,"
           "weighted_ok,rel_err_max,rel_ok,gamma_threshold,n_infeasible,error\n";
    for (const auto& point : report.points) {
        for (const auto& run : point.methods) {
            auto method_cols = [&](std::ostringstream& row) {
                row << report.config_name << ',' << report.config_hash << ','
                    << report.sweep_variable << ',' << fmt(point.sweep_value) << ','
                    << fmt(point.f_max_hz) << ',' << run.method << ','
                    << (run.is_baseline ? 1 : 0) << ',';
            };
            if (run.components.empty()) {
                std::ostringstream row;
                method_cols(row);
                row << ",,,,,,,," << run.total_selected << ','
                    << (run.all_components_satisfied ? 1 : 0) << ','
                    << (run.guarantee_claimed ? 1 : 0) << ',' << fmt(run.aposteriori.weighted_max)
                    << ',' << (run.aposteriori.weighted_ok ? 1 : 0) << ','
                    << fmt(run.aposteriori.rel_max) << ',' << (run.aposteriori.rel_ok ? 1 : 0)
                    << ',' << fmt(point.gamma_threshold) << ','
                    << point.infeasible_points.size() << ",\"" << run.error << "\"\n";
                out << row.str();
                continue;
            }
            for (const auto& comp : run.components) {
                std::ostringstream row;
                method_cols(row);
                row << comp.component << ',' << (comp.reduced ? 1 : 0) << ',' << comp.preselected
                    << ',' << comp.selected_mode_ids.size() << ','
                    << join_ids(comp.selected_mode_ids) << ',' << (comp.satisfied ? 1 : 0) << ','
                    << comp.iterations << ',' << comp.frf_evals << ','
                    << fmt(comp.scaled_error_max) << ',' << run.total_selected << ','
                    << (run.all_components_satisfied ? 1 : 0) << ','
                    << (run.guarantee_claimed ? 1 : 0) << ',' << fmt(run.aposteriori.weighted_max)
                    << ',' << (run.aposteriori.weighted_ok ? 1 : 0) << ','
                    << fmt(run.aposteriori.rel_max) << ',' << (run.aposteriori.rel_ok ? 1 : 0)
                    << ',' << fmt(point.gamma_threshold) << ','
                    << point.infeasible_points.size() << ",\"" << run.error << "\"\n";
                out << row.str();
            }
        }
    }
    return out.str();
}

std::string curves_to_csv(const RunReport& report) {
    std::ostringstream out;
    out << "sweep_value,method,point_index,rel_error,defined,bound\n";
    for (const auto& point : report.points) {
        for (const auto& run : point.methods) {
            for (size_t i = 0; i < run.aposteriori.rel_values.size(); ++i) {
                out << fmt(point.sweep_value) << ',' << run.method << ',' << i << ','
                    << fmt(run.aposteriori.rel_values[i]) << ','
                    << (run.aposteriori.rel_defined.empty() ? 1
                                                            : int(run.aposteriori.rel_defined[i]))
                    << ',' << fmt(point.gamma_threshold) << '\n';
            }
        }
    }
    return out.str();
}

std::string timings_to_csv(const RunReport& report) {
    std::ostringstream out;
    out << "sweep_value,method,wall_seconds\n";
    for (const auto& point : report.points)
        for (const auto& run : point.methods)
            out << fmt(point.sweep_value) << ',' << run.method << ',' << fmt(run.wall_seconds)
                << '\n';
    return out.str();
}

std::string report_to_json(const RunReport& report) {
    nlohmann::json j;
    j["format"] = "cmsrom-report";
    j["version"] = 1;
    j["config"] = report.config_name;
    j["config_hash"] = report.config_hash;
    j["sweep_variable"] = report.sweep_variable;
    j["gamma"] = report.gamma;
    nlohmann::json points = nlohmann::json::array();
    for (const auto& point : report.points) {
        nlohmann::json p;
        p["sweep_value"] = point.sweep_value;
        p["f_max_hz"] = point.f_max_hz;
        p["gamma_threshold"] = point.gamma_threshold;
        p["infeasible_points"] = point.infeasible_points;
        p["errors"] = point.errors;
        nlohmann::json methods = nlohmann::json::array();
        for (const auto& run : point.methods) {
            nlohmann::json m;
            m["method"] = run.method;
            m["is_baseline"] = run.is_baseline;
            m["total_selected"] = run.total_selected;
            m["all_components_satisfied"] = run.all_components_satisfied;
            m["guarantee_claimed"] = run.guarantee_claimed;
            m["weighted_max"] = run.aposteriori.weighted_max;
            m["weighted_ok"] = run.aposteriori.weighted_ok;
            m["rel_err_max"] = run.aposteriori.rel_max;
            m["rel_ok"] = run.aposteriori.rel_ok;
            m["rel_curve"] = run.aposteriori.rel_values;
            m["error"] = run.error;
            nlohmann::json comps = nlohmann::json::array();
            for (const auto& comp : run.components) {
                nlohmann::json c;
                c["component"] = comp.component;
                c["reduced"] = comp.reduced;
                c["n_preselected"] = comp.preselected;
                c["selected_mode_ids"] = comp.selected_mode_ids;
                c["satisfied"] = comp.satisfied;
                c["iterations"] = comp.iterations;
                c["frf_evals"] = comp.frf_evals;
                c["scaled_error_max"] = comp.scaled_error_max;
                comps.push_back(std::move(c));
            }
            m["components"] = std::move(comps);
            methods.push_back(std::move(m));
        }
        p["methods"] = std::move(methods);
        points.push_back(std::move(p));
    }
    j["points"] = std::move(points);
    return j.dump(2);
}

EmittedFiles emit_report(const RunReport& report, const std::string& out_dir,
                         const std::string& format) {
    if (format != "csv" && format != "json")
        throw std::invalid_argument("emit_report: format must be 'csv' or 'json'");
    std::filesystem::create_directories(out_dir);
    EmittedFiles files;
    if (format == "csv") {
        files.report_path = out_dir + "/report.csv";
        write_file(files.report_path, report_to_csv(report));
    } else {
        files.report_path = out_dir + "/report.json";
        write_file(files.report_path, report_to_json(report));
    }
    files.curves_path = out_dir + "/curves.csv";
    write_file(files.curves_path, curves_to_csv(report));
    files.timings_path = out_dir + "/timings.csv";
    write_file(files.timings_path, timings_to_csv(report));
    return files;
}

} // namespace cmsrom
