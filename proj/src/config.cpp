#include "cmsrom/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cmsrom {

using nlohmann::json;

const std::vector<std::string> kKnownMethods = {
    "freq_ordered",       "rmi_a_apriori", "rmi_a_incremental",
    "rmi_r_apriori",      "rmi_r_incremental", "brute_force",
};

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& field,
                       const std::string& message) {
    throw std::runtime_error(origin + ": field '" + field + "': " + message);
}

double require_number(const json& j, const std::string& origin, const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
    if (!j.contains(key) || !j[key].is_number()) fail(origin, path, "required number missing");
    return j[key].get<double>();
}

Matrix parse_dense(const json& rows, const std::string& origin, const std::string& field) {
    if (!rows.is_array() || rows.empty() || !rows[0].is_array())
        fail(origin, field, "expected a dense array of rows");
    const size_t cols = rows[0].size();
    Matrix m(rows.size(), cols);
    for (size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != cols)
            fail(origin, field, "ragged rows at row " + std::to_string(i));
        for (size_t j = 0; j < cols; ++j) {
            if (!rows[i][j].is_number())
                fail(origin, field, "non-numeric entry at (" + std::to_string(i) + "," +
                                        std::to_string(j) + ")");
            m(i, j) = rows[i][j].get<double>();
        }
    }
    return m;
}

BeamPort parse_port(const json& p, const std::string& origin, const std::string& field) {
    BeamPort port;
    if (!p.contains("node") || !p["node"].is_number_integer())
        fail(origin, field, "port needs an integer 'node'");
    port.node = p["node"].get<int>();
    const std::string dof = p.value("dof", "translation");
    if (dof == "translation")
        port.dof = BeamDof::translation;
    else if (dof == "rotation")
        port.dof = BeamDof::rotation;
    else
        fail(origin, field, "port dof must be 'translation' or 'rotation'");
    port.label = p.value("label", "");
    return port;
}

std::vector<BeamPort> parse_ports(const json& arr, const std::string& origin,
                                  const std::string& field) {
    std::vector<BeamPort> out;
    if (!arr.is_array()) fail(origin, field, "expected an array of ports");
    for (const auto& p : arr) out.push_back(parse_port(p, origin, field));
    return out;
}

} // namespace

std::vector<double> ExperimentConfig::sweep_points() const {
    if (sweep.variable == SweepSpec::Variable::none)
        return {std::numeric_limits<double>::quiet_NaN()};
    return sweep.values;
}

double ExperimentConfig::effective_f_max(double sweep_value) const {
    if (sweep.variable == SweepSpec::Variable::f_max_hz && std::isfinite(sweep_value))
        return sweep_value;
    return f_max_hz;
}

Matrix ExperimentConfig::effective_k_bb(double sweep_value) const {
    if (sweep.variable == SweepSpec::Variable::coupling_stiffness && std::isfinite(sweep_value)) {
        if (!has_pattern)
            throw std::runtime_error("config: coupling_stiffness sweep needs k_bb_sweep_pattern");
        return k_bb + sweep_value * k_bb_pattern;
    }
    return k_bb;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(origin + ": JSON parse error: " + e.what());
    }

    ExperimentConfig cfg;
    cfg.raw_text = text;
    cfg.config_hash = fnv1a64(text);
    cfg.source_path = origin;
    cfg.name = j.value("name", "experiment");
    cfg.seed = j.value("seed", 1ull);

    if (!j.contains("components") || !j["components"].is_array() || j["components"].empty())
        fail(origin, "components", "at least one component required");

    std::set<std::string> names;
    for (const auto& c : j["components"]) {
        ComponentConfig cc;
        cc.name = c.value("name", "");
        if (cc.name.empty()) fail(origin, "components[].name", "component name required");
        if (!names.insert(cc.name).second)
            fail(origin, "components[].name", "duplicate component '" + cc.name + "'");
        const std::string type = c.value("type", "");
        cc.modal_damping = c.value("modal_damping", 0.0);
        if (cc.modal_damping < 0.0 || cc.modal_damping >= 1.0)
            fail(origin, "components[].modal_damping", "need 0 <= ratio < 1");
        cc.reduce = c.value("reduce", true);

        if (type == "euler_beam") {
            cc.kind = ComponentConfig::Kind::euler_beam;
            if (!c.contains("beam")) fail(origin, "components[].beam", "beam parameters required");
            const auto& b = c["beam"];
            cc.beam.length = require_number(b, origin, "beam.length");
            cc.beam.elem_count = static_cast<int>(require_number(b, origin, "beam.elements"));
            cc.beam.area = require_number(b, origin, "beam.area");
            cc.beam.second_moment = require_number(b, origin, "beam.second_moment");
            cc.beam.youngs = require_number(b, origin, "beam.youngs");
            cc.beam.density = require_number(b, origin, "beam.density");
            cc.beam.clamped_end = b.value("clamped", true);

            if (!c.contains("ports")) fail(origin, "components[].ports", "ports required");
            if (c["ports"].is_array()) {
                cc.input_ports = parse_ports(c["ports"], origin, "components[].ports");
                cc.output_ports = cc.input_ports; // collocated shorthand
            } else {
                cc.input_ports = parse_ports(c["ports"]["inputs"], origin, "ports.inputs");
                cc.output_ports = parse_ports(c["ports"]["outputs"], origin, "ports.outputs");
            }
            if (cc.input_ports.empty() || cc.output_ports.empty())
                fail(origin, "components[].ports", "components need input and output ports");
        } else if (type == "matrix_files") {
            cc.kind = ComponentConfig::Kind::matrix_files;
            if (!c.contains("files")) fail(origin, "components[].files", "files map required");
            for (const auto& [key, value] : c["files"].items()) {
                if (key != "mass" && key != "stiffness" && key != "damping" && key != "input" &&
                    key != "output")
                    fail(origin, "components[].files", "unknown matrix role '" + key + "'");
                cc.files[key] = value.get<std::string>();
            }
            if (!cc.files.count("mass") || !cc.files.count("stiffness") ||
                !cc.files.count("input") || !cc.files.count("output"))
                fail(origin, "components[].files", "mass, stiffness, input, output are required");
            if (!c.contains("boundary_dofs") || !c["boundary_dofs"].is_array())
                fail(origin, "components[].boundary_dofs", "boundary DOF list required");
            for (const auto& b : c["boundary_dofs"]) cc.boundary_dofs.push_back(b.get<int>());
        } else {
            fail(origin, "components[].type", "unknown type '" + type + "'");
        }
        cfg.components.push_back(std::move(cc));
    }

    if (!j.contains("interconnection"))
        fail(origin, "interconnection", "interconnection block required");
    const auto& ic = j["interconnection"];
    if (!ic.contains("k_bb")) fail(origin, "interconnection.k_bb", "dense block required");
    if (!ic.contains("k_ba")) fail(origin, "interconnection.k_ba", "dense block required");
    if (!ic.contains("k_ab")) fail(origin, "interconnection.k_ab", "dense block required");
    cfg.k_bb = parse_dense(ic["k_bb"], origin, "interconnection.k_bb");
    cfg.k_ba = parse_dense(ic["k_ba"], origin, "interconnection.k_ba");
    cfg.k_ab = parse_dense(ic["k_ab"], origin, "interconnection.k_ab");
    if (ic.contains("k_bb_sweep_pattern")) {
        cfg.k_bb_pattern = parse_dense(ic["k_bb_sweep_pattern"], origin, "k_bb_sweep_pattern");
        cfg.has_pattern = true;
        if (cfg.k_bb_pattern.rows() != cfg.k_bb.rows() ||
            cfg.k_bb_pattern.cols() != cfg.k_bb.cols())
            fail(origin, "k_bb_sweep_pattern", "pattern shape must match k_bb");
    }

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        cfg.f_min_hz = require_number(g, origin, "grid.f_min_hz");
        cfg.f_max_hz = require_number(g, origin, "grid.f_max_hz");
        cfg.grid_points = static_cast<int>(require_number(g, origin, "grid.points"));
    }
    if (cfg.grid_points < 2) fail(origin, "grid.points", "need at least 2 points");
    if (!(cfg.f_min_hz > 0.0) || !(cfg.f_max_hz > cfg.f_min_hz))
        fail(origin, "grid", "need 0 < f_min_hz < f_max_hz");

    if (j.contains("requirement")) {
        const auto& r = j["requirement"];
        cfg.gamma = require_number(r, origin, "requirement.gamma");
        cfg.weight_scale = r.value("weight_scale", 1.0);
    }
    if (!(cfg.gamma > 0.0)) fail(origin, "requirement.gamma", "gamma must be > 0");
    if (!(cfg.weight_scale > 0.0)) fail(origin, "requirement.weight_scale", "scale must be > 0");

    cfg.preselection_multiplier = j.value("preselection_multiplier", 5.0);
    if (!(cfg.preselection_multiplier >= 1.0))
        fail(origin, "preselection_multiplier", "must be >= 1");

    if (j.contains("methods")) {
        for (const auto& m : j["methods"]) {
            const std::string name = m.get<std::string>();
            if (std::find(kKnownMethods.begin(), kKnownMethods.end(), name) == kKnownMethods.end())
                fail(origin, "methods", "unknown method '" + name + "'");
            cfg.methods.push_back(name);
        }
    } else {
        cfg.methods = kKnownMethods;
    }

    if (j.contains("baselines"))
        for (const auto& b : j["baselines"]) cfg.baselines.push_back(b.get<double>());

    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        const std::string var = s.value("variable", "");
        if (var == "coupling_stiffness")
            cfg.sweep.variable = SweepSpec::Variable::coupling_stiffness;
        else if (var == "f_max_hz")
            cfg.sweep.variable = SweepSpec::Variable::f_max_hz;
        else
            fail(origin, "sweep.variable", "must be 'coupling_stiffness' or 'f_max_hz'");
        if (!s.contains("values") || !s["values"].is_array() || s["values"].empty())
            fail(origin, "sweep.values", "non-empty value list required");
        for (const auto& v : s["values"]) cfg.sweep.values.push_back(v.get<double>());
        if (cfg.sweep.variable == SweepSpec::Variable::coupling_stiffness && !cfg.has_pattern)
            fail(origin, "sweep", "coupling_stiffness sweep needs interconnection.k_bb_sweep_pattern");
    }

    cfg.brute_budget = j.value("brute_force_budget", 2e6);

    // cross-checks: port dimensions against the interconnection blocks
    int m_b = 0, p_b = 0;
    for (const auto& c : cfg.components) {
        if (c.kind == ComponentConfig::Kind::euler_beam) {
            m_b += static_cast<int>(c.input_ports.size());
            p_b += static_cast<int>(c.output_ports.size());
        } else {
            // dims known only after loading the matrices; checked in the pipeline
            m_b = -1;
            break;
        }
    }
    if (m_b >= 0) {
        if (cfg.k_bb.rows() != m_b || cfg.k_bb.cols() != p_b)
            fail(origin, "interconnection.k_bb",
                 "expected " + std::to_string(m_b) + "x" + std::to_string(p_b) +
                     " from the component ports, got " + std::to_string(cfg.k_bb.rows()) + "x" +
                     std::to_string(cfg.k_bb.cols()));
        if (cfg.k_ba.rows() != m_b)
            fail(origin, "interconnection.k_ba", "row count must equal total component inputs");
        if (cfg.k_ab.cols() != p_b)
            fail(origin, "interconnection.k_ab", "column count must equal total component outputs");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    auto cfg = parse_config(buf.str(), path);

    // resolve matrix file paths against the config directory
    const auto dir = std::filesystem::path(path).parent_path();
    for (auto& c : cfg.components)
        for (auto& [role, file] : c.files) {
            std::filesystem::path p(file);
            if (p.is_relative()) file = (dir / p).string();
        }
    return cfg;
}

} // namespace cmsrom
