#include "cmsrom/beam.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cmsrom {

namespace {

void check_params(const EulerBeamParams& p) {
    if (p.elem_count < 1) throw std::invalid_argument("euler beam: elem_count must be >= 1");
    if (!(p.length > 0.0) || !(p.area > 0.0) || !(p.second_moment > 0.0) ||
        !(p.youngs > 0.0) || !(p.density > 0.0))
        throw std::invalid_argument("euler beam: all physical parameters must be > 0");
}

} // namespace

SecondOrderModel build_euler_beam(const EulerBeamParams& p) {
    check_params(p);
    const int ne = p.elem_count;
    const double h = p.length / ne;
    const double ei = p.youngs * p.second_moment;
    const double rho_a = p.density * p.area;

    // element matrices, DOF order [w_i, th_i, w_j, th_j]
    Eigen::Matrix4d ke;
    ke << 12.0, 6.0 * h, -12.0, 6.0 * h,
          6.0 * h, 4.0 * h * h, -6.0 * h, 2.0 * h * h,
          -12.0, -6.0 * h, 12.0, -6.0 * h,
          6.0 * h, 2.0 * h * h, -6.0 * h, 4.0 * h * h;
    ke *= ei / (h * h * h);

    Eigen::Matrix4d me;
    me << 156.0, 22.0 * h, 54.0, -13.0 * h,
          22.0 * h, 4.0 * h * h, 13.0 * h, -3.0 * h * h,
          54.0, 13.0 * h, 156.0, -22.0 * h,
          -13.0 * h, -3.0 * h * h, -22.0 * h, 4.0 * h * h;
    me *= rho_a * h / 420.0;

    const int n_nodes = ne + 1;
    const int n_full = 2 * n_nodes;
    Matrix k_full = Matrix::Zero(n_full, n_full);
    Matrix m_full = Matrix::Zero(n_full, n_full);
    for (int e = 0; e < ne; ++e) {
        const int base = 2 * e;
        k_full.block<4, 4>(base, base) += ke;
        m_full.block<4, 4>(base, base) += me;
    }

    SecondOrderModel model;
    if (p.clamped_end) {
        const int n = n_full - 2; // drop node 0
        model.mass = m_full.bottomRightCorner(n, n);
        model.stiffness = k_full.bottomRightCorner(n, n);
    } else {
        model.mass = m_full;
        model.stiffness = k_full;
    }
    const int n = model.dof_count();
    model.damping = Matrix::Zero(n, n);
    model.input_map = Matrix::Zero(n, 0);
    model.output_map = Matrix::Zero(0, n);
    model.labels.resize(n);
    for (int node = 0; node <= ne; ++node) {
        if (p.clamped_end && node == 0) continue;
        const int w = beam_dof_index(p, node, BeamDof::translation);
        model.labels[w] = "node" + std::to_string(node) + ".w";
        model.labels[w + 1] = "node" + std::to_string(node) + ".theta";
    }
    return model;
}

int beam_dof_index(const EulerBeamParams& p, int node, BeamDof dof) {
    if (node < 0 || node > p.elem_count)
        throw std::invalid_argument("beam_dof_index: node out of range");
    if (p.clamped_end && node == 0)
        throw std::invalid_argument("beam_dof_index: node 0 is clamped");
    const int base = p.clamped_end ? 2 * (node - 1) : 2 * node;
    return base + (dof == BeamDof::translation ? 0 : 1);
}

void attach_ports(SecondOrderModel& model, const EulerBeamParams& p,
                  const std::vector<BeamPort>& inputs, const std::vector<BeamPort>& outputs) {
    const int n = model.dof_count();
    model.input_map = Matrix::Zero(n, static_cast<int>(inputs.size()));
    model.output_map = Matrix::Zero(static_cast<int>(outputs.size()), n);

    std::set<int> boundary;
    model.input_port_names.clear();
    model.output_port_names.clear();
    for (size_t i = 0; i < inputs.size(); ++i) {
        const int d = beam_dof_index(p, inputs[i].node, inputs[i].dof);
        model.input_map(d, static_cast<int>(i)) = 1.0;
        model.input_port_names.push_back(inputs[i].label.empty() ? model.labels[d]
                                                                 : inputs[i].label);
        boundary.insert(d);
    }
    for (size_t o = 0; o < outputs.size(); ++o) {
        const int d = beam_dof_index(p, outputs[o].node, outputs[o].dof);
        model.output_map(static_cast<int>(o), d) = 1.0;
        model.output_port_names.push_back(outputs[o].label.empty() ? model.labels[d]
                                                                   : outputs[o].label);
        boundary.insert(d);
    }
    model.boundary_dofs.assign(boundary.begin(), boundary.end());
}

} // namespace cmsrom
