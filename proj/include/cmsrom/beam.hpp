#pragma once

#include "cmsrom/types.hpp"

namespace cmsrom {

/// Parameters of a planar Euler-Bernoulli bending beam, 2 DOF per node
/// (transverse translation + rotation), cubic Hermite elements with
/// consistent mass. When clamped, node 0 is fixed and its two DOF are
/// eliminated, so n = 2 * elem_count.
struct EulerBeamParams {
    double length = 1.0;        // m
    int elem_count = 1;
    double area = 1.0;          // m^2
    double second_moment = 1.0; // m^4
    double youngs = 1.0;        // Pa
    double density = 1.0;       // kg/m^3
    bool clamped_end = true;
};

enum class BeamDof { translation, rotation };

/// Bare structural matrices: zero damping, empty ports/boundary set.
SecondOrderModel build_euler_beam(const EulerBeamParams& p);

/// Index of a node DOF in the assembled model. Nodes are numbered 0..elem_count
/// from the (possibly clamped) end; for a clamped beam node 0 has no DOF.
int beam_dof_index(const EulerBeamParams& p, int node, BeamDof dof);

/// One force/displacement port at a beam node DOF.
struct BeamPort {
    int node = 0;
    BeamDof dof = BeamDof::translation;
    std::string label;
};

/// Attaches unit selection input/output maps at the given ports and marks the
/// union of their DOF as the boundary set.
void attach_ports(SecondOrderModel& model, const EulerBeamParams& p,
                  const std::vector<BeamPort>& inputs, const std::vector<BeamPort>& outputs);

} // namespace cmsrom
