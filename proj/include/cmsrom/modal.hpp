#pragma once

#include "cmsrom/types.hpp"

namespace cmsrom {

/// Solves the undamped eigenvalue problem (K - w^2 M) phi = 0 with a dense
/// symmetric-definite generalized eigensolver and returns all eigenpairs
/// with w <= cutoff_rad, mass-normalized and ascending. Rigid modes (w below
/// the rigid-mode threshold) come first.
ModeSet solve_undamped_modes(const SecondOrderModel& model, double cutoff_rad);

/// Damping matrix giving each elastic mode the ratio r: C = M Phi_e diag(2 r w) Phi_e^T M.
/// Rigid modes stay undamped. The input model's damping is replaced.
SecondOrderModel apply_modal_damping(const SecondOrderModel& model, const ModeSet& modes,
                                     double ratio);

/// Per-mode damping ratios phi^T C phi / (2 w); zero for rigid modes.
Vector modal_damping_ratios(const SecondOrderModel& model, const ModeSet& modes);

/// FRF by factorizing the complex dynamic stiffness per grid point.
/// Points where the solve is (near-)singular are flagged, not regularized.
FrfData frf_direct(const SecondOrderModel& model, const FrequencyGrid& grid, int threads = 1);

/// FRF by modal superposition over the given mode subset (indices into `modes`).
FrfData frf_modal(const ModeSet& modes, const SecondOrderModel& model, const FrequencyGrid& grid,
                  const std::vector<int>& subset);

} // namespace cmsrom
