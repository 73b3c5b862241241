#pragma once

#include "cmsrom/types.hpp"

namespace cmsrom {

/// Reduction basis combining static constraint modes, inertia-relief modes
/// and boundary-uncoupled elastic modes. Column layout of the transformation
/// is [inertia_relief | uncoupled_elastic | constraint+boundary].
struct HhBasis {
    Matrix constraint_modes;   // n_i x n_b
    Matrix inertia_relief;     // n_i x r_ir
    Matrix uncoupled_elastic;  // n_i x r_eps
    std::vector<int> selected_mode_ids; // global indices into the component ModeSet
    int boundary_count = 0;

    int reduced_order() const {
        return static_cast<int>(inertia_relief.cols() + uncoupled_elastic.cols()) + boundary_count;
    }

    /// Transformation in partitioned ordering [internal; boundary].
    Matrix transformation_partitioned() const;
};

struct ReducedComponent {
    SecondOrderModel model; // r x r, boundary DOF are the trailing coordinates
    HhBasis basis;
    std::string parent_id;
};

/// Static constraint modes: solves K_ii Psi = -K_ib.
Matrix constraint_modes(const SecondOrderModel& model);

/// Inertia-relief modes, one per rigid-body mode; empty when there are none.
Matrix inertia_relief_modes(const SecondOrderModel& model, const ModeSet& modes, const Matrix& psi);

/// Elastic modes with the static boundary response removed, for the selected
/// (global, elastic-only) mode indices.
Matrix uncoupled_elastic_modes(const SecondOrderModel& model, const ModeSet& modes,
                               const Matrix& psi, const std::vector<int>& selection);

/// Assembles the basis and verifies the transformation has full column rank.
HhBasis assemble_basis(const Matrix& psi, const Matrix& phi_ir, const Matrix& phi_eps, int n_b,
                       const std::vector<int>& selected_mode_ids = {});

/// Convenience: full basis construction (one K_ii factorization reused).
HhBasis build_hh_basis(const SecondOrderModel& model, const ModeSet& modes,
                       const std::vector<int>& selection);

/// Congruence/projection reduction of all five model matrices.
ReducedComponent reduce(const SecondOrderModel& model, const HhBasis& basis);

/// E(iw) = H_reduced(iw) - H_full(iw), per grid point.
FrfData component_error(const FrfData& full_frf, const FrfData& reduced_frf);

} // namespace cmsrom
