#pragma once

#include "cmsrom/types.hpp"

namespace cmsrom {

/// Port dimensions of the stacked component channels and the external channel.
struct PortDims {
    std::vector<int> inputs;  // m_j per component
    std::vector<int> outputs; // p_j per component
    int ext_inputs = 0;       // m_A
    int ext_outputs = 0;      // p_A

    int component_count() const { return static_cast<int>(inputs.size()); }
    int total_inputs() const;  // m_B
    int total_outputs() const; // p_B
    int input_offset(int j) const;
    int output_offset(int j) const;
};

/// Frequency-independent interconnection
///   [u_B; y_A] = [k_bb k_ba; k_ab 0] [y_B; u_A].
struct Interconnection {
    Matrix k_bb; // m_B x p_B: stacked outputs -> stacked inputs
    Matrix k_ba; // m_B x m_A: external inputs -> stacked inputs
    Matrix k_ab; // p_A x p_B: stacked outputs -> external outputs
    PortDims port_dims;

    void validate() const;
};

struct AssemblyFrf {
    FrfData h_a;                        // p_A x m_A
    std::vector<double> resolvent_cond; // condition estimate of (I - k_bb H_B) per point
};

/// Block-diagonal stack diag(H^(1), ..., H^(k)); all inputs share the grid.
FrfData block_diag_frf(const std::vector<FrfData>& components);

/// H_A(iw) = k_ab H_B (I - k_bb H_B)^-1 k_ba per grid point. Near-singular
/// resolvents (condition > cond_limit) flag the sample.
AssemblyFrf couple(const FrfData& h_b, const Interconnection& kc, double cond_limit = 1e12);

/// E_A = H_A_reduced - H_A_full per grid point.
FrfData assembly_error(const AssemblyFrf& full, const AssemblyFrf& reduced);

/// The requirement-translation matrix at one frequency sample:
///   N = [k_bb (I - H_B k_bb)^-1 , (I - k_bb H_B)^-1 k_ba ;
///        k_ab (I - H_B k_bb)^-1 , 0]
CMatrix build_n(const CMatrix& h_b_sample, const Interconnection& kc);

struct RelativeError {
    std::vector<double> values; // ||E_A|| / ||H_A|| per grid point
    std::vector<std::uint8_t> defined; // 0 where ||H_A|| = 0
};

RelativeError relative_error(const FrfData& e_a, const FrfData& h_a);

} // namespace cmsrom
