#pragma once

#include "cmsrom/coupling.hpp"
#include "cmsrom/types.hpp"

#include <optional>

namespace cmsrom {

/// Requirement weights at one grid frequency. v/w hold the per-component
/// diagonals (sizes m_j and p_j), v_a/w_a the assembly diagonals (p_A, m_A),
/// d the block scalars (d_1..d_k, d_A).
struct FrequencyWeights {
    Vector v_a, w_a;
    std::vector<Vector> v, w;
    Vector d;
    double objective = std::numeric_limits<double>::quiet_NaN();
    bool feasible = false;
};

struct WeightSet {
    FrequencyGrid grid;
    PortDims port_dims;
    std::vector<FrequencyWeights> at;

    std::vector<int> infeasible_points() const;
};

/// Assembly-level diagonals per grid frequency.
struct AssemblyWeights {
    std::vector<Vector> v_a; // size p_A each
    std::vector<Vector> w_a; // size m_A each
};

/// V_A(w) = W_A(w) = scale * (gamma ||H_A(iw)||)^(-1/2) * I, encoding a bound
/// on the relative assembly error.
AssemblyWeights design_relative_weights(const AssemblyFrf& h_a, double gamma, double scale = 1.0);

struct TranslateOptions {
    double eps_psd = 1e-8;   // strictness margin on the unit-scaled block matrix
    int max_rounds = 20;     // alternating vw/d rounds
    double rel_tol = 1e-4;   // stop when the relative objective decrease falls below
    int threads = 1;
};

struct VwStepResult {
    std::vector<Vector> v, w; // component diagonals
    double objective = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    double min_eig_unit = std::numeric_limits<double>::quiet_NaN();
};

/// D fixed: minimize tr(V^-2) + tr(W^-2) over the free (component) diagonal
/// entries subject to [[W^-2 Dr^-1, N^H],[N, V^-2 Dl]] >= eps on the
/// unit-scaled matrix. Assembly blocks stay pinned to v_a, w_a.
VwStepResult vw_step(const Vector& d_scalars, const CMatrix& n_sample, const Vector& v_a,
                     const Vector& w_a, const PortDims& dims, double eps_psd = 1e-8,
                     const std::optional<std::pair<Vector, Vector>>& warm_xy = std::nullopt);

/// V, W fixed: block scalars minimizing || V Dl^-1/2 N Dr^1/2 W ||
/// (coordinate-wise golden section in log space).
Vector d_step(const std::vector<Vector>& v_comp, const std::vector<Vector>& w_comp,
              const CMatrix& n_sample, const Vector& v_a, const Vector& w_a,
              const PortDims& dims, const Vector& d_init);

/// Scaled norm || V Dl^-1/2 N Dr^1/2 W || at given weights and scalars.
double scaled_norm(const std::vector<Vector>& v_comp, const std::vector<Vector>& w_comp,
                   const CMatrix& n_sample, const Vector& v_a, const Vector& w_a,
                   const PortDims& dims, const Vector& d_scalars);

/// Per-frequency requirement translation by alternating vw/d steps.
WeightSet translate(const std::vector<CMatrix>& n_samples, const AssemblyWeights& assembly,
                    const PortDims& dims, const FrequencyGrid& grid,
                    const TranslateOptions& opts = {});

enum class RequirementForm {
    component, // || diag(w)^-1 E diag(v)^-1 || <= 1
    assembly   // || diag(v) E diag(w) || < 1
};

struct RequirementCheck {
    std::vector<double> values;
    double max_value = 0.0;
    bool satisfied = false;
    int worst_index = -1;
    double worst_omega = 0.0;
};

RequirementCheck check_requirement(const FrfData& error, const std::vector<Vector>& v,
                                   const std::vector<Vector>& w, RequirementForm form,
                                   double slack = 1e-12);

struct CertificateReport {
    bool all_ok = true;
    std::vector<int> violations;          // grid indices with lambda_min < -1e-9
    std::vector<int> skipped_infeasible;  // flagged points, listed not checked
    std::vector<double> min_eigenvalues;  // per grid point (NaN where skipped)
};

/// Reassembles the block matrix at every feasible frequency and checks the
/// minimum eigenvalue after unit diagonal scaling.
CertificateReport verify_certificate(const WeightSet& ws, const std::vector<CMatrix>& n_samples,
                                     double tol = -1e-9);

/// Block matrix [[W^-2 Dr^-1, N^H],[N, V^-2 Dl]] for audit purposes.
CMatrix certificate_matrix(const FrequencyWeights& fw, const CMatrix& n_sample,
                           const PortDims& dims);

std::string weights_to_json(const WeightSet& ws);
WeightSet weights_from_json(const std::string& text);

} // namespace cmsrom
