#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace cmsrom {

using Matrix  = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector  = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Discrete evaluation grid, strictly positive and strictly ascending [rad/s].
struct FrequencyGrid {
    Vector points_rad;
    std::string description;

    static FrequencyGrid log_spaced(double f_min_hz, double f_max_hz, int count);

    int size() const { return static_cast<int>(points_rad.size()); }
    double omega(int i) const { return points_rad(i); }
    double hz(int i) const;
    bool same_as(const FrequencyGrid& other, double tol = 1e-12) const;
    void validate() const;
};

/// Complex p x m response matrices, one per grid point.
struct FrfData {
    FrequencyGrid grid;
    std::vector<CMatrix> samples;
    std::vector<std::string> row_ports;
    std::vector<std::string> col_ports;
    // Per-point trust flag; cleared when the sample came from a (near-)singular solve.
    std::vector<std::uint8_t> point_ok;

    int rows() const { return samples.empty() ? 0 : static_cast<int>(samples.front().rows()); }
    int cols() const { return samples.empty() ? 0 : static_cast<int>(samples.front().cols()); }
    bool all_points_ok() const;
    void validate() const;
};

/// Second-order structural model M q'' + C q' + K q = B u, y = F q
/// with an internal/boundary DOF partition for substructuring.
struct SecondOrderModel {
    Matrix mass;       // n x n, symmetric positive definite
    Matrix damping;    // n x n
    Matrix stiffness;  // n x n, symmetric positive semidefinite
    Matrix input_map;  // n x m selection/combination
    Matrix output_map; // p x n
    std::vector<int> boundary_dofs; // unique, in range
    std::vector<std::string> labels;
    std::vector<std::string> input_port_names;  // optional, size m when set
    std::vector<std::string> output_port_names; // optional, size p when set
    std::string name;

    int dof_count() const { return static_cast<int>(mass.rows()); }
    int input_count() const { return static_cast<int>(input_map.cols()); }
    int output_count() const { return static_cast<int>(output_map.rows()); }
    int boundary_count() const { return static_cast<int>(boundary_dofs.size()); }

    std::vector<int> internal_dofs() const;

    /// Checks symmetry/definiteness and the boundary-DOF bookkeeping.
    /// When cms_ready, the input/output maps must touch boundary DOF only.
    void validate(bool cms_ready = false) const;
};

/// Free-interface eigenpairs, mass-normalized, rigid modes first.
struct ModeSet {
    Vector frequencies_rad; // ascending, >= 0
    Matrix shapes;          // n x nbar
    int rigid_count = 0;

    int count() const { return static_cast<int>(frequencies_rad.size()); }
    int elastic_count() const { return count() - rigid_count; }
    bool is_rigid(int mode) const { return mode < rigid_count; }
};

/// Spectral norm (largest singular value) of a complex matrix.
double spectral_norm(const CMatrix& a);

/// LU solve with extended-precision residual refinement; keeps the forward
/// error well below plain LU on ill-conditioned dynamic-stiffness solves.
CMatrix refined_complex_solve(const CMatrix& a, const CMatrix& b);

/// T^T A T accumulated in extended precision, rounded once at the end.
Matrix congruence_extended(const Matrix& t, const Matrix& a);

/// Smallest eigenvalue of a Hermitian matrix.
double hermitian_min_eigenvalue(const CMatrix& a);

/// Relative Frobenius deviation from symmetry, ||A - A^T|| / max(||A||, eps).
double symmetry_deviation(const Matrix& a);

} // namespace cmsrom
