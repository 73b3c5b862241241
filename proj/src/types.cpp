#include "cmsrom/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace cmsrom {

FrequencyGrid FrequencyGrid::log_spaced(double f_min_hz, double f_max_hz, int count) {
    if (!(f_min_hz > 0.0) || !(f_max_hz > f_min_hz))
        throw std::invalid_argument("log_spaced: need 0 < f_min < f_max");
    if (count < 2)
        throw std::invalid_argument("log_spaced: need at least 2 points");
    const double two_pi = 2.0 * std::numbers::pi;
    const double l0 = std::log10(f_min_hz);
    const double l1 = std::log10(f_max_hz);
    FrequencyGrid g;
    g.points_rad.resize(count);
    for (int i = 0; i < count; ++i) {
        const double f = std::pow(10.0, l0 + (l1 - l0) * i / (count - 1));
        g.points_rad(i) = two_pi * f;
    }
    // endpoints exact despite pow() rounding
    g.points_rad(0) = two_pi * f_min_hz;
    g.points_rad(count - 1) = two_pi * f_max_hz;
    g.description = "log-spaced " + std::to_string(f_min_hz) + ".." + std::to_string(f_max_hz) +
                    " Hz, " + std::to_string(count) + " points";
    g.validate();
    return g;
}

double FrequencyGrid::hz(int i) const { return points_rad(i) / (2.0 * std::numbers::pi); }

bool FrequencyGrid::same_as(const FrequencyGrid& other, double tol) const {
    if (points_rad.size() != other.points_rad.size()) return false;
    for (int i = 0; i < size(); ++i) {
        const double a = points_rad(i), b = other.points_rad(i);
        if (std::abs(a - b) > tol * std::max(1.0, std::max(std::abs(a), std::abs(b)))) return false;
    }
    return true;
}

void FrequencyGrid::validate() const {
    for (int i = 0; i < size(); ++i) {
        if (!std::isfinite(points_rad(i)) || points_rad(i) <= 0.0)
            throw std::invalid_argument("FrequencyGrid: points must be finite and > 0");
        if (i > 0 && points_rad(i) <= points_rad(i - 1))
            throw std::invalid_argument("FrequencyGrid: points must be strictly ascending");
    }
}

bool FrfData::all_points_ok() const {
    return std::all_of(point_ok.begin(), point_ok.end(), [](std::uint8_t v) { return v != 0; });
}

void FrfData::validate() const {
    grid.validate();
    if (static_cast<int>(samples.size()) != grid.size())
        throw std::invalid_argument("FrfData: one sample per grid point required");
    for (const auto& s : samples)
        if (s.rows() != rows() || s.cols() != cols())
            throw std::invalid_argument("FrfData: inconsistent sample dimensions");
    if (!point_ok.empty() && point_ok.size() != samples.size())
        throw std::invalid_argument("FrfData: point_ok size mismatch");
}

std::vector<int> SecondOrderModel::internal_dofs() const {
    std::vector<char> is_boundary(dof_count(), 0);
    for (int b : boundary_dofs) is_boundary.at(b) = 1;
    std::vector<int> internal;
    internal.reserve(dof_count() - boundary_count());
    for (int i = 0; i < dof_count(); ++i)
        if (!is_boundary[i]) internal.push_back(i);
    return internal;
}

void SecondOrderModel::validate(bool cms_ready) const {
    const int n = dof_count();
    if (mass.cols() != n || stiffness.rows() != n || stiffness.cols() != n ||
        damping.rows() != n || damping.cols() != n)
        throw std::invalid_argument("SecondOrderModel: matrix dimension mismatch");
    if (input_map.rows() != n || output_map.cols() != n)
        throw std::invalid_argument("SecondOrderModel: input/output map dimension mismatch");

    if (symmetry_deviation(mass) > 1e-12)
        throw std::invalid_argument("SecondOrderModel: mass matrix not symmetric");
    if (symmetry_deviation(stiffness) > 1e-12)
        throw std::invalid_argument("SecondOrderModel: stiffness matrix not symmetric");

    Eigen::LLT<Matrix> llt(mass);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("SecondOrderModel: mass matrix not positive definite");

    Eigen::SelfAdjointEigenSolver<Matrix> es(stiffness, Eigen::EigenvaluesOnly);
    const double kmax = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-10 * kmax)
        throw std::invalid_argument("SecondOrderModel: stiffness matrix not positive semidefinite");

    std::set<int> seen;
    for (int b : boundary_dofs) {
        if (b < 0 || b >= n)
            throw std::invalid_argument("SecondOrderModel: boundary DOF index out of range");
        if (!seen.insert(b).second)
            throw std::invalid_argument("SecondOrderModel: duplicate boundary DOF index");
    }

    if (cms_ready) {
        std::vector<char> is_boundary(n, 0);
        for (int b : boundary_dofs) is_boundary[b] = 1;
        for (int i = 0; i < n; ++i) {
            if (is_boundary[i]) continue;
            if (input_map.row(i).cwiseAbs().maxCoeff() != 0.0)
                throw std::invalid_argument("SecondOrderModel: input map touches internal DOF " +
                                            std::to_string(i));
            if (output_map.col(i).cwiseAbs().maxCoeff() != 0.0)
                throw std::invalid_argument("SecondOrderModel: output map touches internal DOF " +
                                            std::to_string(i));
        }
    }
}

double spectral_norm(const CMatrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    // sigma_max via the smaller Gram matrix; exact enough for sigma_max and deterministic
    if (a.cols() <= a.rows()) {
        CMatrix g = a.adjoint() * a;
        Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
        return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    }
    CMatrix g = a * a.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

CMatrix refined_complex_solve(const CMatrix& a, const CMatrix& b) {
    using LComplex = std::complex<long double>;
    Eigen::PartialPivLU<CMatrix> lu(a);
    CMatrix x = lu.solve(b);
    if (!x.allFinite()) return x;

    const Eigen::Index n = a.rows(), m = b.cols();
    Eigen::Matrix<LComplex, Eigen::Dynamic, Eigen::Dynamic> al = a.cast<LComplex>();
    for (int pass = 0; pass < 2; ++pass) {
        CMatrix residual(n, m);
        for (Eigen::Index c = 0; c < m; ++c) {
            for (Eigen::Index r = 0; r < n; ++r) {
                LComplex acc = LComplex(b(r, c));
                for (Eigen::Index k = 0; k < n; ++k) acc -= al(r, k) * LComplex(x(k, c));
                residual(r, c) = Complex(static_cast<double>(acc.real()),
                                         static_cast<double>(acc.imag()));
            }
        }
        const CMatrix dx = lu.solve(residual);
        if (!dx.allFinite()) break;
        x += dx;
        if (dx.norm() <= 1e-15 * x.norm()) break;
    }
    return x;
}

Matrix congruence_extended(const Matrix& t, const Matrix& a) {
    using LD = long double;
    const Eigen::Index n = t.rows(), r = t.cols();
    Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic> at(n, r);
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            LD acc = 0;
            for (Eigen::Index k = 0; k < n; ++k)
                acc += static_cast<LD>(a(i, k)) * static_cast<LD>(t(k, j));
            at(i, j) = acc;
        }
    Matrix out(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < r; ++j) {
            LD acc = 0;
            for (Eigen::Index k = 0; k < n; ++k) acc += static_cast<LD>(t(k, i)) * at(k, j);
            out(i, j) = static_cast<double>(acc);
        }
    return out;
}

double hermitian_min_eigenvalue(const CMatrix& a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double symmetry_deviation(const Matrix& a) {
    const double scale = a.norm();
    if (scale == 0.0) return 0.0;
    return (a - a.transpose()).norm() / scale;
}

} // namespace cmsrom
