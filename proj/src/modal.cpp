#include "cmsrom/modal.hpp"

#include "cmsrom/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmsrom {

namespace {

// Cyclic Jacobi sweeps on the modal stiffness phi^T K phi. The matrix is
// nearly diagonal after the generalized eigensolve, so a few sweeps reach
// machine precision with high relative accuracy per eigenvalue, which the
// modal-superposition identity needs across a wide spectrum.
void jacobi_refine(const Matrix& stiffness, Matrix& phi, Vector& lambda) {
    Matrix e = congruence_extended(phi, stiffness);
    e = 0.5 * (e + e.transpose().eval());
    const int n = static_cast<int>(e.rows());

    for (int sweep = 0; sweep < 6; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                off = std::max(off, std::abs(e(i, j)) /
                                        std::max(std::sqrt(std::abs(e(i, i) * e(j, j))), 1e-300));
        if (off < 1e-14) break;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double apq = e(i, j);
                const double scale = std::sqrt(std::abs(e(i, i) * e(j, j))) + 1e-300;
                if (std::abs(apq) <= 1e-16 * scale) continue;
                Eigen::JacobiRotation<double> rot;
                rot.makeJacobi(e, i, j);
                e.applyOnTheLeft(i, j, rot.adjoint());
                e.applyOnTheRight(i, j, rot);
                e(i, j) = e(j, i) = 0.0;
                phi.applyOnTheRight(i, j, rot);
            }
        }
    }
    lambda = e.diagonal();
}

} // namespace

ModeSet solve_undamped_modes(const SecondOrderModel& model, double cutoff_rad) {
    if (!(cutoff_rad > 0.0)) throw std::invalid_argument("solve_undamped_modes: cutoff must be > 0");

    Eigen::LLT<Matrix> mass_llt(model.mass);
    if (mass_llt.info() != Eigen::Success)
        throw std::runtime_error("solve_undamped_modes: singular (non-PD) mass matrix");

    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(model.stiffness, model.mass,
                                                        Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("solve_undamped_modes: eigensolver failed");

    Matrix phi = es.eigenvectors();

    // Exact M-orthonormalization, then Jacobi refinement of the K congruence.
    Matrix gram = congruence_extended(phi, model.mass);
    Eigen::LLT<Matrix> gram_llt(gram);
    if (gram_llt.info() == Eigen::Success) {
        Matrix l_t = gram_llt.matrixL().transpose();
        phi = l_t.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(phi);
    }
    Vector lambda;
    jacobi_refine(model.stiffness, phi, lambda);

    // Targeted polish of the lowest block: rotations among the clustered top
    // modes re-round their columns every sweep and leak noise into the low
    // pairs, whose residuals dominate the modal-superposition identity in
    // band. Cleaning only the low block injects none of that noise back.
    {
        const int nn = static_cast<int>(phi.cols());
        const int p = std::min<int>(40, nn);
        Matrix phi_low = phi.leftCols(p);
        Matrix e = congruence_extended(phi_low, model.stiffness);
        e = 0.5 * (e + e.transpose().eval());
        for (int sweep = 0; sweep < 3; ++sweep) {
            for (int i = 0; i < p; ++i) {
                for (int j = i + 1; j < p; ++j) {
                    const double apq = e(i, j);
                    const double scale = std::sqrt(std::abs(e(i, i) * e(j, j))) + 1e-300;
                    if (std::abs(apq) <= 1e-18 * scale) continue;
                    Eigen::JacobiRotation<double> rot;
                    rot.makeJacobi(e, i, j);
                    e.applyOnTheLeft(i, j, rot.adjoint());
                    e.applyOnTheRight(i, j, rot);
                    e(i, j) = e(j, i) = 0.0;
                    phi_low.applyOnTheRight(i, j, rot);
                }
            }
        }
        phi.leftCols(p) = phi_low;
        for (int i = 0; i < p; ++i) lambda(i) = e(i, i);
    }

    // Refinement keeps values near their slots; restore strict ordering.
    const int n = static_cast<int>(lambda.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return lambda(a) < lambda(b); });
    Vector lambda_sorted(n);
    Matrix phi_sorted(phi.rows(), n);
    for (int i = 0; i < n; ++i) {
        lambda_sorted(i) = lambda(order[i]);
        phi_sorted.col(i) = phi.col(order[i]);
    }
    lambda = lambda_sorted;
    phi = phi_sorted;

    const double lambda_max = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);

    Vector omega(n);
    for (int i = 0; i < n; ++i) omega(i) = std::sqrt(std::max(lambda(i), 0.0));

    // Rigid classification: numerical-zero deadband on lambda defines "nonzero",
    // then fixed thresholds (1e-6 rad/s absolute, 1e-4 of the first nonzero).
    const double deadband = 1e-10 * lambda_max;
    double omega_first = 0.0;
    for (int i = 0; i < n; ++i) {
        if (lambda(i) > deadband) { omega_first = omega(i); break; }
    }
    const double threshold = std::max(1e-6, 1e-4 * omega_first);
    int rigid = 0;
    while (rigid < n && (lambda(rigid) <= deadband || omega(rigid) < threshold)) ++rigid;

    int keep = rigid;
    while (keep < n && omega(keep) <= cutoff_rad) ++keep;

    ModeSet out;
    out.frequencies_rad = omega.head(keep);
    for (int i = 0; i < rigid; ++i) out.frequencies_rad(i) = 0.0;
    out.shapes = phi.leftCols(keep);
    out.rigid_count = rigid;
    return out;
}

SecondOrderModel apply_modal_damping(const SecondOrderModel& model, const ModeSet& modes,
                                     double ratio) {
    if (!(ratio >= 0.0) || ratio >= 1.0)
        throw std::invalid_argument("apply_modal_damping: need 0 <= ratio < 1");
    if (modes.shapes.rows() != model.dof_count())
        throw std::invalid_argument("apply_modal_damping: mode/model dimension mismatch");

    SecondOrderModel damped = model;
    const int n_e = modes.elastic_count();
    if (ratio == 0.0 || n_e == 0) {
        damped.damping = Matrix::Zero(model.dof_count(), model.dof_count());
        return damped;
    }
    Matrix phi_e = modes.shapes.rightCols(n_e);
    Vector coeff(n_e);
    for (int i = 0; i < n_e; ++i) coeff(i) = 2.0 * ratio * modes.frequencies_rad(modes.rigid_count + i);
    Matrix m_phi = model.mass * phi_e;
    damped.damping = m_phi * coeff.asDiagonal() * m_phi.transpose();
    damped.damping = 0.5 * (damped.damping + damped.damping.transpose().eval());
    return damped;
}

Vector modal_damping_ratios(const SecondOrderModel& model, const ModeSet& modes) {
    Vector zeta = Vector::Zero(modes.count());
    for (int i = modes.rigid_count; i < modes.count(); ++i) {
        const double w = modes.frequencies_rad(i);
        if (w <= 0.0) continue;
        const Vector phi = modes.shapes.col(i);
        zeta(i) = phi.dot(model.damping * phi) / (2.0 * w);
    }
    return zeta;
}

FrfData frf_direct(const SecondOrderModel& model, const FrequencyGrid& grid, int threads) {
    grid.validate();
    const int n = model.dof_count();
    if (model.stiffness.rows() != n || model.damping.rows() != n || model.input_map.rows() != n ||
        model.output_map.cols() != n)
        throw std::invalid_argument("frf_direct: inconsistent model dimensions");

    FrfData out;
    out.grid = grid;
    out.samples.resize(grid.size());
    out.point_ok.assign(grid.size(), 1);
    out.row_ports = model.output_port_names;
    out.col_ports = model.input_port_names;

    // The dynamic stiffness is factored in extended precision: its condition
    // (stiffness spread times resonance proximity) otherwise caps the forward
    // accuracy near anti-resonance dips, where the reduced-vs-full and
    // modal-vs-direct comparisons live.
    using LC = std::complex<long double>;
    using LCMatrix = Eigen::Matrix<LC, Eigen::Dynamic, Eigen::Dynamic>;
    const LCMatrix mass_l = model.mass.cast<LC>();
    const LCMatrix damp_l = model.damping.cast<LC>();
    const LCMatrix stiff_l = model.stiffness.cast<LC>();
    const LCMatrix b_l = model.input_map.cast<LC>();
    const LCMatrix f_l = model.output_map.cast<LC>();

    parallel_for(grid.size(), threads, [&](int i) {
        const long double w = grid.omega(i);
        LCMatrix dyn = (-w * w) * mass_l + LC(0.0L, w) * damp_l + stiff_l;
        Eigen::PartialPivLU<LCMatrix> lu(dyn);
        const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
        const long double pivot_ratio =
            pivots.minCoeff() / std::max(pivots.maxCoeff(), (long double)1e-300);

        LCMatrix x = lu.solve(b_l);
        bool finite = true;
        for (Eigen::Index c = 0; c < x.cols() && finite; ++c)
            for (Eigen::Index r = 0; r < x.rows() && finite; ++r)
                if (!std::isfinite((double)x(r, c).real()) ||
                    !std::isfinite((double)x(r, c).imag()))
                    finite = false;
        bool ok = finite && pivot_ratio > 1e-14L;
        if (ok) {
            const long double resid = (dyn * x - b_l).norm();
            ok = resid <= 1e-8L * (b_l.norm() + dyn.norm() * x.norm() + 1e-300L);
        }
        if (!ok) {
            out.point_ok[i] = 0;
            if (!finite) x.setZero();
        }
        LCMatrix h = f_l * x;
        out.samples[i] = h.unaryExpr([](const LC& v) {
            return Complex(static_cast<double>(v.real()), static_cast<double>(v.imag()));
        });
    });
    return out;
}

FrfData frf_modal(const ModeSet& modes, const SecondOrderModel& model, const FrequencyGrid& grid,
                  const std::vector<int>& subset) {
    grid.validate();
    for (int id : subset)
        if (id < 0 || id >= modes.count())
            throw std::invalid_argument("frf_modal: subset index out of range");

    const Vector zeta = modal_damping_ratios(model, modes);
    const int p = model.output_count();
    const int m = model.input_count();

    // The superposition is accumulated in extended precision; at deep
    // anti-resonances the mode contributions cancel by several orders and
    // plain double accumulation dominates the comparison against the direct
    // solve.
    using LD = long double;
    using LC = std::complex<LD>;
    using LMatrix = Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic>;
    using LCMatrix = Eigen::Matrix<LC, Eigen::Dynamic, Eigen::Dynamic>;

    std::vector<LMatrix> residue(subset.size());
    for (size_t s = 0; s < subset.size(); ++s) {
        const Vector phi = modes.shapes.col(subset[s]);
        LMatrix f_phi = (model.output_map * phi).cast<LD>();
        LMatrix phi_b = (phi.transpose() * model.input_map).cast<LD>();
        residue[s] = f_phi * phi_b;
    }

    FrfData out;
    out.grid = grid;
    out.samples.resize(grid.size());
    out.point_ok.assign(grid.size(), 1);
    out.row_ports = model.output_port_names;
    out.col_ports = model.input_port_names;
    for (int i = 0; i < grid.size(); ++i) {
        const double w = grid.omega(i);
        LCMatrix h = LCMatrix::Zero(p, m);
        for (size_t s = 0; s < subset.size(); ++s) {
            const int id = subset[s];
            LC denom;
            if (modes.is_rigid(id)) {
                if (w == 0.0) throw std::domain_error("frf_modal: rigid mode at omega = 0");
                denom = LC(-LD(w) * LD(w), 0.0L);
            } else {
                const LD wl = modes.frequencies_rad(id);
                denom = LC(wl * wl - LD(w) * LD(w), 2.0L * LD(zeta(id)) * wl * LD(w));
            }
            const LC inv = LC(1.0L, 0.0L) / denom;
            for (int r = 0; r < p; ++r)
                for (int c = 0; c < m; ++c) h(r, c) += residue[s](r, c) * inv;
        }
        out.samples[i] = h.unaryExpr([](const LC& v) {
            return Complex(static_cast<double>(v.real()), static_cast<double>(v.imag()));
        });
    }
    return out;
}

} // namespace cmsrom
