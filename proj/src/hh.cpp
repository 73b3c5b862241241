#include "cmsrom/hh.hpp"

#include <stdexcept>

namespace cmsrom {

namespace {

struct Partition {
    std::vector<int> internal;
    std::vector<int> boundary;
};

Partition make_partition(const SecondOrderModel& model) {
    if (model.boundary_count() == 0)
        throw std::invalid_argument("hh: model has no boundary DOF");
    return {model.internal_dofs(), model.boundary_dofs};
}

Matrix gather(const Matrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix out(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
            out(i, j) = a(rows[i], cols[j]);
    return out;
}

/// Factorization of K_ii shared by all static solves of one component.
struct InternalSolver {
    Matrix k_ii;
    Eigen::PartialPivLU<Matrix> lu;

    explicit InternalSolver(Matrix k) : k_ii(std::move(k)), lu(k_ii) {}

    Matrix solve(const Matrix& rhs, const std::string& what) const {
        if (rhs.cols() == 0) return Matrix::Zero(rhs.rows(), 0);
        Matrix x = lu.solve(rhs);
        const double resid = (k_ii * x - rhs).norm();
        const double scale = std::max(rhs.norm(), k_ii.norm() * x.norm());
        if (!x.allFinite() || resid > 1e-8 * std::max(scale, 1e-300))
            throw std::runtime_error("hh: singular K_ii while computing " + what +
                                     " (floating substructure without boundary constraints?)");
        return x;
    }
};

} // namespace

Matrix HhBasis::transformation_partitioned() const {
    const int n_i = static_cast<int>(constraint_modes.rows());
    const int r_ir = static_cast<int>(inertia_relief.cols());
    const int r_eps = static_cast<int>(uncoupled_elastic.cols());
    const int n_b = boundary_count;
    Matrix t = Matrix::Zero(n_i + n_b, r_ir + r_eps + n_b);
    t.block(0, 0, n_i, r_ir) = inertia_relief;
    t.block(0, r_ir, n_i, r_eps) = uncoupled_elastic;
    t.block(0, r_ir + r_eps, n_i, n_b) = constraint_modes;
    t.block(n_i, r_ir + r_eps, n_b, n_b) = Matrix::Identity(n_b, n_b);
    return t;
}

Matrix constraint_modes(const SecondOrderModel& model) {
    const Partition part = make_partition(model);
    const Matrix k_ii = gather(model.stiffness, part.internal, part.internal);
    const Matrix k_ib = gather(model.stiffness, part.internal, part.boundary);
    InternalSolver solver(k_ii);
    return solver.solve(-k_ib, "constraint modes of component '" + model.name + "'");
}

Matrix inertia_relief_modes(const SecondOrderModel& model, const ModeSet& modes, const Matrix& psi) {
    const Partition part = make_partition(model);
    const int n_i = static_cast<int>(part.internal.size());
    if (psi.rows() != n_i || psi.cols() != model.boundary_count())
        throw std::invalid_argument("inertia_relief_modes: psi dimension mismatch");
    if (modes.rigid_count == 0) return Matrix::Zero(n_i, 0);

    const Matrix m_ii = gather(model.mass, part.internal, part.internal);
    const Matrix m_ib = gather(model.mass, part.internal, part.boundary);
    Matrix phi_rb(part.boundary.size(), modes.rigid_count);
    for (size_t b = 0; b < part.boundary.size(); ++b)
        for (int r = 0; r < modes.rigid_count; ++r)
            phi_rb(b, r) = modes.shapes(part.boundary[b], r);

    const Matrix k_ii = gather(model.stiffness, part.internal, part.internal);
    InternalSolver solver(k_ii);
    return solver.solve(-(m_ib + m_ii * psi) * phi_rb,
                        "inertia-relief modes of component '" + model.name + "'");
}

Matrix uncoupled_elastic_modes(const SecondOrderModel& model, const ModeSet& modes,
                               const Matrix& psi, const std::vector<int>& selection) {
    const Partition part = make_partition(model);
    const int n_i = static_cast<int>(part.internal.size());
    Matrix phi_eps(n_i, selection.size());
    for (size_t s = 0; s < selection.size(); ++s) {
        const int id = selection[s];
        if (id < 0 || id >= modes.count())
            throw std::invalid_argument("uncoupled_elastic_modes: selection index out of range");
        if (modes.is_rigid(id))
            throw std::invalid_argument("uncoupled_elastic_modes: selection touches rigid mode " +
                                        std::to_string(id));
        Vector phi_i(n_i);
        for (int i = 0; i < n_i; ++i) phi_i(i) = modes.shapes(part.internal[i], id);
        Vector phi_b(part.boundary.size());
        for (size_t b = 0; b < part.boundary.size(); ++b)
            phi_b(b) = modes.shapes(part.boundary[b], id);
        phi_eps.col(s) = phi_i - psi * phi_b;
    }
    return phi_eps;
}

HhBasis assemble_basis(const Matrix& psi, const Matrix& phi_ir, const Matrix& phi_eps, int n_b,
                       const std::vector<int>& selected_mode_ids) {
    if (psi.cols() != n_b)
        throw std::invalid_argument("assemble_basis: psi column count must equal n_b");
    if ((phi_ir.cols() > 0 && phi_ir.rows() != psi.rows()) ||
        (phi_eps.cols() > 0 && phi_eps.rows() != psi.rows()))
        throw std::invalid_argument("assemble_basis: row counts disagree");

    HhBasis basis;
    basis.constraint_modes = psi;
    basis.inertia_relief = phi_ir.cols() ? phi_ir : Matrix::Zero(psi.rows(), 0);
    basis.uncoupled_elastic = phi_eps.cols() ? phi_eps : Matrix::Zero(psi.rows(), 0);
    basis.boundary_count = n_b;
    basis.selected_mode_ids = selected_mode_ids;

    const Matrix t = basis.transformation_partitioned();
    Eigen::ColPivHouseholderQR<Matrix> qr(t);
    qr.setThreshold(1e-10);
    if (qr.rank() < t.cols())
        throw std::runtime_error("assemble_basis: transformation is rank deficient (rank " +
                                 std::to_string(qr.rank()) + " of " + std::to_string(t.cols()) + ")");
    return basis;
}

HhBasis build_hh_basis(const SecondOrderModel& model, const ModeSet& modes,
                       const std::vector<int>& selection) {
    // One K_ii factorization reused across all static right-hand sides.
    const Partition part = make_partition(model);
    InternalSolver solver(gather(model.stiffness, part.internal, part.internal));
    const std::string who = "HH basis of component '" + model.name + "'";

    const Matrix k_ib = gather(model.stiffness, part.internal, part.boundary);
    const Matrix psi = solver.solve(-k_ib, who);

    Matrix phi_ir = Matrix::Zero(psi.rows(), 0);
    if (modes.rigid_count > 0) {
        const Matrix m_ii = gather(model.mass, part.internal, part.internal);
        const Matrix m_ib = gather(model.mass, part.internal, part.boundary);
        Matrix phi_rb(part.boundary.size(), modes.rigid_count);
        for (size_t b = 0; b < part.boundary.size(); ++b)
            for (int r = 0; r < modes.rigid_count; ++r)
                phi_rb(b, r) = modes.shapes(part.boundary[b], r);
        phi_ir = solver.solve(-(m_ib + m_ii * psi) * phi_rb, who);
    }

    const Matrix phi_eps = uncoupled_elastic_modes(model, modes, psi, selection);
    return assemble_basis(psi, phi_ir, phi_eps, model.boundary_count(), selection);
}

ReducedComponent reduce(const SecondOrderModel& model, const HhBasis& basis) {
    const Partition part = make_partition(model);
    const int n = model.dof_count();
    const int n_i = static_cast<int>(part.internal.size());
    const int n_b = static_cast<int>(part.boundary.size());
    if (basis.constraint_modes.rows() != n_i || basis.boundary_count != n_b)
        throw std::invalid_argument("reduce: basis/model partition mismatch");

    // Expand the partitioned transformation to the model's DOF ordering.
    const Matrix t_part = basis.transformation_partitioned();
    const int r = static_cast<int>(t_part.cols());
    Matrix t = Matrix::Zero(n, r);
    for (int i = 0; i < n_i; ++i) t.row(part.internal[i]) = t_part.row(i);
    for (int b = 0; b < n_b; ++b) t.row(part.boundary[b]) = t_part.row(n_i + b);

    ReducedComponent red;
    red.parent_id = model.name;
    red.basis = basis;
    red.model.name = model.name + ".rom";
    red.model.mass = congruence_extended(t, model.mass);
    red.model.damping = congruence_extended(t, model.damping);
    red.model.stiffness = congruence_extended(t, model.stiffness);
    red.model.mass = 0.5 * (red.model.mass + red.model.mass.transpose().eval());
    red.model.stiffness = 0.5 * (red.model.stiffness + red.model.stiffness.transpose().eval());
    red.model.input_map = t.transpose() * model.input_map;
    red.model.output_map = model.output_map * t;
    red.model.input_port_names = model.input_port_names;
    red.model.output_port_names = model.output_port_names;
    red.model.boundary_dofs.resize(n_b);
    for (int b = 0; b < n_b; ++b) red.model.boundary_dofs[b] = r - n_b + b;
    return red;
}

FrfData component_error(const FrfData& full_frf, const FrfData& reduced_frf) {
    if (!full_frf.grid.same_as(reduced_frf.grid))
        throw std::invalid_argument("component_error: grid mismatch");
    if (full_frf.rows() != reduced_frf.rows() || full_frf.cols() != reduced_frf.cols())
        throw std::invalid_argument("component_error: port dimension mismatch");

    FrfData err;
    err.grid = full_frf.grid;
    err.samples.resize(full_frf.samples.size());
    err.point_ok.assign(full_frf.samples.size(), 1);
    for (size_t i = 0; i < full_frf.samples.size(); ++i) {
        err.samples[i] = reduced_frf.samples[i] - full_frf.samples[i];
        const bool ok_full = full_frf.point_ok.empty() || full_frf.point_ok[i];
        const bool ok_red = reduced_frf.point_ok.empty() || reduced_frf.point_ok[i];
        err.point_ok[i] = (ok_full && ok_red) ? 1 : 0;
    }
    return err;
}

} // namespace cmsrom
