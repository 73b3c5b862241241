#include "cmsrom/coupling.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

namespace cmsrom {

int PortDims::total_inputs() const { return std::accumulate(inputs.begin(), inputs.end(), 0); }
int PortDims::total_outputs() const { return std::accumulate(outputs.begin(), outputs.end(), 0); }

int PortDims::input_offset(int j) const {
    return std::accumulate(inputs.begin(), inputs.begin() + j, 0);
}

int PortDims::output_offset(int j) const {
    return std::accumulate(outputs.begin(), outputs.begin() + j, 0);
}

void Interconnection::validate() const {
    if (port_dims.inputs.size() != port_dims.outputs.size())
        throw std::invalid_argument("Interconnection: per-component port dims mismatch");
    const int m_b = port_dims.total_inputs();
    const int p_b = port_dims.total_outputs();
    if (k_bb.rows() != m_b || k_bb.cols() != p_b)
        throw std::invalid_argument("Interconnection: k_bb must be m_B x p_B");
    if (k_ba.rows() != m_b || k_ba.cols() != port_dims.ext_inputs)
        throw std::invalid_argument("Interconnection: k_ba must be m_B x m_A");
    if (k_ab.rows() != port_dims.ext_outputs || k_ab.cols() != p_b)
        throw std::invalid_argument("Interconnection: k_ab must be p_A x p_B");
    if (!k_bb.allFinite() || !k_ba.allFinite() || !k_ab.allFinite())
        throw std::invalid_argument("Interconnection: entries must be finite");
}

FrfData block_diag_frf(const std::vector<FrfData>& components) {
    if (components.empty()) throw std::invalid_argument("block_diag_frf: no components");
    const FrequencyGrid& grid = components.front().grid;
    int p = 0, m = 0;
    for (const auto& c : components) {
        if (!c.grid.same_as(grid)) throw std::invalid_argument("block_diag_frf: grid mismatch");
        p += c.rows();
        m += c.cols();
    }
    FrfData out;
    out.grid = grid;
    out.samples.resize(grid.size());
    out.point_ok.assign(grid.size(), 1);
    for (const auto& c : components) {
        out.row_ports.insert(out.row_ports.end(), c.row_ports.begin(), c.row_ports.end());
        out.col_ports.insert(out.col_ports.end(), c.col_ports.begin(), c.col_ports.end());
    }
    for (int i = 0; i < grid.size(); ++i) {
        CMatrix block = CMatrix::Zero(p, m);
        int ro = 0, co = 0;
        for (const auto& c : components) {
            block.block(ro, co, c.rows(), c.cols()) = c.samples[i];
            if (!c.point_ok.empty() && !c.point_ok[i]) out.point_ok[i] = 0;
            ro += c.rows();
            co += c.cols();
        }
        out.samples[i] = block;
    }
    return out;
}

namespace {

// 2-norm condition estimate of a small complex matrix
double cond2(const CMatrix& a) {
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 0.0;
    const double smin = s(s.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

} // namespace

AssemblyFrf couple(const FrfData& h_b, const Interconnection& kc, double cond_limit) {
    kc.validate();
    const int m_b = kc.port_dims.total_inputs();
    const int p_b = kc.port_dims.total_outputs();
    if (h_b.rows() != p_b || h_b.cols() != m_b)
        throw std::invalid_argument("couple: H_B dimensions do not match the interconnection");

    const CMatrix k_bb = kc.k_bb.cast<Complex>();
    const CMatrix k_ba = kc.k_ba.cast<Complex>();
    const CMatrix k_ab = kc.k_ab.cast<Complex>();

    AssemblyFrf out;
    out.h_a.grid = h_b.grid;
    out.h_a.samples.resize(h_b.samples.size());
    out.h_a.point_ok.assign(h_b.samples.size(), 1);
    out.resolvent_cond.resize(h_b.samples.size());
    for (size_t i = 0; i < h_b.samples.size(); ++i) {
        const CMatrix& hb = h_b.samples[i];
        const CMatrix resolvent = CMatrix::Identity(m_b, m_b) - k_bb * hb;
        const double cond = cond2(resolvent);
        out.resolvent_cond[i] = cond;
        out.h_a.samples[i] = k_ab * hb * refined_complex_solve(resolvent, k_ba);
        const bool ok_in = h_b.point_ok.empty() || h_b.point_ok[i];
        out.h_a.point_ok[i] = (ok_in && cond < cond_limit && out.h_a.samples[i].allFinite()) ? 1 : 0;
    }
    return out;
}

FrfData assembly_error(const AssemblyFrf& full, const AssemblyFrf& reduced) {
    if (!full.h_a.grid.same_as(reduced.h_a.grid))
        throw std::invalid_argument("assembly_error: grid mismatch");
    if (full.h_a.rows() != reduced.h_a.rows() || full.h_a.cols() != reduced.h_a.cols())
        throw std::invalid_argument("assembly_error: dimension mismatch");
    FrfData err;
    err.grid = full.h_a.grid;
    err.samples.resize(full.h_a.samples.size());
    err.point_ok.assign(full.h_a.samples.size(), 1);
    for (size_t i = 0; i < err.samples.size(); ++i) {
        err.samples[i] = reduced.h_a.samples[i] - full.h_a.samples[i];
        err.point_ok[i] = (full.h_a.point_ok[i] && reduced.h_a.point_ok[i]) ? 1 : 0;
    }
    return err;
}

CMatrix build_n(const CMatrix& h_b_sample, const Interconnection& kc) {
    const int m_b = kc.port_dims.total_inputs();
    const int p_b = kc.port_dims.total_outputs();
    const int m_a = kc.port_dims.ext_inputs;
    const int p_a = kc.port_dims.ext_outputs;
    if (h_b_sample.rows() != p_b || h_b_sample.cols() != m_b)
        throw std::invalid_argument("build_n: H_B sample dimension mismatch");

    const CMatrix k_bb = kc.k_bb.cast<Complex>();
    const CMatrix r_right = CMatrix::Identity(p_b, p_b) - h_b_sample * k_bb; // I - H_B k_bb
    const CMatrix r_left = CMatrix::Identity(m_b, m_b) - k_bb * h_b_sample;  // I - k_bb H_B

    // X r_right = k_bb  =>  X^T = r_right^-T k_bb^T
    Eigen::PartialPivLU<CMatrix> lu_right_t(r_right.transpose());
    Eigen::PartialPivLU<CMatrix> lu_left(r_left);

    const CMatrix kbb_rinv = lu_right_t.solve(k_bb.transpose()).transpose();
    const CMatrix kab_rinv = lu_right_t.solve(kc.k_ab.transpose().cast<Complex>()).transpose();
    const CMatrix linv_kba = lu_left.solve(kc.k_ba.cast<Complex>());

    if (!kbb_rinv.allFinite() || !kab_rinv.allFinite() || !linv_kba.allFinite())
        throw std::runtime_error("build_n: singular resolvent at sample");

    CMatrix n = CMatrix::Zero(m_b + p_a, p_b + m_a);
    n.block(0, 0, m_b, p_b) = kbb_rinv;
    n.block(0, p_b, m_b, m_a) = linv_kba;
    n.block(m_b, 0, p_a, p_b) = kab_rinv;
    return n;
}

RelativeError relative_error(const FrfData& e_a, const FrfData& h_a) {
    if (!e_a.grid.same_as(h_a.grid))
        throw std::invalid_argument("relative_error: grid mismatch");
    RelativeError out;
    out.values.resize(e_a.samples.size());
    out.defined.resize(e_a.samples.size());
    for (size_t i = 0; i < e_a.samples.size(); ++i) {
        const double denom = spectral_norm(h_a.samples[i]);
        if (denom == 0.0) {
            out.values[i] = std::numeric_limits<double>::infinity();
            out.defined[i] = 0;
        } else {
            out.values[i] = spectral_norm(e_a.samples[i]) / denom;
            out.defined[i] = 1;
        }
    }
    return out;
}

} // namespace cmsrom
