#include "cmsrom/weights.hpp"

#include "cmsrom/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace cmsrom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Row space of N: [component inputs m_1..m_k | external outputs p_A]; carries V and D_l.
// Column space of N: [component outputs p_1..p_k | external inputs m_A]; carries W and D_r.

void expand_d(const Vector& d, const PortDims& dims, Vector& d_row, Vector& d_col) {
    const int k = dims.component_count();
    if (d.size() != k + 1) throw std::invalid_argument("d scalar count must be k+1");
    d_row.resize(dims.total_inputs() + dims.ext_outputs);
    d_col.resize(dims.total_outputs() + dims.ext_inputs);
    int r = 0, c = 0;
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < dims.inputs[j]; ++i) d_row(r++) = d(j);
        for (int i = 0; i < dims.outputs[j]; ++i) d_col(c++) = d(j);
    }
    for (int i = 0; i < dims.ext_outputs; ++i) d_row(r++) = d(k);
    for (int i = 0; i < dims.ext_inputs; ++i) d_col(c++) = d(k);
}

Vector stack_row(const std::vector<Vector>& comp, const Vector& ext, const PortDims& dims) {
    Vector out(dims.total_inputs() + dims.ext_outputs);
    int r = 0;
    for (int j = 0; j < dims.component_count(); ++j) {
        if (comp[j].size() != dims.inputs[j])
            throw std::invalid_argument("component V diagonal size mismatch");
        for (int i = 0; i < comp[j].size(); ++i) out(r++) = comp[j](i);
    }
    for (int i = 0; i < ext.size(); ++i) out(r++) = ext(i);
    return out;
}

Vector stack_col(const std::vector<Vector>& comp, const Vector& ext, const PortDims& dims) {
    Vector out(dims.total_outputs() + dims.ext_inputs);
    int c = 0;
    for (int j = 0; j < dims.component_count(); ++j) {
        if (comp[j].size() != dims.outputs[j])
            throw std::invalid_argument("component W diagonal size mismatch");
        for (int i = 0; i < comp[j].size(); ++i) out(c++) = comp[j](i);
    }
    for (int i = 0; i < ext.size(); ++i) out(c++) = ext(i);
    return out;
}

struct HermFactor {
    bool ok = false;
    double logdet = 0.0;
    CMatrix inverse;
    CMatrix chol_lower; // of the equilibrated matrix
    Vector equil;       // diag(B)^(-1/2)

    /// Largest alpha with B + alpha * diag(delta) still positive definite.
    double max_step(const Vector& delta_diag) const {
        const int n = static_cast<int>(equil.size());
        CMatrix g = CMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) g(i, i) = delta_diag(i) * equil(i) * equil(i);
        chol_lower.triangularView<Eigen::Lower>().solveInPlace(g);
        CMatrix lh = chol_lower.adjoint();
        lh.triangularView<Eigen::Upper>().template solveInPlace<Eigen::OnTheRight>(g);
        const double lmin = hermitian_min_eigenvalue(g);
        if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
        return 1.0 / (-lmin);
    }
};

// Cholesky of the diagonally equilibrated matrix; robust to wide dynamic range.
HermFactor factor_hermitian(const CMatrix& b) {
    HermFactor f;
    const int n = static_cast<int>(b.rows());
    Vector diag(n);
    for (int i = 0; i < n; ++i) {
        diag(i) = b(i, i).real();
        if (!(diag(i) > 0.0) || !std::isfinite(diag(i))) return f;
    }
    Vector s = diag.cwiseSqrt().cwiseInverse();
    CMatrix bt = s.asDiagonal() * b * s.asDiagonal();
    Eigen::LLT<CMatrix> llt(bt);
    if (llt.info() != Eigen::Success) return f;
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i).real());
    for (int i = 0; i < n; ++i) logdet += std::log(diag(i));
    CMatrix inv = llt.solve(CMatrix::Identity(n, n));
    f.ok = true;
    f.logdet = logdet;
    f.inverse = s.asDiagonal() * inv * s.asDiagonal();
    f.chol_lower = llt.matrixL();
    f.equil = s;
    return f;
}

double unit_scaled_min_eig(const CMatrix& a) {
    const int n = static_cast<int>(a.rows());
    Vector diag(n);
    for (int i = 0; i < n; ++i) {
        diag(i) = a(i, i).real();
        if (!(diag(i) > 0.0)) return -kInf;
    }
    Vector s = diag.cwiseSqrt().cwiseInverse();
    CMatrix scaled = s.asDiagonal() * a * s.asDiagonal();
    return hermitian_min_eigenvalue(scaled);
}

double golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

std::vector<int> WeightSet::infeasible_points() const {
    std::vector<int> out;
    for (size_t i = 0; i < at.size(); ++i)
        if (!at[i].feasible) out.push_back(static_cast<int>(i));
    return out;
}

AssemblyWeights design_relative_weights(const AssemblyFrf& h_a, double gamma, double scale) {
    if (!(gamma > 0.0)) throw std::invalid_argument("design_relative_weights: gamma must be > 0");
    if (!(scale > 0.0)) throw std::invalid_argument("design_relative_weights: scale must be > 0");
    const int p_a = h_a.h_a.rows();
    const int m_a = h_a.h_a.cols();
    AssemblyWeights out;
    out.v_a.resize(h_a.h_a.samples.size());
    out.w_a.resize(h_a.h_a.samples.size());
    for (size_t i = 0; i < h_a.h_a.samples.size(); ++i) {
        const double norm = spectral_norm(h_a.h_a.samples[i]);
        if (norm <= 0.0)
            throw std::domain_error("design_relative_weights: zero assembly FRF norm at grid point " +
                                    std::to_string(i));
        const double value = scale / std::sqrt(gamma * norm);
        out.v_a[i] = Vector::Constant(p_a, value);
        out.w_a[i] = Vector::Constant(m_a, value);
    }
    return out;
}

VwStepResult vw_step(const Vector& d_scalars, const CMatrix& n_sample, const Vector& v_a,
                     const Vector& w_a, const PortDims& dims, double eps_psd,
                     const std::optional<std::pair<Vector, Vector>>& warm_xy) {
    VwStepResult result;
    for (int i = 0; i < d_scalars.size(); ++i)
        if (!(d_scalars(i) > 0.0)) throw std::invalid_argument("vw_step: d scalars must be > 0");

    const int p_b = dims.total_outputs();
    const int m_b = dims.total_inputs();
    const int m_a = dims.ext_inputs;
    const int p_a = dims.ext_outputs;
    const int n1 = p_b + m_a; // column space (W, X = W^-2, D_r)
    const int n2 = m_b + p_a; // row space (V, Y = V^-2, D_l)
    if (n_sample.rows() != n2 || n_sample.cols() != n1)
        throw std::invalid_argument("vw_step: N sample dimension mismatch");
    if (v_a.size() != p_a || w_a.size() != m_a)
        throw std::invalid_argument("vw_step: assembly weight dimension mismatch");

    Vector d_row, d_col;
    expand_d(d_scalars, dims, d_row, d_col);

    const Vector x_pin = w_a.array().pow(-2.0);
    const Vector y_pin = v_a.array().pow(-2.0);
    const double pinned_sum = x_pin.sum() + y_pin.sum();
    const int nfree = p_b + m_b;
    const double shrink = 1.0 - eps_psd;

    // z = [x_0..x_{p_b-1}, y_0..y_{m_b-1}]; B(z) is the eps-margined block matrix.
    auto fill_b = [&](const Vector& z, CMatrix& b) {
        b.setZero(n1 + n2, n1 + n2);
        for (int i = 0; i < p_b; ++i) b(i, i) = shrink * z(i) / d_col(i);
        for (int i = 0; i < m_a; ++i) b(p_b + i, p_b + i) = shrink * x_pin(i) / d_col(p_b + i);
        for (int i = 0; i < m_b; ++i) b(n1 + i, n1 + i) = shrink * z(p_b + i) * d_row(i);
        for (int i = 0; i < p_a; ++i)
            b(n1 + m_b + i, n1 + m_b + i) = shrink * y_pin(i) * d_row(m_b + i);
        b.block(0, n1, n1, n2) = n_sample.adjoint();
        b.block(n1, 0, n2, n1) = n_sample;
    };

    auto objective = [&](const Vector& z) { return z.sum() + pinned_sum; };

    Vector coef(nfree);
    std::vector<int> pos(nfree);
    for (int i = 0; i < p_b; ++i) { coef(i) = shrink / d_col(i); pos[i] = i; }
    for (int i = 0; i < m_b; ++i) { coef(p_b + i) = shrink * d_row(i); pos[p_b + i] = n1 + i; }

    CMatrix b(n1 + n2, n1 + n2);

    // Start point: warm when provided and still feasible, else scale up until PD.
    Vector z(nfree);
    bool have_start = false;
    bool warm_used = false;
    if (warm_xy) {
        if (warm_xy->first.size() == p_b && warm_xy->second.size() == m_b) {
            z.head(p_b) = warm_xy->first;
            z.tail(m_b) = warm_xy->second;
            if (z.minCoeff() > 0.0) {
                fill_b(z, b);
                have_start = factor_hermitian(b).ok;
                warm_used = have_start;
            }
        }
    }
    if (!have_start) {
        double s = std::max(1.0, n_sample.cwiseAbs().maxCoeff());
        for (int attempt = 0; attempt < 400; ++attempt) {
            for (int i = 0; i < p_b; ++i) z(i) = s * d_col(i);
            for (int i = 0; i < m_b; ++i) z(p_b + i) = s / d_row(i);
            fill_b(z, b);
            if (factor_hermitian(b).ok) { have_start = true; break; }
            s *= 4.0;
            if (!std::isfinite(s)) break;
        }
    }
    if (!have_start) return result; // infeasible / numerically hopeless

    fill_b(z, b);
    HermFactor fac = factor_hermitian(b);
    if (!fac.ok) return result;

    // A warm start sits near the central path; recover its barrier parameter
    // from the stationarity balance instead of re-walking the t-schedule.
    double t = nfree / std::max(objective(z), 1e-300);
    if (warm_used) {
        double balance = 0.0;
        for (int i = 0; i < nfree; ++i) balance += coef(i) * fac.inverse(pos[i], pos[i]).real();
        t = std::max(t, balance / nfree);
    }
    const double mu = 30.0;

    for (int outer = 0; outer < 60; ++outer) {
        for (int inner = 0; inner < 40; ++inner) {
            Vector g(nfree);
            Matrix hess(nfree, nfree);
            for (int i = 0; i < nfree; ++i) {
                g(i) = t - coef(i) * fac.inverse(pos[i], pos[i]).real();
                for (int j = 0; j <= i; ++j) {
                    const double hij = coef(i) * coef(j) * std::norm(fac.inverse(pos[i], pos[j]));
                    hess(i, j) = hij;
                    hess(j, i) = hij;
                }
            }
            // diagonal equilibration keeps the Newton solve well conditioned
            Vector hscale(nfree);
            for (int i = 0; i < nfree; ++i) hscale(i) = 1.0 / std::sqrt(hess(i, i) + 1e-300);
            Matrix hs = hscale.asDiagonal() * hess * hscale.asDiagonal();
            Vector gs = hscale.asDiagonal() * g;
            Vector step_s = -hs.ldlt().solve(gs);
            Vector step = hscale.asDiagonal() * step_s;
            if (!step.allFinite()) {
                hs.diagonal().array() += 1e-12;
                step = hscale.asDiagonal() * Matrix(-hs.ldlt().solve(gs));
                if (!step.allFinite()) break;
            }
            // centering to Newton decrement ~1e-2 suffices for this mu range
            const double decrement2 = -g.dot(step);
            if (decrement2 < 1e-4) break;

            double alpha = 1.0;
            for (int i = 0; i < nfree; ++i)
                if (step(i) < 0.0) alpha = std::min(alpha, -0.98 * z(i) / step(i));

            const double phi0 = t * z.sum() - fac.logdet;
            bool accepted = false;
            bool bounded = false; // exact PD step bound computed lazily on failure
            for (int trial = 0; trial < 30 && alpha > 1e-14; ++trial) {
                Vector zc = z + alpha * step;
                if (zc.minCoeff() > 0.0) {
                    fill_b(zc, b);
                    HermFactor fc = factor_hermitian(b);
                    if (fc.ok) {
                        const double phic = t * zc.sum() - fc.logdet;
                        if (phic <= phi0 + 0.25 * alpha * g.dot(step)) {
                            z = zc;
                            fac = std::move(fc);
                            accepted = true;
                            break;
                        }
                    } else if (!bounded) {
                        Vector delta_diag = Vector::Zero(n1 + n2);
                        for (int i = 0; i < nfree; ++i) delta_diag(pos[i]) += coef(i) * step(i);
                        alpha = std::min(alpha, 0.95 * fac.max_step(delta_diag));
                        bounded = true;
                        continue;
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted) break;
        }
        if (nfree / t <= 1e-8 * objective(z)) break;
        t *= mu;
    }

    // Feasibility floor; raising diagonal entries keeps the matrix PD.
    for (int i = 0; i < p_b; ++i) z(i) = std::max(z(i), eps_psd * d_col(i));
    for (int i = 0; i < m_b; ++i) z(p_b + i) = std::max(z(p_b + i), eps_psd / d_row(i));

    result.objective = objective(z);
    result.w.resize(dims.component_count());
    result.v.resize(dims.component_count());
    int c = 0;
    for (int j = 0; j < dims.component_count(); ++j) {
        result.w[j].resize(dims.outputs[j]);
        for (int i = 0; i < dims.outputs[j]; ++i) result.w[j](i) = 1.0 / std::sqrt(z(c++));
    }
    c = p_b;
    for (int j = 0; j < dims.component_count(); ++j) {
        result.v[j].resize(dims.inputs[j]);
        for (int i = 0; i < dims.inputs[j]; ++i) result.v[j](i) = 1.0 / std::sqrt(z(c++));
    }

    FrequencyWeights fw;
    fw.v_a = v_a;
    fw.w_a = w_a;
    fw.v = result.v;
    fw.w = result.w;
    fw.d = d_scalars;
    result.min_eig_unit = unit_scaled_min_eig(certificate_matrix(fw, n_sample, dims));
    result.ok = std::isfinite(result.objective) && result.min_eig_unit >= eps_psd - 1e-9;
    return result;
}

double scaled_norm(const std::vector<Vector>& v_comp, const std::vector<Vector>& w_comp,
                   const CMatrix& n_sample, const Vector& v_a, const Vector& w_a,
                   const PortDims& dims, const Vector& d_scalars) {
    Vector d_row, d_col;
    expand_d(d_scalars, dims, d_row, d_col);
    const Vector v_full = stack_row(v_comp, v_a, dims);
    const Vector w_full = stack_col(w_comp, w_a, dims);
    Vector row_scale = v_full.array() * d_row.array().rsqrt();
    Vector col_scale = w_full.array() * d_col.array().sqrt();
    CMatrix scaled = row_scale.asDiagonal() * n_sample * col_scale.asDiagonal();
    return spectral_norm(scaled);
}

Vector d_step(const std::vector<Vector>& v_comp, const std::vector<Vector>& w_comp,
              const CMatrix& n_sample, const Vector& v_a, const Vector& w_a,
              const PortDims& dims, const Vector& d_init) {
    const int k = dims.component_count();
    Vector d = d_init.size() == k + 1 ? d_init : Vector::Ones(k + 1);
    const Vector v_full = stack_row(v_comp, v_a, dims);
    const Vector w_full = stack_col(w_comp, w_a, dims);
    const CMatrix g0 = v_full.asDiagonal() * n_sample * w_full.asDiagonal();

    auto norm_at = [&](const Vector& dv) {
        Vector d_row, d_col;
        expand_d(dv, dims, d_row, d_col);
        Vector row_scale = d_row.array().rsqrt();
        Vector col_scale = d_col.array().sqrt();
        CMatrix scaled = row_scale.asDiagonal() * g0 * col_scale.asDiagonal();
        return spectral_norm(scaled);
    };

    // The scaled norm is convex in log d; coordinate sweeps converge fast.
    // Updates are kept only when they actually improve, so the returned
    // scalars never have a larger scaled norm than the starting point.
    double current = norm_at(d);
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (int c = 0; c < k + 1; ++c) {
            const double u0 = std::log(d(c));
            auto f = [&](double u) {
                Vector dv = d;
                dv(c) = std::exp(u);
                return norm_at(dv);
            };
            const double u = golden_section(f, u0 - 7.0, u0 + 7.0, 1e-3);
            Vector candidate = d;
            candidate(c) = std::exp(u);
            const double value = norm_at(candidate);
            if (value <= current) {
                d = candidate;
                current = value;
            }
        }
    }
    return d;
}

WeightSet translate(const std::vector<CMatrix>& n_samples, const AssemblyWeights& assembly,
                    const PortDims& dims, const FrequencyGrid& grid, const TranslateOptions& opts) {
    if (static_cast<int>(n_samples.size()) != grid.size() ||
        assembly.v_a.size() != n_samples.size() || assembly.w_a.size() != n_samples.size())
        throw std::invalid_argument("translate: per-frequency input sizes disagree");

    const int k = dims.component_count();
    WeightSet ws;
    ws.grid = grid;
    ws.port_dims = dims;
    ws.at.resize(grid.size());

    parallel_for(grid.size(), opts.threads, [&](int i) {
        FrequencyWeights fw;
        fw.v_a = assembly.v_a[i];
        fw.w_a = assembly.w_a[i];
        fw.d = Vector::Ones(k + 1);
        if (!n_samples[i].allFinite()) {
            fw.feasible = false;
            ws.at[i] = fw;
            return;
        }

        Vector d = Vector::Ones(k + 1);
        std::optional<std::pair<Vector, Vector>> warm;
        double obj_prev = kInf;
        VwStepResult last;
        bool ok = false;
        for (int round = 0; round < opts.max_rounds; ++round) {
            VwStepResult res = vw_step(d, n_samples[i], fw.v_a, fw.w_a, dims, opts.eps_psd, warm);
            if (!res.ok) { ok = false; break; }
            last = res;
            ok = true;

            Vector x_free(dims.total_outputs()), y_free(dims.total_inputs());
            int c = 0;
            for (int j = 0; j < k; ++j)
                for (int e = 0; e < dims.outputs[j]; ++e) x_free(c++) = std::pow(res.w[j](e), -2.0);
            c = 0;
            for (int j = 0; j < k; ++j)
                for (int e = 0; e < dims.inputs[j]; ++e) y_free(c++) = std::pow(res.v[j](e), -2.0);
            warm = std::make_pair(x_free, y_free);

            d = d_step(res.v, res.w, n_samples[i], fw.v_a, fw.w_a, dims, d);

            if (round > 0 && (obj_prev - res.objective) < opts.rel_tol * std::abs(obj_prev)) break;
            obj_prev = res.objective;
        }

        if (ok) {
            fw.v = last.v;
            fw.w = last.w;
            fw.d = d;
            fw.objective = last.objective;
            fw.feasible = true;
        }
        ws.at[i] = fw;
    });
    return ws;
}

RequirementCheck check_requirement(const FrfData& error, const std::vector<Vector>& v,
                                   const std::vector<Vector>& w, RequirementForm form,
                                   double slack) {
    if (v.size() != error.samples.size() || w.size() != error.samples.size())
        throw std::invalid_argument("check_requirement: per-frequency weight count mismatch");

    RequirementCheck check;
    check.values.resize(error.samples.size());
    check.max_value = -1.0;
    for (size_t i = 0; i < error.samples.size(); ++i) {
        const CMatrix& e = error.samples[i];
        CMatrix scaled;
        if (form == RequirementForm::component) {
            if (w[i].size() != e.rows() || v[i].size() != e.cols())
                throw std::invalid_argument("check_requirement: component weight sizes mismatch");
            scaled = w[i].cwiseInverse().asDiagonal() * e * v[i].cwiseInverse().asDiagonal();
        } else {
            if (v[i].size() != e.rows() || w[i].size() != e.cols())
                throw std::invalid_argument("check_requirement: assembly weight sizes mismatch");
            scaled = v[i].asDiagonal() * e * w[i].asDiagonal();
        }
        check.values[i] = spectral_norm(scaled);
        if (check.values[i] > check.max_value) {
            check.max_value = check.values[i];
            check.worst_index = static_cast<int>(i);
            check.worst_omega = error.grid.omega(static_cast<int>(i));
        }
    }
    if (check.max_value < 0.0) check.max_value = 0.0;
    if (form == RequirementForm::component)
        check.satisfied = check.max_value <= 1.0 + slack;
    else
        check.satisfied = check.max_value < 1.0 + slack;
    return check;
}

CMatrix certificate_matrix(const FrequencyWeights& fw, const CMatrix& n_sample,
                           const PortDims& dims) {
    Vector d_row, d_col;
    expand_d(fw.d, dims, d_row, d_col);
    const Vector x = stack_col(fw.w, fw.w_a, dims).array().pow(-2.0);
    const Vector y = stack_row(fw.v, fw.v_a, dims).array().pow(-2.0);
    const int n1 = static_cast<int>(x.size());
    const int n2 = static_cast<int>(y.size());
    CMatrix a = CMatrix::Zero(n1 + n2, n1 + n2);
    for (int i = 0; i < n1; ++i) a(i, i) = x(i) / d_col(i);
    for (int i = 0; i < n2; ++i) a(n1 + i, n1 + i) = y(i) * d_row(i);
    a.block(0, n1, n1, n2) = n_sample.adjoint();
    a.block(n1, 0, n2, n1) = n_sample;
    return a;
}

CertificateReport verify_certificate(const WeightSet& ws, const std::vector<CMatrix>& n_samples,
                                     double tol) {
    if (n_samples.size() != ws.at.size())
        throw std::invalid_argument("verify_certificate: sample count mismatch");
    CertificateReport report;
    report.min_eigenvalues.assign(ws.at.size(), std::numeric_limits<double>::quiet_NaN());
    for (size_t i = 0; i < ws.at.size(); ++i) {
        if (!ws.at[i].feasible) {
            report.skipped_infeasible.push_back(static_cast<int>(i));
            continue;
        }
        const CMatrix a = certificate_matrix(ws.at[i], n_samples[i], ws.port_dims);
        const double lmin = unit_scaled_min_eig(a);
        report.min_eigenvalues[i] = lmin;
        if (!(lmin >= tol)) {
            report.violations.push_back(static_cast<int>(i));
            report.all_ok = false;
        }
    }
    return report;
}

std::string weights_to_json(const WeightSet& ws) {
    nlohmann::json j;
    j["format"] = "cmsrom-weights";
    j["version"] = 1;
    j["port_dims"] = {{"inputs", ws.port_dims.inputs},
                      {"outputs", ws.port_dims.outputs},
                      {"ext_inputs", ws.port_dims.ext_inputs},
                      {"ext_outputs", ws.port_dims.ext_outputs}};
    j["grid_rad"] = std::vector<double>(ws.grid.points_rad.data(),
                                        ws.grid.points_rad.data() + ws.grid.size());
    j["grid_description"] = ws.grid.description;
    nlohmann::json freqs = nlohmann::json::array();
    auto vec = [](const Vector& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    for (const auto& fw : ws.at) {
        nlohmann::json e;
        e["feasible"] = fw.feasible;
        e["objective"] = fw.objective;
        e["v_a"] = vec(fw.v_a);
        e["w_a"] = vec(fw.w_a);
        e["d"] = vec(fw.d);
        nlohmann::json vs = nlohmann::json::array(), wsj = nlohmann::json::array();
        for (const auto& v : fw.v) vs.push_back(vec(v));
        for (const auto& w : fw.w) wsj.push_back(vec(w));
        e["v"] = vs;
        e["w"] = wsj;
        freqs.push_back(std::move(e));
    }
    j["frequencies"] = std::move(freqs);
    return j.dump(2);
}

WeightSet weights_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "cmsrom-weights")
        throw std::runtime_error("weights_from_json: not a cmsrom-weights document");
    if (j.value("version", 0) != 1)
        throw std::runtime_error("weights_from_json: unsupported version");

    WeightSet ws;
    ws.port_dims.inputs = j["port_dims"]["inputs"].get<std::vector<int>>();
    ws.port_dims.outputs = j["port_dims"]["outputs"].get<std::vector<int>>();
    ws.port_dims.ext_inputs = j["port_dims"]["ext_inputs"].get<int>();
    ws.port_dims.ext_outputs = j["port_dims"]["ext_outputs"].get<int>();

    auto grid = j["grid_rad"].get<std::vector<double>>();
    ws.grid.points_rad = Eigen::Map<Vector>(grid.data(), grid.size());
    ws.grid.description = j.value("grid_description", "");

    auto to_vec = [](const nlohmann::json& a) {
        auto v = a.get<std::vector<double>>();
        return Vector(Eigen::Map<Vector>(v.data(), v.size()));
    };
    for (const auto& e : j["frequencies"]) {
        FrequencyWeights fw;
        fw.feasible = e["feasible"].get<bool>();
        fw.objective = e["objective"].is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                : e["objective"].get<double>();
        fw.v_a = to_vec(e["v_a"]);
        fw.w_a = to_vec(e["w_a"]);
        fw.d = to_vec(e["d"]);
        for (const auto& v : e["v"]) fw.v.push_back(to_vec(v));
        for (const auto& w : e["w"]) fw.w.push_back(to_vec(w));
        ws.at.push_back(std::move(fw));
    }
    return ws;
}

} // namespace cmsrom
