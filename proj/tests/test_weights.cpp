#include "cmsrom/modal.hpp"
#include "cmsrom/weights.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <random>

using namespace cmsrom;

namespace {

struct CantileverSetup {
    FrequencyGrid grid;
    FrfData h1, h2, h_b;
    AssemblyFrf h_a;
    Interconnection kc;
    std::vector<CMatrix> n_samples;
    AssemblyWeights assembly;
};

CantileverSetup make_setup(double k_c, double gamma, int grid_points) {
    static const auto beam1 = fixtures::make_damped_beam(fixtures::beam1_ports());
    static const auto beam2 = fixtures::make_damped_beam(fixtures::beam2_ports());
    CantileverSetup s;
    s.grid = FrequencyGrid::log_spaced(0.1, 400.0, grid_points);
    s.h1 = frf_direct(beam1.model, s.grid);
    s.h2 = frf_direct(beam2.model, s.grid);
    s.h_b = block_diag_frf({s.h1, s.h2});
    s.kc = fixtures::cantilever_interconnection(k_c);
    s.h_a = couple(s.h_b, s.kc);
    for (int i = 0; i < s.grid.size(); ++i) s.n_samples.push_back(build_n(s.h_b.samples[i], s.kc));
    s.assembly = design_relative_weights(s.h_a, gamma);
    return s;
}

// Random full complex matrix with unit spectral norm.
CMatrix random_unit_ball(int rows, int cols, std::mt19937_64& rng, bool on_boundary) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
    double norm = spectral_norm(g);
    if (norm == 0.0) return g;
    if (!on_boundary) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        return g * (unif(rng) / norm);
    }
    return g / norm;
}

// Direct evaluation of the induced assembly error for sampled component
// errors: perturb H_B, re-couple, subtract. Independent of build_n.
CMatrix induced_assembly_error(const CantileverSetup& s, int point,
                               const std::vector<CMatrix>& component_errors) {
    CMatrix hb_hat = s.h_b.samples[point];
    int ro = 0, co = 0;
    for (size_t j = 0; j < component_errors.size(); ++j) {
        hb_hat.block(ro, co, component_errors[j].rows(), component_errors[j].cols()) +=
            component_errors[j];
        ro += static_cast<int>(component_errors[j].rows());
        co += static_cast<int>(component_errors[j].cols());
    }
    const CMatrix kbb = s.kc.k_bb.cast<Complex>();
    const CMatrix kba = s.kc.k_ba.cast<Complex>();
    const CMatrix kab = s.kc.k_ab.cast<Complex>();
    const int m_b = static_cast<int>(kbb.rows());
    auto couple_one = [&](const CMatrix& hb) -> CMatrix {
        const CMatrix resolvent = CMatrix::Identity(m_b, m_b) - kbb * hb;
        return kab * hb * resolvent.partialPivLu().solve(kba);
    };
    return couple_one(hb_hat) - couple_one(s.h_b.samples[point]);
}

} // namespace

TEST_CASE("design_relative_weights: formula and degenerate limits") {
    auto s = make_setup(1e4, 0.05, 8);
    for (int i = 0; i < s.grid.size(); ++i) {
        const double h_norm = spectral_norm(s.h_a.h_a.samples[i]);
        const double expected = 1.0 / std::sqrt(0.05 * h_norm);
        CHECK(s.assembly.v_a[i](0) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(s.assembly.w_a[i](0) == doctest::Approx(expected).epsilon(1e-12));

        // SISO equivalence: ||V_A E W_A|| < 1  <=>  |E|/|H| < gamma
        const double margin_error = 0.999 * 0.05 * h_norm;
        CHECK(s.assembly.v_a[i](0) * margin_error * s.assembly.w_a[i](0) < 1.0);
        const double over_error = 1.001 * 0.05 * h_norm;
        CHECK(s.assembly.v_a[i](0) * over_error * s.assembly.w_a[i](0) > 1.0);
    }

    // 2x2 variant with the half scale
    AssemblyFrf h22;
    h22.h_a.grid = FrequencyGrid::log_spaced(1.0, 2.0, 2);
    h22.h_a.samples.assign(2, CMatrix::Identity(2, 2) * Complex(4.0, 0.0));
    h22.h_a.point_ok.assign(2, 1);
    const auto w22 = design_relative_weights(h22, 0.01, 0.5);
    CHECK(w22.v_a[0].size() == 2);
    CHECK(w22.v_a[0](0) == doctest::Approx(0.5 / std::sqrt(0.01 * 4.0)));
    CHECK(w22.w_a[0](1) == doctest::Approx(0.5 / std::sqrt(0.01 * 4.0)));

    // very loose gamma sends the weights toward zero
    const auto loose = design_relative_weights(h22, 1e12, 1.0);
    CHECK(loose.v_a[0](0) < 1e-5);
}

TEST_CASE("vw_step: zero coupling is pinned at the feasibility floor") {
    PortDims dims;
    dims.inputs = {1, 1};
    dims.outputs = {1, 1};
    dims.ext_inputs = 1;
    dims.ext_outputs = 1;
    const CMatrix n0 = CMatrix::Zero(3, 3);
    const Vector v_a = Vector::Constant(1, 2.0);
    const Vector w_a = Vector::Constant(1, 3.0);
    const Vector d = Vector::Ones(3);

    const auto res = vw_step(d, n0, v_a, w_a, dims, 1e-8);
    REQUIRE(res.ok);
    // x,y land on the eps floor, so the weights are huge but finite
    for (int j = 0; j < 2; ++j) {
        CHECK(res.w[j](0) == doctest::Approx(1.0 / std::sqrt(1e-8)).epsilon(1e-6));
        CHECK(res.v[j](0) == doctest::Approx(1.0 / std::sqrt(1e-8)).epsilon(1e-6));
    }
    CHECK(res.min_eig_unit >= 1e-8 - 1e-9);
}

TEST_CASE("vw_step + d_step: certificate margin and alternation monotonicity") {
    auto s = make_setup(1e5, 0.05, 6);
    PortDims dims = s.kc.port_dims;
    const int probe = 3;

    Vector d = Vector::Ones(3);
    std::optional<std::pair<Vector, Vector>> warm;
    double previous = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 6; ++round) {
        const auto res =
            vw_step(d, s.n_samples[probe], s.assembly.v_a[probe], s.assembly.w_a[probe], dims,
                    1e-8, warm);
        REQUIRE(res.ok);
        CHECK(res.min_eig_unit >= 1e-8 - 1e-9); // postcondition re-verified
        CHECK(res.objective <= previous * (1.0 + 1e-7));
        previous = res.objective;

        Vector x(2), y(2);
        for (int j = 0; j < 2; ++j) x(j) = std::pow(res.w[j](0), -2.0);
        for (int j = 0; j < 2; ++j) y(j) = std::pow(res.v[j](0), -2.0);
        warm = std::make_pair(x, y);

        const double before = scaled_norm(res.v, res.w, s.n_samples[probe], s.assembly.v_a[probe],
                                          s.assembly.w_a[probe], dims, d);
        d = d_step(res.v, res.w, s.n_samples[probe], s.assembly.v_a[probe], s.assembly.w_a[probe],
                   dims, d);
        const double after = scaled_norm(res.v, res.w, s.n_samples[probe], s.assembly.v_a[probe],
                                         s.assembly.w_a[probe], dims, d);
        CHECK(after <= before * (1.0 + 1e-9));
    }
}

TEST_CASE("d_step: minimizer quality against a log-grid search") {
    auto s = make_setup(1e4, 0.05, 5);
    PortDims dims = s.kc.port_dims;
    const int probe = 2;

    const auto res = vw_step(Vector::Ones(3), s.n_samples[probe], s.assembly.v_a[probe],
                             s.assembly.w_a[probe], dims, 1e-8);
    REQUIRE(res.ok);

    auto norm_at = [&](const Vector& d) {
        return scaled_norm(res.v, res.w, s.n_samples[probe], s.assembly.v_a[probe],
                           s.assembly.w_a[probe], dims, d);
    };

    const Vector ones = Vector::Ones(3);
    const Vector d = d_step(res.v, res.w, s.n_samples[probe], s.assembly.v_a[probe],
                            s.assembly.w_a[probe], dims, ones);
    CHECK(norm_at(d) <= norm_at(ones) * (1.0 + 1e-12));

    // brute-force grid over (d_1, d_2, d_A), 1% agreement required
    double best = std::numeric_limits<double>::infinity();
    for (int a = -12; a <= 12; ++a)
        for (int b = -12; b <= 12; ++b)
            for (int c = -12; c <= 12; ++c) {
                Vector dg(3);
                dg << std::pow(10.0, a / 3.0), std::pow(10.0, b / 3.0), std::pow(10.0, c / 3.0);
                best = std::min(best, norm_at(dg));
            }
    CHECK(norm_at(d) <= best * 1.01);
}

TEST_CASE("d_step: single-block scaling is scale invariant") {
    PortDims dims;
    dims.inputs = {2};
    dims.outputs = {2};
    dims.ext_inputs = 0;
    dims.ext_outputs = 0;
    CMatrix n(2, 2);
    n << Complex(1, 2), Complex(0, 1), Complex(3, 0), Complex(-1, 1);
    std::vector<Vector> v{Vector::Constant(2, 1.5)}, w{Vector::Constant(2, 0.7)};
    const Vector v_a(0), w_a(0);

    Vector d1 = Vector::Ones(2); // one component block + (empty) assembly block scalar
    Vector d2 = Vector::Constant(2, 123.0);
    CHECK(scaled_norm(v, w, n, v_a, w_a, dims, d1) ==
          doctest::Approx(scaled_norm(v, w, n, v_a, w_a, dims, d2)).epsilon(1e-12));
}

TEST_CASE("translate: certificates hold and the implication is sound (Monte-Carlo)") {
    auto s = make_setup(1e4, 0.05, 10);
    TranslateOptions opts;
    const auto ws = translate(s.n_samples, s.assembly, s.kc.port_dims, s.grid, opts);
    REQUIRE(ws.infeasible_points().empty());

    const auto cert = verify_certificate(ws, s.n_samples);
    CHECK(cert.all_ok);
    for (double e : cert.min_eigenvalues) CHECK(e >= -1e-9);

    // sampled component errors on the boundary of their sets never push the
    // assembly error out of its set
    std::mt19937_64 rng(20240817);
    int checked = 0;
    for (int i = 0; i < s.grid.size(); i += 3) {
        const auto& fw = ws.at[i];
        for (int trial = 0; trial < 250; ++trial) {
            std::vector<CMatrix> errors(2);
            for (int j = 0; j < 2; ++j) {
                const int p = s.kc.port_dims.outputs[j];
                const int m = s.kc.port_dims.inputs[j];
                const CMatrix g = random_unit_ball(p, m, rng, true);
                errors[j] = fw.w[j].asDiagonal() * g * fw.v[j].asDiagonal();
            }
            const CMatrix e_a = induced_assembly_error(s, i, errors);
            const double value =
                spectral_norm(fw.v_a.asDiagonal() * e_a * fw.w_a.asDiagonal());
            CHECK(value < 1.0);
            ++checked;
        }
    }
    CHECK(checked >= 1000);
}

TEST_CASE("translate: decoupled single component reduces to the plain implication") {
    // k = 1, K_bb = 0, K_ab = K_ba = I: the requirement translation must make
    // ||V_A E W_A|| < 1 whenever ||W1^-1 E V1^-1|| <= 1.
    PortDims dims;
    dims.inputs = {2};
    dims.outputs = {2};
    dims.ext_inputs = 2;
    dims.ext_outputs = 2;
    Interconnection kc;
    kc.port_dims = dims;
    kc.k_bb = Matrix::Zero(2, 2);
    kc.k_ba = Matrix::Identity(2, 2);
    kc.k_ab = Matrix::Identity(2, 2);

    FrequencyGrid grid = FrequencyGrid::log_spaced(1.0, 2.0, 2);
    CMatrix hb(2, 2);
    hb << Complex(1e-3, -1e-4), Complex(2e-4, 0), Complex(0, 1e-4), Complex(5e-4, 2e-4);
    std::vector<CMatrix> n_samples;
    for (int i = 0; i < 2; ++i) n_samples.push_back(build_n(hb, kc));

    AssemblyWeights aw;
    aw.v_a.assign(2, Vector::Constant(2, 7.0));
    aw.w_a.assign(2, Vector::Constant(2, 7.0));

    const auto ws = translate(n_samples, aw, dims, grid);
    REQUIRE(ws.infeasible_points().empty());

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const CMatrix g = random_unit_ball(2, 2, rng, true);
        const CMatrix e = ws.at[0].w[0].asDiagonal() * g * ws.at[0].v[0].asDiagonal();
        // K_bb = 0 so E_A = K_ab E K_ba = E
        const double value =
            spectral_norm(ws.at[0].v_a.asDiagonal() * e * ws.at[0].w_a.asDiagonal());
        CHECK(value < 1.0);
    }
}

TEST_CASE("translate: frequency independence (single-point grid reproduces the slice)") {
    auto s = make_setup(1e5, 0.05, 7);
    const auto full = translate(s.n_samples, s.assembly, s.kc.port_dims, s.grid);

    const int probe = 4;
    FrequencyGrid single;
    single.points_rad.resize(1);
    single.points_rad(0) = s.grid.omega(probe);
    single.description = "slice";
    AssemblyWeights aw;
    aw.v_a = {s.assembly.v_a[probe]};
    aw.w_a = {s.assembly.w_a[probe]};
    const auto one = translate({s.n_samples[probe]}, aw, s.kc.port_dims, single);

    REQUIRE(one.at[0].feasible);
    CHECK(one.at[0].objective == full.at[probe].objective);
    for (int j = 0; j < 2; ++j) {
        CHECK((one.at[0].v[j] - full.at[probe].v[j]).norm() == 0.0);
        CHECK((one.at[0].w[j] - full.at[probe].w[j]).norm() == 0.0);
    }
}

TEST_CASE("check_requirement: trivial values, bilinearity, SISO form") {
    FrequencyGrid grid = FrequencyGrid::log_spaced(1.0, 10.0, 3);
    FrfData err;
    err.grid = grid;
    err.samples.assign(3, CMatrix::Constant(1, 1, Complex(0.6, 0.8)));
    err.point_ok.assign(3, 1);

    std::vector<Vector> v(3, Vector::Constant(1, 2.0)), w(3, Vector::Constant(1, 4.0));

    SUBCASE("zero error satisfies with max 0") {
        auto zero = err;
        for (auto& s : zero.samples) s.setZero();
        const auto check = check_requirement(zero, v, w, RequirementForm::component);
        CHECK(check.satisfied);
        CHECK(check.max_value == 0.0);
    }
    SUBCASE("SISO component value is |E|/(w v)") {
        const auto check = check_requirement(err, v, w, RequirementForm::component);
        CHECK(check.max_value == doctest::Approx(1.0 / 8.0));
        CHECK(check.satisfied);
    }
    SUBCASE("doubling both weights quarters the component values") {
        const auto base = check_requirement(err, v, w, RequirementForm::component);
        std::vector<Vector> v2(3, Vector::Constant(1, 4.0)), w2(3, Vector::Constant(1, 8.0));
        const auto scaled = check_requirement(err, v2, w2, RequirementForm::component);
        for (size_t i = 0; i < base.values.size(); ++i)
            CHECK(scaled.values[i] == doctest::Approx(base.values[i] / 4.0));
    }
    SUBCASE("assembly form multiplies instead of dividing") {
        const auto check = check_requirement(err, v, w, RequirementForm::assembly);
        CHECK(check.max_value == doctest::Approx(8.0));
        CHECK(!check.satisfied);
    }
}

TEST_CASE("verify_certificate: perturbed scalings fail, infeasible points are listed") {
    auto s = make_setup(1e6, 0.05, 6);
    auto ws = translate(s.n_samples, s.assembly, s.kc.port_dims, s.grid);
    REQUIRE(verify_certificate(ws, s.n_samples).all_ok);

    SUBCASE("poisoned d scalars are caught") {
        auto poisoned = ws;
        bool any_violation = false;
        for (auto& fw : poisoned.at) fw.d(0) *= 1000.0;
        const auto report = verify_certificate(poisoned, s.n_samples);
        for (double e : report.min_eigenvalues)
            if (e < -1e-9) any_violation = true;
        CHECK(any_violation);
        CHECK(!report.all_ok);
    }
    SUBCASE("infeasible-flagged points are skipped and reported") {
        auto flagged = ws;
        flagged.at[2].feasible = false;
        const auto report = verify_certificate(flagged, s.n_samples);
        REQUIRE(report.skipped_infeasible.size() == 1);
        CHECK(report.skipped_infeasible[0] == 2);
        CHECK(std::isnan(report.min_eigenvalues[2]));
    }
}

TEST_CASE("weights JSON round trip") {
    auto s = make_setup(1e4, 0.05, 4);
    const auto ws = translate(s.n_samples, s.assembly, s.kc.port_dims, s.grid);
    const std::string text = weights_to_json(ws);
    const auto back = weights_from_json(text);

    REQUIRE(back.at.size() == ws.at.size());
    CHECK(back.port_dims.inputs == ws.port_dims.inputs);
    for (size_t i = 0; i < ws.at.size(); ++i) {
        CHECK(back.at[i].feasible == ws.at[i].feasible);
        CHECK((back.at[i].v_a - ws.at[i].v_a).norm() == 0.0);
        CHECK((back.at[i].d - ws.at[i].d).norm() == 0.0);
        for (size_t j = 0; j < ws.at[i].v.size(); ++j)
            CHECK((back.at[i].v[j] - ws.at[i].v[j]).norm() == 0.0);
    }
}
