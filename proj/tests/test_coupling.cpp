#include "cmsrom/coupling.hpp"
#include "cmsrom/modal.hpp"

#include "oracles.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

using namespace cmsrom;

namespace {

FrfData constant_frf(const FrequencyGrid& grid, const CMatrix& value) {
    FrfData f;
    f.grid = grid;
    f.samples.assign(grid.size(), value);
    f.point_ok.assign(grid.size(), 1);
    return f;
}

} // namespace

TEST_CASE("block_diag_frf: stacking") {
    const auto grid = FrequencyGrid::log_spaced(1.0, 10.0, 4);
    const auto a = constant_frf(grid, CMatrix::Constant(1, 1, Complex(1.0, 2.0)));
    const auto b = constant_frf(grid, CMatrix::Constant(1, 1, Complex(3.0, -1.0)));

    SUBCASE("single component is the identity operation") {
        const auto stacked = block_diag_frf({a});
        for (int i = 0; i < grid.size(); ++i) CHECK(stacked.samples[i] == a.samples[i]);
    }
    SUBCASE("two scalar components make a 2x2 diagonal") {
        const auto stacked = block_diag_frf({a, b});
        CHECK(stacked.rows() == 2);
        CHECK(stacked.cols() == 2);
        for (int i = 0; i < grid.size(); ++i) {
            CHECK(stacked.samples[i](0, 0) == Complex(1.0, 2.0));
            CHECK(stacked.samples[i](1, 1) == Complex(3.0, -1.0));
            CHECK(stacked.samples[i](0, 1) == Complex(0.0, 0.0));
            CHECK(stacked.samples[i](1, 0) == Complex(0.0, 0.0));
        }
    }
    SUBCASE("grid mismatch is rejected") {
        auto c = b;
        c.grid = FrequencyGrid::log_spaced(1.0, 20.0, 4);
        CHECK_THROWS_AS(block_diag_frf({a, c}), std::invalid_argument);
    }
}

TEST_CASE("couple: zero internal coupling degenerates to k_ab H_B k_ba") {
    const auto grid = FrequencyGrid::log_spaced(1.0, 10.0, 3);
    Interconnection kc;
    kc.port_dims.inputs = {1, 1};
    kc.port_dims.outputs = {1, 1};
    kc.port_dims.ext_inputs = 1;
    kc.port_dims.ext_outputs = 1;
    kc.k_bb = Matrix::Zero(2, 2);
    kc.k_ba = Matrix::Zero(2, 1);
    kc.k_ba << 2.0, 0.0;
    kc.k_ab = Matrix::Zero(1, 2);
    kc.k_ab << 0.0, 3.0;

    CMatrix hb(2, 2);
    hb << Complex(1, 1), Complex(0.5, 0), Complex(0, -1), Complex(2, 0);
    const auto coupled = couple(constant_frf(grid, hb), kc);
    const CMatrix expected = kc.k_ab.cast<Complex>() * hb * kc.k_ba.cast<Complex>();
    for (int i = 0; i < grid.size(); ++i)
        CHECK((coupled.h_a.samples[i] - expected).norm() <= 1e-14 * expected.norm());
}

TEST_CASE("couple: cantilever with k_c = 0 returns the drive-point FRF of beam 1") {
    const auto beam1 = fixtures::make_damped_beam(fixtures::beam1_ports());
    const auto beam2 = fixtures::make_damped_beam(fixtures::beam2_ports());
    const auto grid = FrequencyGrid::log_spaced(0.1, 400.0, 20);

    const auto h1 = frf_direct(beam1.model, grid);
    const auto h2 = frf_direct(beam2.model, grid);
    const auto h_b = block_diag_frf({h1, h2});
    const auto h_a = couple(h_b, fixtures::cantilever_interconnection(0.0));

    for (int i = 0; i < grid.size(); ++i)
        CHECK(std::abs(h_a.h_a.samples[i](0, 0) - h1.samples[i](0, 0)) <=
              1e-12 * std::abs(h1.samples[i](0, 0)));
}

TEST_CASE("couple: two oscillators and a spring match the monolithic 2-DOF solve") {
    auto make_osc = [](double m, double c, double k) {
        SecondOrderModel s;
        s.mass = Matrix::Constant(1, 1, m);
        s.damping = Matrix::Constant(1, 1, c);
        s.stiffness = Matrix::Constant(1, 1, k);
        s.input_map = Matrix::Identity(1, 1);
        s.output_map = Matrix::Identity(1, 1);
        s.boundary_dofs = {0};
        return s;
    };
    const auto osc1 = make_osc(1.0, 0.05, 100.0);
    const auto osc2 = make_osc(2.0, 0.08, 400.0);
    const double k_spring = 35.0;
    const auto grid = FrequencyGrid::log_spaced(0.1, 10.0, 40);

    // component ports: osc1 has [external force, spring]; osc2 has [spring]
    auto osc1p = osc1;
    osc1p.input_map = Matrix::Ones(1, 2);
    osc1p.output_map = Matrix::Ones(2, 1);

    Interconnection kc;
    kc.port_dims.inputs = {2, 1};
    kc.port_dims.outputs = {2, 1};
    kc.port_dims.ext_inputs = 1;
    kc.port_dims.ext_outputs = 1;
    kc.k_bb = Matrix::Zero(3, 3);
    kc.k_bb(1, 1) = -k_spring;
    kc.k_bb(1, 2) = k_spring;
    kc.k_bb(2, 1) = k_spring;
    kc.k_bb(2, 2) = -k_spring;
    kc.k_ba = Matrix::Zero(3, 1);
    kc.k_ba(0, 0) = 1.0;
    kc.k_ab = Matrix::Zero(1, 3);
    kc.k_ab(0, 0) = 1.0;

    const auto h_b = block_diag_frf({frf_direct(osc1p, grid), frf_direct(osc2, grid)});
    const auto h_a = couple(h_b, kc);

    Matrix b_glob = Matrix::Zero(2, 1);
    b_glob(0, 0) = 1.0;
    Matrix f_glob = Matrix::Zero(1, 2);
    f_glob(0, 0) = 1.0;
    for (int i = 0; i < grid.size(); ++i) {
        const CMatrix ref = oracles::monolithic_spring_frf(osc1, osc2, k_spring, 0, 0, b_glob,
                                                           f_glob, grid.omega(i));
        CHECK((h_a.h_a.samples[i] - ref).norm() <= 1e-10 * ref.norm());
    }
}

TEST_CASE("couple: full cantilever pair matches the monolithic assembled system") {
    const auto beam1 = fixtures::make_damped_beam(fixtures::beam1_ports());
    const auto beam2 = fixtures::make_damped_beam(fixtures::beam2_ports());
    const auto grid = FrequencyGrid::log_spaced(0.1, 400.0, 50);
    const double k_c = 1e4;

    const auto h_b = block_diag_frf({frf_direct(beam1.model, grid), frf_direct(beam2.model, grid)});
    const auto h_a = couple(h_b, fixtures::cantilever_interconnection(k_c));

    const int tip = beam_dof_index(beam1.params, 50, BeamDof::translation);
    const int cpl = beam_dof_index(beam1.params, 33, BeamDof::translation);
    Matrix b_glob = Matrix::Zero(200, 1);
    b_glob(tip, 0) = 1.0;
    Matrix f_glob = Matrix::Zero(1, 200);
    f_glob(0, tip) = 1.0;

    for (int i = 0; i < grid.size(); ++i) {
        const CMatrix ref = oracles::monolithic_spring_frf(beam1.model, beam2.model, k_c, cpl, cpl,
                                                           b_glob, f_glob, grid.omega(i));
        const double rel = (h_a.h_a.samples[i] - ref).norm() / ref.norm();
        CHECK(rel <= 1e-9);
    }
}

TEST_CASE("assembly_error: zero and antisymmetry") {
    const auto beam1 = fixtures::make_damped_beam(fixtures::beam1_ports());
    const auto beam2 = fixtures::make_damped_beam(fixtures::beam2_ports());
    const auto grid = FrequencyGrid::log_spaced(0.1, 400.0, 10);
    const auto kc = fixtures::cantilever_interconnection(1e4);
    const auto h_b = block_diag_frf({frf_direct(beam1.model, grid), frf_direct(beam2.model, grid)});
    const auto h_a = couple(h_b, kc);

    const auto zero = assembly_error(h_a, h_a);
    for (const auto& s : zero.samples) CHECK(s.norm() == 0.0);

    auto perturbed = h_a;
    for (auto& s : perturbed.h_a.samples) s.array() += Complex(1e-6, 0.0);
    const auto e1 = assembly_error(h_a, perturbed);
    const auto e2 = assembly_error(perturbed, h_a);
    for (size_t i = 0; i < e1.samples.size(); ++i)
        CHECK((e1.samples[i] + e2.samples[i]).norm() == 0.0);
}

TEST_CASE("build_n: degenerate limits and resolvent identity") {
    const auto kc = fixtures::cantilever_interconnection(1e4);
    const int m_b = 3, p_b = 3;

    SUBCASE("zero internal coupling") {
        auto kc0 = kc;
        kc0.k_bb.setZero();
        CMatrix hb = CMatrix::Random(p_b, m_b);
        const CMatrix n = build_n(hb, kc0);
        CHECK((n.block(0, 0, m_b, p_b)).norm() == 0.0);
        CHECK((n.block(0, p_b, m_b, 1) - kc.k_ba.cast<Complex>()).norm() <= 1e-14);
        CHECK((n.block(m_b, 0, 1, p_b) - kc.k_ab.cast<Complex>()).norm() <= 1e-14);
        CHECK(n.block(m_b, p_b, 1, 1).norm() == 0.0);
    }
    SUBCASE("zero FRF keeps the raw interconnection blocks") {
        const CMatrix n = build_n(CMatrix::Zero(p_b, m_b), kc);
        CHECK((n.block(0, 0, m_b, p_b) - kc.k_bb.cast<Complex>()).norm() <= 1e-14 * kc.k_bb.norm());
        CHECK((n.block(0, p_b, m_b, 1) - kc.k_ba.cast<Complex>()).norm() <= 1e-14);
    }
    SUBCASE("resolvent residual and push-through identity") {
        const auto beam1 = fixtures::make_damped_beam(fixtures::beam1_ports());
        const auto beam2 = fixtures::make_damped_beam(fixtures::beam2_ports());
        const auto grid = FrequencyGrid::log_spaced(0.1, 400.0, 12);
        const auto h_b =
            block_diag_frf({frf_direct(beam1.model, grid), frf_direct(beam2.model, grid)});
        for (int i = 0; i < grid.size(); ++i) {
            const CMatrix& hb = h_b.samples[i];
            const CMatrix n = build_n(hb, kc);
            const CMatrix kbb = kc.k_bb.cast<Complex>();

            // (I - H_B k_bb)^-1 (I - H_B k_bb) = I re-verified through N's top-left block
            const CMatrix top_left = n.block(0, 0, m_b, p_b);
            const CMatrix residual = top_left * (CMatrix::Identity(p_b, p_b) - hb * kbb) - kbb;
            CHECK(residual.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, kbb.cwiseAbs().maxCoeff()));

            // push-through: k_bb (I - H_B k_bb)^-1 = (I - k_bb H_B)^-1 k_bb
            const CMatrix left = (CMatrix::Identity(m_b, m_b) - kbb * hb).partialPivLu().solve(kbb);
            CHECK((top_left - left).cwiseAbs().maxCoeff() <=
                  1e-10 * std::max(1.0, left.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("couple is linear in the external coupling blocks") {
    const auto grid = FrequencyGrid::log_spaced(1.0, 5.0, 3);
    auto kc = fixtures::cantilever_interconnection(5e3);
    CMatrix hb(3, 3);
    hb.setZero();
    hb(0, 0) = Complex(1e-3, -2e-4);
    hb(1, 1) = Complex(5e-4, 1e-4);
    hb(2, 2) = Complex(2e-3, 3e-4);
    const auto base = couple(constant_frf(grid, hb), kc);

    auto kc2 = kc;
    kc2.k_ba *= 2.5;
    kc2.k_ab *= -3.0;
    const auto scaled = couple(constant_frf(grid, hb), kc2);
    for (int i = 0; i < grid.size(); ++i)
        CHECK((scaled.h_a.samples[i] - 2.5 * (-3.0) * base.h_a.samples[i]).norm() <=
              1e-12 * base.h_a.samples[i].norm());
}

TEST_CASE("relative_error: trivial values and the SISO reduction") {
    const auto grid = FrequencyGrid::log_spaced(1.0, 10.0, 5);
    const auto h = constant_frf(grid, CMatrix::Constant(1, 1, Complex(3.0, 4.0)));

    AssemblyFrf ha;
    ha.h_a = h;
    auto zero = h;
    for (auto& s : zero.samples) s.setZero();

    const auto r0 = relative_error(zero, h);
    for (double v : r0.values) CHECK(v == 0.0);

    const auto r1 = relative_error(h, h);
    for (double v : r1.values) CHECK(v == doctest::Approx(1.0));

    // SISO: ||E||/||H|| = |E|/|H|
    auto e = constant_frf(grid, CMatrix::Constant(1, 1, Complex(1.0, -1.0)));
    const auto r = relative_error(e, h);
    for (double v : r.values) CHECK(v == doctest::Approx(std::sqrt(2.0) / 5.0));

    const auto rz = relative_error(h, zero);
    for (size_t i = 0; i < rz.values.size(); ++i) CHECK(rz.defined[i] == 0);
}
