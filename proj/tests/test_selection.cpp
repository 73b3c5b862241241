#include "cmsrom/modal.hpp"
#include "cmsrom/selection.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <numbers>

using namespace cmsrom;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Full cantilever pipeline down to beam 2's selection problem.
struct SelectionFixture {
    fixtures::DampedBeam beam2;
    FrequencyGrid grid;
    FrfData h2;
    std::vector<int> preselection;
    WeightSet ws;
    std::unique_ptr<SelectionProblem> problem;
};

const SelectionFixture& cantilever_problem(double k_c) {
    static std::map<double, std::unique_ptr<SelectionFixture>> cache;
    auto it = cache.find(k_c);
    if (it != cache.end()) return *it->second;

    auto fx = std::make_unique<SelectionFixture>();
    const auto beam1 = fixtures::make_damped_beam(fixtures::beam1_ports());
    fx->beam2 = fixtures::make_damped_beam(fixtures::beam2_ports());
    fx->grid = FrequencyGrid::log_spaced(0.1, 400.0, 40);

    const auto h1 = frf_direct(beam1.model, fx->grid);
    fx->h2 = frf_direct(fx->beam2.model, fx->grid);
    const auto h_b = block_diag_frf({h1, fx->h2});
    const auto kc = fixtures::cantilever_interconnection(k_c);
    const auto h_a = couple(h_b, kc);
    const auto assembly = design_relative_weights(h_a, 0.05);
    std::vector<CMatrix> n_samples;
    for (int i = 0; i < fx->grid.size(); ++i) n_samples.push_back(build_n(h_b.samples[i], kc));
    fx->ws = translate(n_samples, assembly, kc.port_dims, fx->grid);
    REQUIRE(fx->ws.infeasible_points().empty());

    // preselection: elastic modes up to 5x the maximum frequency of interest
    for (int i = 0; i < fx->beam2.modes.count(); ++i)
        if (fx->beam2.modes.frequencies_rad(i) <= kTwoPi * 2000.0) fx->preselection.push_back(i);
    REQUIRE(fx->preselection.size() == 9);

    std::vector<Vector> v_req, w_req;
    for (const auto& fw : fx->ws.at) {
        v_req.push_back(fw.v[1]);
        w_req.push_back(fw.w[1]);
    }
    fx->problem = std::make_unique<SelectionProblem>(fx->beam2.model, fx->beam2.modes,
                                                     fx->preselection, v_req, w_req, fx->grid,
                                                     fx->h2);
    return *cache.emplace(k_c, std::move(fx)).first->second;
}

// Symmetric 3-mass chain grounded at both ends, boundary at the middle mass:
// the antisymmetric mode (index 1) has exactly zero boundary participation.
SelectionProblem chain_problem(double weight) {
    SecondOrderModel m;
    m.mass = Matrix::Identity(3, 3);
    m.damping = Matrix::Zero(3, 3);
    m.stiffness.resize(3, 3);
    const double k = 100.0;
    m.stiffness << 2 * k, -k, 0, -k, 2 * k, -k, 0, -k, 2 * k;
    m.input_map = Matrix::Zero(3, 1);
    m.input_map(1, 0) = 1.0;
    m.output_map = Matrix::Zero(1, 3);
    m.output_map(0, 1) = 1.0;
    m.boundary_dofs = {1};
    m.name = "chain";

    const auto modes = solve_undamped_modes(m, 1e6);
    FrequencyGrid grid = FrequencyGrid::log_spaced(0.1, 5.0, 12);
    const auto h = frf_direct(m, grid);
    std::vector<Vector> v(grid.size(), Vector::Constant(1, weight));
    std::vector<Vector> w(grid.size(), Vector::Constant(1, weight));
    // n_b = 1 leaves a 2-dim internal space: at most 2 elastic modes fit the basis
    return SelectionProblem(m, modes, {0, 1}, v, w, grid, h);
}

} // namespace

TEST_CASE("rmi_a: definition oracle, nonnegativity, zero participation") {
    const auto problem = chain_problem(1.0);

    // the antisymmetric mode contributes nothing through the boundary port
    CHECK(rmi_a(problem, {}, 1) <= 1e-10);

    // definition is the oracle: two direct FRF-norm sweeps
    for (int c = 0; c < 2; ++c) {
        const auto& base = problem.scaled_values({});
        std::vector<int> with{c};
        const auto& added = problem.scaled_values(with);
        double expected = 0.0;
        for (size_t i = 0; i < base.size(); ++i)
            expected = std::max(expected, std::abs(base[i] - added[i]));
        CHECK(rmi_a(problem, {}, c) == doctest::Approx(expected));
        CHECK(rmi_a(problem, {}, c) >= 0.0);
    }
    CHECK_THROWS_AS(rmi_a(problem, {0}, 0), std::invalid_argument);
}

TEST_CASE("rmi_r: coincides with rmi_a on the reduced set") {
    const auto problem = chain_problem(1.0);
    CHECK(rmi_r(problem, {0, 1}, 1) <= 1e-10);
    for (int c = 0; c < 2; ++c) {
        std::vector<int> full{0, 1};
        std::vector<int> without;
        for (int x : full)
            if (x != c) without.push_back(x);
        CHECK(rmi_r(problem, full, c) == doctest::Approx(rmi_a(problem, without, c)));
    }
    CHECK_THROWS_AS(rmi_r(problem, {0}, 1), std::invalid_argument);
}

TEST_CASE("selection: loose requirement is satisfied by the static part alone") {
    const auto problem = chain_problem(1e9);
    const auto res = select_frequency_ordered(problem);
    CHECK(res.satisfied);
    CHECK(res.selected_positions.empty());
    CHECK(res.iterations == 0);
}

TEST_CASE("selection: unsatisfiable problems return the full preselection") {
    const auto problem = chain_problem(1e-12);
    const int n = problem.candidate_count();

    const auto freq = select_frequency_ordered(problem);
    CHECK(!freq.satisfied);
    CHECK(static_cast<int>(freq.selected_positions.size()) == n);
    CHECK(freq.iterations == n);

    const auto apriori = select_rmi_a_apriori(problem);
    CHECK(!apriori.satisfied);
    CHECK(apriori.iterations == 2 * n); // n scores + n failed-satisfaction adds

    const auto inc = select_rmi_a_incremental(problem);
    CHECK(!inc.satisfied);
    CHECK(inc.iterations == static_cast<long long>(n + 1) * n);

    const auto r_apriori = select_rmi_r_apriori(problem);
    CHECK(!r_apriori.satisfied);
    CHECK(r_apriori.iterations == 0); // baseline check fails, nothing scored

    const auto r_inc = select_rmi_r_incremental(problem);
    CHECK(!r_inc.satisfied);
    CHECK(r_inc.iterations == 0);
}

TEST_CASE("selection on the cantilever component: counters match the method formulas") {
    const auto& fx = cantilever_problem(1e4);
    const auto& problem = *fx.problem;
    const long long n = problem.candidate_count();

    problem.clear_cache();
    const auto freq = select_frequency_ordered(problem);
    REQUIRE(freq.satisfied);
    const long long r_freq = static_cast<long long>(freq.selected_positions.size());
    CHECK(freq.iterations == r_freq);
    CHECK(freq.frf_evals > 0);

    problem.clear_cache();
    const auto a_priori = select_rmi_a_apriori(problem);
    REQUIRE(a_priori.satisfied);
    CHECK(a_priori.iterations ==
          n + static_cast<long long>(a_priori.selected_positions.size()));

    problem.clear_cache();
    const auto a_inc = select_rmi_a_incremental(problem);
    REQUIRE(a_inc.satisfied);
    CHECK(a_inc.iterations ==
          (n + 1) * static_cast<long long>(a_inc.selected_positions.size()));

    problem.clear_cache();
    const auto r_priori = select_rmi_r_apriori(problem);
    REQUIRE(r_priori.satisfied);
    CHECK(r_priori.iterations ==
          2 * n - static_cast<long long>(r_priori.selected_positions.size()));

    problem.clear_cache();
    const auto r_inc = select_rmi_r_incremental(problem);
    REQUIRE(r_inc.satisfied);
    CHECK(r_inc.iterations ==
          (n + 1) * (n - static_cast<long long>(r_inc.selected_positions.size())));

    problem.clear_cache();
    const auto brute = select_brute_force(problem);
    REQUIRE(brute.satisfied);
    const long long r_brute = static_cast<long long>(brute.selected_positions.size());
    double expected_iters = 0.0;
    for (int q = 1; q <= r_brute; ++q) expected_iters += brute_force_estimate(9, q) -
                                                         (q > 1 ? brute_force_estimate(9, q - 1) : 0.0);
    CHECK(static_cast<double>(brute.iterations) == brute_force_estimate(9, static_cast<int>(r_brute)));

    // brute force dominance and the greedy-equals-apriori first pick
    CHECK(r_brute <= r_freq);
    CHECK(r_brute <= static_cast<long long>(a_priori.selected_positions.size()));
    CHECK(r_brute <= static_cast<long long>(a_inc.selected_positions.size()));
    CHECK(r_brute <= static_cast<long long>(r_priori.selected_positions.size()));
    CHECK(r_brute <= static_cast<long long>(r_inc.selected_positions.size()));
    REQUIRE(!a_inc.trace.empty());
    REQUIRE(!a_priori.trace.empty());
    CHECK(a_inc.trace.front().mode_position == a_priori.trace.front().mode_position);

    // every satisfied selection actually satisfies the requirement again
    for (const auto* res : {&freq, &a_priori, &a_inc, &r_priori, &r_inc, &brute})
        CHECK(problem.scaled_max(res->selected_positions) <= 1.0 + 1e-12);
}

TEST_CASE("selection: determinism across repeated runs") {
    const auto& fx = cantilever_problem(1e4);
    const auto& problem = *fx.problem;
    problem.clear_cache();
    const auto first = select_rmi_a_incremental(problem);
    problem.clear_cache();
    const auto second = select_rmi_a_incremental(problem);
    CHECK(first.selected_positions == second.selected_positions);
    CHECK(first.iterations == second.iterations);
    CHECK(first.frf_evals == second.frf_evals);
}

TEST_CASE("brute force: iteration estimate and refusal") {
    CHECK(brute_force_estimate(10, 3) == doctest::Approx(10 + 45 + 120));
    CHECK(brute_force_estimate(100, 10) > 1e12); // around 2e13 combinations

    const auto problem = chain_problem(1e-12); // unsatisfiable, would need all levels
    CHECK_THROWS_AS(select_brute_force(problem, -1, 2.0), BruteForceRefusal);
    try {
        select_brute_force(problem, -1, 2.0);
    } catch (const BruteForceRefusal& refusal) {
        CHECK(refusal.estimated_iterations == doctest::Approx(3.0)); // C(2,1)+C(2,2)
        CHECK(std::string(refusal.what()).find("exceed") != std::string::npos);
    }
}

TEST_CASE("brute force: lexicographically smallest among equal cardinality") {
    // chain with moderate weight: exactly which single mode satisfies depends
    // on participation; mode 1 never helps, so any singleton answer must be
    // mode 0 or 2, and lexicographic order prefers 0 when both work.
    const auto problem = chain_problem(1.0);
    problem.clear_cache();
    const auto res = select_brute_force(problem);
    REQUIRE(res.satisfied);
    if (res.selected_positions.size() == 1) CHECK(res.selected_positions[0] != 1);
}
