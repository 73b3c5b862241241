#pragma once

#include "cmsrom/hh.hpp"
#include "cmsrom/types.hpp"
#include "cmsrom/weights.hpp"

#include <map>
#include <memory>

namespace cmsrom {

/// One component's eigenmode-selection instance: the preselected elastic
/// candidates, the per-frequency component requirement, and the full-order
/// reference FRF. The reduction basis over the whole preselection is built
/// once; subset models are exact row/column slices of it.
class SelectionProblem {
public:
    SelectionProblem(const SecondOrderModel& model, const ModeSet& modes,
                     std::vector<int> preselected_mode_ids, std::vector<Vector> v_req,
                     std::vector<Vector> w_req, const FrequencyGrid& grid, FrfData full_frf,
                     std::vector<std::uint8_t> frequency_mask = {});

    const std::vector<int>& preselection() const { return preselected_; }
    int candidate_count() const { return static_cast<int>(preselected_.size()); }
    const FrequencyGrid& grid() const { return grid_; }
    const FrfData& reference_frf() const { return full_frf_; }
    double mode_frequency(int global_mode_id) const { return mode_freqs_(global_mode_id); }
    int excluded_frequency_count() const;

    /// Drops memoized subset values and zeroes the construction counter, so
    /// per-method frf_evals do not depend on which method ran first.
    void clear_cache() const;

    /// Reduced FRF for a subset given as positions into the preselection list.
    FrfData reduced_frf(const std::vector<int>& subset_positions) const;

    /// Per-frequency scaled error norms for a subset (masked points skipped).
    const std::vector<double>& scaled_values(const std::vector<int>& subset_positions) const;

    double scaled_max(const std::vector<int>& subset_positions) const;
    bool satisfied(const std::vector<int>& subset_positions, double slack = 1e-12) const;

    int frf_evals() const { return frf_evals_; }
    void reset_frf_evals() { frf_evals_ = 0; }

private:
    Vector mode_freqs_; // all modal frequencies of the parent component
    int rigid_count_ = 0;
    std::vector<int> preselected_;
    std::vector<Vector> v_req_, w_req_;
    FrequencyGrid grid_;
    FrfData full_frf_;
    std::vector<std::uint8_t> freq_mask_; // 1 = evaluate; infeasible points excluded

    // Full-preselection reduction; subsets slice these.
    Matrix m_red_, c_red_, k_red_, b_red_, f_red_;
    int r_ir_ = 0, n_b_ = 0;

    mutable std::map<std::vector<int>, std::vector<double>> value_cache_;
    mutable int frf_evals_ = 0;
};

/// Max over the grid of the weighted component error for the subset.
double scaled_error_max(const SelectionProblem& problem, const std::vector<int>& subset_positions);

/// Effect of adding a candidate: max over the grid of the absolute change in
/// the weighted error norm.
double rmi_a(const SelectionProblem& problem, const std::vector<int>& current_subset, int candidate);

/// Effect of removing a member, same metric.
double rmi_r(const SelectionProblem& problem, const std::vector<int>& current_subset, int member);

struct SelectionTraceEntry {
    int mode_position = -1; // position into the preselection, -1 for plain checks
    double scaled_max = 0.0;
};

struct SelectionResult {
    std::vector<int> selected_positions; // positions into the preselection
    std::vector<int> selected_mode_ids;  // global ModeSet indices
    bool satisfied = false;
    long long iterations = 0; // requirement-evaluation iterations (method formula accounting)
    long long frf_evals = 0;  // actual reduced-FRF constructions
    std::vector<SelectionTraceEntry> trace;
    std::string method;
};

SelectionResult select_frequency_ordered(const SelectionProblem& problem);
SelectionResult select_rmi_a_apriori(const SelectionProblem& problem);
SelectionResult select_rmi_a_incremental(const SelectionProblem& problem);
SelectionResult select_rmi_r_apriori(const SelectionProblem& problem);
SelectionResult select_rmi_r_incremental(const SelectionProblem& problem);

/// Exhaustive smallest-cardinality search; refuses when the subset count
/// estimate exceeds the budget.
SelectionResult select_brute_force(const SelectionProblem& problem, int max_card = -1,
                                   double budget = 2e6);

/// Iteration count Sum_{q=1..r} C(n,q) (saturates instead of overflowing).
double brute_force_estimate(int candidates, int max_card);

struct BruteForceRefusal : std::runtime_error {
    double estimated_iterations;
    explicit BruteForceRefusal(double estimate)
        : std::runtime_error("brute force refused: estimated " + std::to_string(estimate) +
                             " subset checks exceed the budget"),
          estimated_iterations(estimate) {}
};

} // namespace cmsrom
