#include "cmsrom/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cmsrom {

namespace {

std::vector<int> sorted_union(const std::vector<int>& base, int extra) {
    std::vector<int> out = base;
    out.insert(std::lower_bound(out.begin(), out.end(), extra), extra);
    return out;
}

std::vector<int> sorted_minus(const std::vector<int>& base, int member) {
    std::vector<int> out = base;
    out.erase(std::find(out.begin(), out.end(), member));
    return out;
}

bool contains(const std::vector<int>& sorted, int value) {
    return std::binary_search(sorted.begin(), sorted.end(), value);
}

std::vector<int> all_positions(int n) {
    std::vector<int> out(n);
    std::iota(out.begin(), out.end(), 0);
    return out;
}

} // namespace

SelectionProblem::SelectionProblem(const SecondOrderModel& model, const ModeSet& modes,
                                   std::vector<int> preselected_mode_ids,
                                   std::vector<Vector> v_req, std::vector<Vector> w_req,
                                   const FrequencyGrid& grid, FrfData full_frf,
                                   std::vector<std::uint8_t> frequency_mask)
    : mode_freqs_(modes.frequencies_rad), rigid_count_(modes.rigid_count),
      preselected_(std::move(preselected_mode_ids)), v_req_(std::move(v_req)),
      w_req_(std::move(w_req)), grid_(grid), full_frf_(std::move(full_frf)),
      freq_mask_(std::move(frequency_mask)) {
    std::sort(preselected_.begin(), preselected_.end());
    preselected_.erase(std::unique(preselected_.begin(), preselected_.end()), preselected_.end());
    for (int id : preselected_)
        if (modes.is_rigid(id))
            throw std::invalid_argument("SelectionProblem: preselection contains a rigid mode");
    if (static_cast<int>(v_req_.size()) != grid_.size() ||
        static_cast<int>(w_req_.size()) != grid_.size())
        throw std::invalid_argument("SelectionProblem: requirement not defined on the grid");
    if (!full_frf_.grid.same_as(grid_))
        throw std::invalid_argument("SelectionProblem: reference FRF grid mismatch");
    if (freq_mask_.empty()) freq_mask_.assign(grid_.size(), 1);
    if (static_cast<int>(freq_mask_.size()) != grid_.size())
        throw std::invalid_argument("SelectionProblem: frequency mask size mismatch");

    const HhBasis basis = build_hh_basis(model, modes, preselected_);
    const ReducedComponent red = reduce(model, basis);
    m_red_ = red.model.mass;
    c_red_ = red.model.damping;
    k_red_ = red.model.stiffness;
    b_red_ = red.model.input_map;
    f_red_ = red.model.output_map;
    r_ir_ = static_cast<int>(basis.inertia_relief.cols());
    n_b_ = basis.boundary_count;
}

int SelectionProblem::excluded_frequency_count() const {
    int n = 0;
    for (auto m : freq_mask_)
        if (!m) ++n;
    return n;
}

void SelectionProblem::clear_cache() const {
    value_cache_.clear();
    frf_evals_ = 0;
}

FrfData SelectionProblem::reduced_frf(const std::vector<int>& subset_positions) const {
    const int n_cand = candidate_count();
    std::vector<int> cols;
    cols.reserve(r_ir_ + subset_positions.size() + n_b_);
    for (int i = 0; i < r_ir_; ++i) cols.push_back(i);
    for (int p : subset_positions) {
        if (p < 0 || p >= n_cand)
            throw std::invalid_argument("reduced_frf: subset position out of range");
        cols.push_back(r_ir_ + p);
    }
    for (int i = 0; i < n_b_; ++i) cols.push_back(r_ir_ + n_cand + i);

    const int r = static_cast<int>(cols.size());
    Matrix m(r, r), c(r, r), k(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            m(i, j) = m_red_(cols[i], cols[j]);
            c(i, j) = c_red_(cols[i], cols[j]);
            k(i, j) = k_red_(cols[i], cols[j]);
        }
    Matrix b(r, b_red_.cols()), f(f_red_.rows(), r);
    for (int i = 0; i < r; ++i) {
        b.row(i) = b_red_.row(cols[i]);
        f.col(i) = f_red_.col(cols[i]);
    }

    FrfData out;
    out.grid = grid_;
    out.samples.resize(grid_.size());
    out.point_ok.assign(grid_.size(), 1);
    const CMatrix bc = b.cast<Complex>();
    for (int i = 0; i < grid_.size(); ++i) {
        const double w = grid_.omega(i);
        CMatrix dyn = (-w * w) * m.cast<Complex>() + Complex(0.0, w) * c.cast<Complex>() +
                      k.cast<Complex>();
        Eigen::PartialPivLU<CMatrix> lu(dyn);
        CMatrix x = lu.solve(bc);
        if (!x.allFinite()) {
            out.point_ok[i] = 0;
            x.setZero();
        }
        out.samples[i] = f.cast<Complex>() * x;
    }
    ++frf_evals_;
    return out;
}

const std::vector<double>& SelectionProblem::scaled_values(
    const std::vector<int>& subset_positions) const {
    std::vector<int> key = subset_positions;
    std::sort(key.begin(), key.end());
    auto it = value_cache_.find(key);
    if (it != value_cache_.end()) return it->second;

    const FrfData red = reduced_frf(key);
    std::vector<double> values(grid_.size(), 0.0);
    for (int i = 0; i < grid_.size(); ++i) {
        if (!freq_mask_[i]) continue; // infeasible translation points are excluded
        const CMatrix err = red.samples[i] - full_frf_.samples[i];
        const CMatrix scaled =
            w_req_[i].cwiseInverse().asDiagonal() * err * v_req_[i].cwiseInverse().asDiagonal();
        values[i] = spectral_norm(scaled);
    }
    return value_cache_.emplace(std::move(key), std::move(values)).first->second;
}

double SelectionProblem::scaled_max(const std::vector<int>& subset_positions) const {
    const auto& values = scaled_values(subset_positions);
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

bool SelectionProblem::satisfied(const std::vector<int>& subset_positions, double slack) const {
    return scaled_max(subset_positions) <= 1.0 + slack;
}

double scaled_error_max(const SelectionProblem& problem, const std::vector<int>& subset_positions) {
    return problem.scaled_max(subset_positions);
}

double rmi_a(const SelectionProblem& problem, const std::vector<int>& current_subset,
             int candidate) {
    std::vector<int> current = current_subset;
    std::sort(current.begin(), current.end());
    if (contains(current, candidate))
        throw std::invalid_argument("rmi_a: candidate already selected");
    const auto& base = problem.scaled_values(current);
    const auto& added = problem.scaled_values(sorted_union(current, candidate));
    double m = 0.0;
    for (size_t i = 0; i < base.size(); ++i) m = std::max(m, std::abs(base[i] - added[i]));
    return m;
}

double rmi_r(const SelectionProblem& problem, const std::vector<int>& current_subset, int member) {
    std::vector<int> current = current_subset;
    std::sort(current.begin(), current.end());
    if (!contains(current, member))
        throw std::invalid_argument("rmi_r: member not selected");
    const auto& base = problem.scaled_values(current);
    const auto& removed = problem.scaled_values(sorted_minus(current, member));
    double m = 0.0;
    for (size_t i = 0; i < base.size(); ++i) m = std::max(m, std::abs(base[i] - removed[i]));
    return m;
}

namespace {

SelectionResult finish(const SelectionProblem& problem, SelectionResult r,
                       std::vector<int> positions, bool satisfied, long long frf_start) {
    std::sort(positions.begin(), positions.end());
    r.selected_positions = positions;
    r.selected_mode_ids.clear();
    for (int p : positions) r.selected_mode_ids.push_back(problem.preselection()[p]);
    r.satisfied = satisfied;
    r.frf_evals = problem.frf_evals() - frf_start;
    return r;
}

} // namespace

// Iteration accounting shared by the methods below: scored candidates and
// post-update satisfaction checks count one each; the baseline check (empty
// set for additive methods, full preselection for removal methods) does not;
// for removal methods the terminating failed round is undone and not counted.

SelectionResult select_frequency_ordered(const SelectionProblem& problem) {
    SelectionResult res;
    res.method = "freq_ordered";
    const long long start = problem.frf_evals();
    const int n = problem.candidate_count();

    std::vector<int> subset;
    if (problem.satisfied(subset)) return finish(problem, res, subset, true, start);
    for (int next = 0; next < n; ++next) {
        subset.push_back(next); // preselection is ascending in eigenfrequency
        ++res.iterations;
        const double value = problem.scaled_max(subset);
        res.trace.push_back({next, value});
        if (value <= 1.0 + 1e-12) return finish(problem, res, subset, true, start);
    }
    return finish(problem, res, subset, false, start);
}

SelectionResult select_rmi_a_apriori(const SelectionProblem& problem) {
    SelectionResult res;
    res.method = "rmi_a_apriori";
    const long long start = problem.frf_evals();
    const int n = problem.candidate_count();

    std::vector<int> empty;
    if (problem.satisfied(empty)) return finish(problem, res, empty, true, start);

    std::vector<double> score(n);
    for (int c = 0; c < n; ++c) {
        score[c] = rmi_a(problem, empty, c);
        ++res.iterations;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b; // ties: lower eigenfrequency first
    });

    std::vector<int> subset;
    for (int c : order) {
        subset = sorted_union(subset, c);
        ++res.iterations;
        const double value = problem.scaled_max(subset);
        res.trace.push_back({c, value});
        if (value <= 1.0 + 1e-12) return finish(problem, res, subset, true, start);
    }
    return finish(problem, res, subset, false, start);
}

SelectionResult select_rmi_a_incremental(const SelectionProblem& problem) {
    SelectionResult res;
    res.method = "rmi_a_incremental";
    const long long start = problem.frf_evals();
    const int n = problem.candidate_count();

    std::vector<int> subset;
    if (problem.satisfied(subset)) return finish(problem, res, subset, true, start);

    while (static_cast<int>(subset.size()) < n) {
        int best = -1;
        double best_score = -1.0;
        for (int c = 0; c < n; ++c) {
            ++res.iterations; // the whole pool is re-scored every round
            if (contains(subset, c)) continue; // member: adds nothing, scores zero
            const double s = rmi_a(problem, subset, c);
            if (s > best_score) {
                best_score = s;
                best = c; // ties keep the lower eigenfrequency (earlier c)
            }
        }
        subset = sorted_union(subset, best);
        ++res.iterations;
        const double value = problem.scaled_max(subset);
        res.trace.push_back({best, value});
        if (value <= 1.0 + 1e-12) return finish(problem, res, subset, true, start);
    }
    return finish(problem, res, subset, false, start);
}

SelectionResult select_rmi_r_apriori(const SelectionProblem& problem) {
    SelectionResult res;
    res.method = "rmi_r_apriori";
    const long long start = problem.frf_evals();
    const int n = problem.candidate_count();

    std::vector<int> subset = all_positions(n);
    if (!problem.satisfied(subset)) return finish(problem, res, subset, false, start);

    std::vector<double> score(n);
    for (int c = 0; c < n; ++c) {
        score[c] = rmi_r(problem, subset, c);
        ++res.iterations;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (score[a] != score[b]) return score[a] < score[b];
        return a > b; // ties: higher eigenfrequency removed first
    });

    for (int c : order) {
        const std::vector<int> tentative = sorted_minus(subset, c);
        const double value = problem.scaled_max(tentative);
        if (value <= 1.0 + 1e-12) {
            subset = tentative;
            ++res.iterations; // kept removal
            res.trace.push_back({c, value});
        } else {
            return finish(problem, res, subset, true, start); // restore last removed
        }
    }
    return finish(problem, res, subset, true, start); // everything removable
}

SelectionResult select_rmi_r_incremental(const SelectionProblem& problem) {
    SelectionResult res;
    res.method = "rmi_r_incremental";
    const long long start = problem.frf_evals();
    const int n = problem.candidate_count();

    std::vector<int> subset = all_positions(n);
    if (!problem.satisfied(subset)) return finish(problem, res, subset, false, start);

    while (!subset.empty()) {
        long long round_units = 0;
        int worst = -1;
        double worst_score = std::numeric_limits<double>::infinity();
        for (int c = 0; c < n; ++c) {
            ++round_units; // full pool re-scored every round
            if (!contains(subset, c)) continue; // not a member: removal is a no-op
            const double s = rmi_r(problem, subset, c);
            if (s < worst_score || (s == worst_score && c > worst)) {
                worst_score = s;
                worst = c; // ties: higher eigenfrequency removed first
            }
        }
        const std::vector<int> tentative = sorted_minus(subset, worst);
        ++round_units;
        const double value = problem.scaled_max(tentative);
        if (value <= 1.0 + 1e-12) {
            subset = tentative;
            res.iterations += round_units;
            res.trace.push_back({worst, value});
        } else {
            return finish(problem, res, subset, true, start); // failed round not counted
        }
    }
    return finish(problem, res, subset, true, start);
}

double brute_force_estimate(int candidates, int max_card) {
    double total = 0.0;
    double binom = 1.0;
    for (int q = 1; q <= max_card; ++q) {
        binom *= static_cast<double>(candidates - q + 1) / q;
        total += binom;
        if (total > 1e300) return 1e300;
    }
    return total;
}

SelectionResult select_brute_force(const SelectionProblem& problem, int max_card, double budget) {
    SelectionResult res;
    res.method = "brute_force";
    const long long start = problem.frf_evals();
    const int n = problem.candidate_count();
    const int r_max = (max_card < 0) ? n : std::min(max_card, n);

    const double estimate = brute_force_estimate(n, r_max);
    if (estimate > budget) throw BruteForceRefusal(estimate);

    std::vector<int> empty;
    if (problem.satisfied(empty)) return finish(problem, res, empty, true, start);

    for (int q = 1; q <= r_max; ++q) {
        std::vector<int> combo(q);
        std::iota(combo.begin(), combo.end(), 0);
        std::vector<int> found;
        bool have = false;
        while (true) {
            ++res.iterations;
            if (!have && problem.satisfied(combo)) {
                found = combo; // lexicographically smallest at this cardinality
                have = true;
            }
            // next combination in lexicographic order
            int i = q - 1;
            while (i >= 0 && combo[i] == n - q + i) --i;
            if (i < 0) break;
            ++combo[i];
            for (int j = i + 1; j < q; ++j) combo[j] = combo[j - 1] + 1;
        }
        if (have) return finish(problem, res, found, true, start);
    }
    return finish(problem, res, all_positions(n), false, start);
}

} // namespace cmsrom
