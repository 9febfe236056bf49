#include "poolcast/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace poolcast::lp {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-7;

struct Tableau {
    // rows m, columns n (structural + slack + artificial), dense.
    int m = 0;
    int n = 0;
    std::vector<std::vector<double>> a;  // m rows
    std::vector<double> b;               // m entries, kept >= 0 at start
    std::vector<int> basis;              // basic variable per row
    std::vector<std::string> row_family;
};

// One simplex phase: minimize cost over the current tableau.
// Dantzig rule with a switch to Bland's rule after a degeneracy budget.
bool run_simplex(Tableau& tab, const std::vector<double>& cost, double& objective,
                 std::vector<double>& reduced, bool* unbounded) {
    const int m = tab.m;
    const int n = tab.n;
    *unbounded = false;

    std::vector<double> y(m);  // simplex multipliers via basic costs (recomputed lazily)
    long iterations = 0;
    const long bland_after = 2000L + 20L * (m + n);
    const long max_iterations = 200000L + 200L * (m + n);

    while (true) {
        if (++iterations > max_iterations) return false;
        const bool bland = iterations > bland_after;

        // reduced costs: z_j = c_j - c_B^T B^{-1} A_j; the tableau is kept in
        // canonical form so reduced cost is c_j - sum_i c_basis(i) * a[i][j].
        reduced.assign(static_cast<std::size_t>(n), 0.0);
        for (int j = 0; j < n; ++j) reduced[static_cast<std::size_t>(j)] = cost[static_cast<std::size_t>(j)];
        for (int i = 0; i < m; ++i) {
            const double cb = cost[static_cast<std::size_t>(tab.basis[static_cast<std::size_t>(i)])];
            if (cb == 0.0) continue;
            const auto& row = tab.a[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) reduced[static_cast<std::size_t>(j)] -= cb * row[static_cast<std::size_t>(j)];
        }

        int enter = -1;
        if (bland) {
            for (int j = 0; j < n; ++j)
                if (reduced[static_cast<std::size_t>(j)] < -kPivotTol) { enter = j; break; }
        } else {
            double best = -kPivotTol;
            for (int j = 0; j < n; ++j)
                if (reduced[static_cast<std::size_t>(j)] < best) { best = reduced[static_cast<std::size_t>(j)]; enter = j; }
        }
        if (enter < 0) break;  // optimal

        // ratio test
        int leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            const double aij = tab.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
            if (aij > kPivotTol) {
                const double ratio = tab.b[static_cast<std::size_t>(i)] / aij;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && leave >= 0 &&
                     tab.basis[static_cast<std::size_t>(i)] < tab.basis[static_cast<std::size_t>(leave)])) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) { *unbounded = true; return true; }

        // pivot
        auto& prow = tab.a[static_cast<std::size_t>(leave)];
        const double pivot = prow[static_cast<std::size_t>(enter)];
        for (int j = 0; j < n; ++j) prow[static_cast<std::size_t>(j)] /= pivot;
        tab.b[static_cast<std::size_t>(leave)] /= pivot;
        for (int i = 0; i < m; ++i) {
            if (i == leave) continue;
            auto& row = tab.a[static_cast<std::size_t>(i)];
            const double factor = row[static_cast<std::size_t>(enter)];
            if (factor == 0.0) continue;
            for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] -= factor * prow[static_cast<std::size_t>(j)];
            tab.b[static_cast<std::size_t>(i)] -= factor * tab.b[static_cast<std::size_t>(leave)];
            if (tab.b[static_cast<std::size_t>(i)] < 0.0 && tab.b[static_cast<std::size_t>(i)] > -1e-11)
                tab.b[static_cast<std::size_t>(i)] = 0.0;
        }
        tab.basis[static_cast<std::size_t>(leave)] = enter;
    }

    objective = 0.0;
    for (int i = 0; i < m; ++i)
        objective += cost[static_cast<std::size_t>(tab.basis[static_cast<std::size_t>(i)])] *
                     tab.b[static_cast<std::size_t>(i)];
    (void)y;
    return true;
}

}  // namespace

Solution solve(const Program& program) {
    const int nv = program.num_vars;
    if (static_cast<int>(program.objective.size()) != nv)
        throw std::invalid_argument("lp::solve: objective size mismatch");

    const int m = static_cast<int>(program.constraints.size());

    // Count slack columns (one per inequality).
    int n_slack = 0;
    for (const auto& c : program.constraints)
        if (c.rel != Relation::eq) ++n_slack;

    Tableau tab;
    tab.m = m;
    const int slack_base = nv;
    const int art_base = nv + n_slack;
    tab.n = nv + n_slack + m;  // reserve an artificial column per row
    tab.a.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(tab.n), 0.0));
    tab.b.assign(static_cast<std::size_t>(m), 0.0);
    tab.basis.assign(static_cast<std::size_t>(m), -1);
    tab.row_family.resize(static_cast<std::size_t>(m));

    int slack_idx = 0;
    std::vector<bool> artificial_used(static_cast<std::size_t>(m), false);
    for (int i = 0; i < m; ++i) {
        const auto& c = program.constraints[static_cast<std::size_t>(i)];
        tab.row_family[static_cast<std::size_t>(i)] = c.family;
        auto& row = tab.a[static_cast<std::size_t>(i)];
        for (const auto& [j, v] : c.terms) {
            if (j < 0 || j >= nv) throw std::invalid_argument("lp::solve: bad variable index");
            row[static_cast<std::size_t>(j)] += v;
        }
        double rhs = c.rhs;
        double slack_coeff = 0.0;
        if (c.rel == Relation::le) slack_coeff = 1.0;
        if (c.rel == Relation::ge) slack_coeff = -1.0;
        int this_slack = -1;
        if (c.rel != Relation::eq) {
            this_slack = slack_base + slack_idx++;
            row[static_cast<std::size_t>(this_slack)] = slack_coeff;
        }
        if (rhs < 0.0) {
            for (int j = 0; j < tab.n; ++j) row[static_cast<std::size_t>(j)] = -row[static_cast<std::size_t>(j)];
            rhs = -rhs;
            slack_coeff = -slack_coeff;
        }
        tab.b[static_cast<std::size_t>(i)] = rhs;
        if (this_slack >= 0 && slack_coeff > 0.0) {
            tab.basis[static_cast<std::size_t>(i)] = this_slack;  // slack is basic
        } else {
            const int art = art_base + i;
            row[static_cast<std::size_t>(art)] = 1.0;
            tab.basis[static_cast<std::size_t>(i)] = art;
            artificial_used[static_cast<std::size_t>(i)] = true;
        }
    }

    Solution sol;

    // Phase 1
    bool any_artificial = std::any_of(artificial_used.begin(), artificial_used.end(),
                                      [](bool u) { return u; });
    std::vector<double> reduced;
    if (any_artificial) {
        std::vector<double> cost1(static_cast<std::size_t>(tab.n), 0.0);
        for (int i = 0; i < m; ++i)
            if (artificial_used[static_cast<std::size_t>(i)])
                cost1[static_cast<std::size_t>(art_base + i)] = 1.0;
        double obj1 = 0.0;
        bool unbounded = false;
        if (!run_simplex(tab, cost1, obj1, reduced, &unbounded) || unbounded) {
            sol.status = SolveStatus::infeasible;
            sol.message = "phase-1 did not converge";
            return sol;
        }
        if (obj1 > kFeasTol) {
            sol.status = SolveStatus::infeasible;
            // name a violated family: any row whose artificial is still basic and positive
            for (int i = 0; i < m; ++i) {
                const int bi = tab.basis[static_cast<std::size_t>(i)];
                if (bi >= art_base && tab.b[static_cast<std::size_t>(i)] > kFeasTol) {
                    sol.message = "infeasible constraint family: " +
                                  tab.row_family[static_cast<std::size_t>(i)];
                    break;
                }
            }
            if (sol.message.empty()) sol.message = "infeasible";
            return sol;
        }
        // Drive remaining artificials out of the basis.
        for (int i = 0; i < m; ++i) {
            const int bi = tab.basis[static_cast<std::size_t>(i)];
            if (bi < art_base) continue;
            int enter = -1;
            auto& row = tab.a[static_cast<std::size_t>(i)];
            for (int j = 0; j < art_base; ++j)
                if (std::abs(row[static_cast<std::size_t>(j)]) > kPivotTol) { enter = j; break; }
            if (enter < 0) {
                // redundant row: keep artificial basic at zero, forbid re-entry below
                continue;
            }
            const double pivot = row[static_cast<std::size_t>(enter)];
            for (int j = 0; j < tab.n; ++j) row[static_cast<std::size_t>(j)] /= pivot;
            tab.b[static_cast<std::size_t>(i)] /= pivot;
            for (int k = 0; k < m; ++k) {
                if (k == i) continue;
                auto& rk = tab.a[static_cast<std::size_t>(k)];
                const double f = rk[static_cast<std::size_t>(enter)];
                if (f == 0.0) continue;
                for (int j = 0; j < tab.n; ++j) rk[static_cast<std::size_t>(j)] -= f * row[static_cast<std::size_t>(j)];
                tab.b[static_cast<std::size_t>(k)] -= f * tab.b[static_cast<std::size_t>(i)];
            }
            tab.basis[static_cast<std::size_t>(i)] = enter;
        }
        // Zero out artificial columns so they never re-enter.
        for (int i = 0; i < m; ++i)
            for (int j = art_base; j < tab.n; ++j)
                if (tab.basis[static_cast<std::size_t>(i)] != j)
                    tab.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 0.0;
    }

    // Phase 2
    std::vector<double> cost2(static_cast<std::size_t>(tab.n), 0.0);
    for (int j = 0; j < nv; ++j) cost2[static_cast<std::size_t>(j)] = program.objective[static_cast<std::size_t>(j)];
    // keep artificials out: prohibitive cost would distort the objective value,
    // so instead they stay at value 0 (columns were zeroed above).
    double obj2 = 0.0;
    bool unbounded = false;
    if (!run_simplex(tab, cost2, obj2, reduced, &unbounded)) {
        sol.status = SolveStatus::infeasible;
        sol.message = "phase-2 did not converge";
        return sol;
    }
    if (unbounded) {
        sol.status = SolveStatus::unbounded;
        sol.message = "objective unbounded below";
        return sol;
    }

    sol.status = SolveStatus::optimal;
    sol.x.assign(static_cast<std::size_t>(nv), 0.0);
    for (int i = 0; i < m; ++i) {
        const int bi = tab.basis[static_cast<std::size_t>(i)];
        if (bi < nv) sol.x[static_cast<std::size_t>(bi)] = tab.b[static_cast<std::size_t>(i)];
    }
    sol.objective = obj2;
    return sol;
}

Solution solve_lexicographic(const Program& program, const std::vector<double>& tie_objective,
                             double eps) {
    Solution primary = solve(program);
    if (primary.status != SolveStatus::optimal) return primary;

    Program second = program;
    Constraint cap;
    cap.rel = Relation::le;
    cap.rhs = primary.objective + eps * std::max(1.0, std::abs(primary.objective));
    cap.family = "objective_cap";
    for (int j = 0; j < program.num_vars; ++j)
        if (program.objective[static_cast<std::size_t>(j)] != 0.0)
            cap.terms.emplace_back(j, program.objective[static_cast<std::size_t>(j)]);
    second.constraints.push_back(cap);
    second.objective = tie_objective;

    Solution tie = solve(second);
    if (tie.status != SolveStatus::optimal) return primary;  // keep the valid optimum
    // report the primary objective value achieved by the tie-broken point
    double obj = 0.0;
    for (int j = 0; j < program.num_vars; ++j)
        obj += program.objective[static_cast<std::size_t>(j)] * tie.x[static_cast<std::size_t>(j)];
    tie.objective = obj;
    return tie;
}

}  // namespace poolcast::lp
