#pragma once

#include <string>
#include <utility>
#include <vector>

namespace poolcast::lp {

enum class Relation { le, ge, eq };

struct Constraint {
    std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
    Relation rel = Relation::le;
    double rhs = 0.0;
    std::string family;
};

/// minimize c^T x  subject to the constraints, x >= 0.
struct Program {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<Constraint> constraints;
    std::vector<std::string> var_names;  // optional, for dumps
};

enum class SolveStatus { optimal, infeasible, unbounded };

struct Solution {
    SolveStatus status = SolveStatus::optimal;
    std::vector<double> x;
    double objective = 0.0;
    std::string message;
};

/// Two-phase dense simplex. Returns an optimal basic solution.
Solution solve(const Program& program);

/// Minimizes `tie_objective` over the optimal face of `program`:
/// solves the program, then re-solves with c^T x <= opt + eps appended.
Solution solve_lexicographic(const Program& program,
                             const std::vector<double>& tie_objective,
                             double eps = 1e-11);

}  // namespace poolcast::lp
