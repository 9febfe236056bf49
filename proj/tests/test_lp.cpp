#include <stdexcept>
#include "doctest.h"
#include "poolcast/lp.hpp"

using namespace poolcast;

namespace {

lp::Program knapsack_like() {
    // min -x0 - 2 x1  s.t.  x0 + x1 <= 4,  x1 <= 3
    lp::Program p;
    p.num_vars = 2;
    p.objective = {-1.0, -2.0};
    p.constraints.push_back({{{0, 1.0}, {1, 1.0}}, lp::Relation::le, 4.0, "cap"});
    p.constraints.push_back({{{1, 1.0}}, lp::Relation::le, 3.0, "cap1"});
    return p;
}

}  // namespace

TEST_CASE("simplex solves a small inequality LP") {
    auto sol = lp::solve(knapsack_like());
    REQUIRE(sol.status == lp::SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(-7.0).epsilon(1e-12));
    CHECK(sol.x[0] == doctest::Approx(1.0));
    CHECK(sol.x[1] == doctest::Approx(3.0));
}

TEST_CASE("simplex handles equality and ge constraints") {
    // min x0 + x1  s.t.  x0 + x1 = 2,  x0 >= 0.5
    lp::Program p;
    p.num_vars = 2;
    p.objective = {1.0, 1.0};
    p.constraints.push_back({{{0, 1.0}, {1, 1.0}}, lp::Relation::eq, 2.0, "sum"});
    p.constraints.push_back({{{0, 1.0}}, lp::Relation::ge, 0.5, "floor"});
    auto sol = lp::solve(p);
    REQUIRE(sol.status == lp::SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(2.0));
    CHECK(sol.x[0] + sol.x[1] == doctest::Approx(2.0));
    CHECK(sol.x[0] >= 0.5 - 1e-9);
}

TEST_CASE("simplex reports infeasibility with the family name") {
    lp::Program p;
    p.num_vars = 1;
    p.objective = {1.0};
    p.constraints.push_back({{{0, 1.0}}, lp::Relation::le, 1.0, "upper"});
    p.constraints.push_back({{{0, 1.0}}, lp::Relation::ge, 2.0, "lower"});
    auto sol = lp::solve(p);
    CHECK(sol.status == lp::SolveStatus::infeasible);
    CHECK(!sol.message.empty());
}

TEST_CASE("simplex reports unboundedness") {
    lp::Program p;
    p.num_vars = 2;
    p.objective = {-1.0, 0.0};
    p.constraints.push_back({{{1, 1.0}}, lp::Relation::le, 1.0, "only_x1"});
    auto sol = lp::solve(p);
    CHECK(sol.status == lp::SolveStatus::unbounded);
}

TEST_CASE("lexicographic tie-break picks the designated optimum") {
    // min 0 subject to x0 + x1 = 2; every feasible point is optimal.
    lp::Program p;
    p.num_vars = 2;
    p.objective = {0.0, 0.0};
    p.constraints.push_back({{{0, 1.0}, {1, 1.0}}, lp::Relation::eq, 2.0, "sum"});
    auto sol = lp::solve_lexicographic(p, {1.0, 2.0});
    REQUIRE(sol.status == lp::SolveStatus::optimal);
    // tie objective x0 + 2 x1 is minimized at (2, 0)
    CHECK(sol.x[0] == doctest::Approx(2.0));
    CHECK(sol.x[1] == doctest::Approx(0.0));
    CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("degenerate LP does not cycle") {
    // classic degenerate vertex: several redundant constraints through origin
    lp::Program p;
    p.num_vars = 3;
    p.objective = {-0.75, 150.0, -0.02};
    p.constraints.push_back({{{0, 0.25}, {1, -60.0}, {2, -0.04}}, lp::Relation::le, 0.0, "a"});
    p.constraints.push_back({{{0, 0.5}, {1, -90.0}, {2, -0.02}}, lp::Relation::le, 0.0, "b"});
    p.constraints.push_back({{{2, 1.0}}, lp::Relation::le, 1.0, "c"});
    auto sol = lp::solve(p);
    REQUIRE(sol.status == lp::SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(-0.05).epsilon(1e-6));
}
