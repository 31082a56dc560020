#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rollcast/milp.hpp"
#include "rollcast/rng.hpp"

#include <cmath>
#include <sstream>

using namespace rollcast;

namespace {

int add_cont(MILPModel& m, double lb, double ub, double obj) {
    Variable v;
    v.lb = lb;
    v.ub = ub;
    int i = m.add_variable(v);
    m.set_objective(i, obj);
    return i;
}

int add_bin(MILPModel& m, double obj) {
    Variable v;
    v.lb = 0;
    v.ub = 1;
    v.type = VarType::Binary;
    int i = m.add_variable(v);
    m.set_objective(i, obj);
    return i;
}

void add_row(MILPModel& m, std::vector<std::pair<int, double>> coeffs, Rel rel, double rhs) {
    Constraint c;
    c.coeffs = std::move(coeffs);
    c.rel = rel;
    c.rhs = rhs;
    m.add_constraint(std::move(c));
}

// Exhaustive enumeration over binary patterns, each leaf solved by the LP
// solver with the binaries fixed. Independent oracle for solve_milp.
double enumerate_milp(const MILPModel& model) {
    std::vector<int> bins;
    for (std::size_t i = 0; i < model.num_variables(); ++i)
        if (model.variables()[i].type == VarType::Binary) bins.push_back(static_cast<int>(i));
    double best = kInf;
    for (unsigned long mask = 0; mask < (1UL << bins.size()); ++mask) {
        MILPModel fixed = model;
        for (std::size_t b = 0; b < bins.size(); ++b) {
            double v = (mask >> b) & 1 ? 1.0 : 0.0;
            fixed.variable(bins[b]).lb = v;
            fixed.variable(bins[b]).ub = v;
        }
        LPSolution lp = solve_lp(fixed);
        if (lp.status == LPStatus::Optimal) best = std::min(best, lp.objective);
    }
    return best;
}

// Random small mixed-binary model with guaranteed feasibility (x = 0 valid).
MILPModel random_model(Rng& rng, int n_bin, int n_cont, int n_rows) {
    MILPModel m;
    for (int i = 0; i < n_bin; ++i) add_bin(m, rng.uniform(-5, 5));
    for (int i = 0; i < n_cont; ++i) add_cont(m, 0, rng.uniform(1, 10), rng.uniform(-5, 5));
    for (int r = 0; r < n_rows; ++r) {
        std::vector<std::pair<int, double>> coeffs;
        for (std::size_t i = 0; i < m.num_variables(); ++i)
            if (rng.uniform() < 0.6) coeffs.emplace_back(static_cast<int>(i), rng.uniform(-3, 3));
        if (coeffs.empty()) continue;
        add_row(m, std::move(coeffs), Rel::LE, rng.uniform(0.5, 8));
    }
    return m;
}

} // namespace

TEST_CASE("one-variable LP") {
    MILPModel m;
    int x = add_cont(m, 0, kInf, -1);
    add_row(m, {{x, 1.0}}, Rel::LE, 5.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.x[x] == doctest::Approx(5.0));
    CHECK(sol.objective == doctest::Approx(-5.0));
}

TEST_CASE("LP face optimum") {
    MILPModel m;
    int x = add_cont(m, 0, 1, -1);
    int y = add_cont(m, 0, 1, -1);
    add_row(m, {{x, 1.0}, {y, 1.0}}, Rel::LE, 1.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-1.0));
    CHECK(sol.x[x] + sol.x[y] == doctest::Approx(1.0));
}

TEST_CASE("infeasible LP detected") {
    MILPModel m;
    int x = add_cont(m, 0, kInf, 0);
    add_row(m, {{x, 1.0}}, Rel::GE, 2.0);
    add_row(m, {{x, 1.0}}, Rel::LE, 1.0);
    CHECK(solve_lp(m).status == LPStatus::Infeasible);
}

TEST_CASE("unbounded LP detected") {
    MILPModel m;
    add_cont(m, 0, kInf, -1);
    CHECK(solve_lp(m).status == LPStatus::Unbounded);
}

TEST_CASE("equality constraints and lower bounds") {
    // min x + y s.t. x + y = 3, x >= 1, y >= 0.5
    MILPModel m;
    int x = add_cont(m, 1, kInf, 1);
    int y = add_cont(m, 0.5, kInf, 1);
    add_row(m, {{x, 1.0}, {y, 1.0}}, Rel::EQ, 3.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(3.0));
}

TEST_CASE("fixed variables are substituted") {
    MILPModel m;
    int x = add_cont(m, 2, 2, 3);
    int y = add_cont(m, 0, kInf, 1);
    add_row(m, {{x, 1.0}, {y, 1.0}}, Rel::GE, 5.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.x[x] == 2.0);
    CHECK(sol.x[y] == doctest::Approx(3.0));
    CHECK(sol.objective == doctest::Approx(9.0));
}

TEST_CASE("pure LP MILP takes one node") {
    MILPModel m;
    int x = add_cont(m, 0, 4, -2);
    add_row(m, {{x, 1.0}}, Rel::LE, 3.0);
    auto sol = solve_milp(m);
    REQUIRE(sol.status == MILPStatus::Optimal);
    CHECK(sol.nodes == 1);
    CHECK(sol.objective == doctest::Approx(solve_lp(m).objective));
}

TEST_CASE("10-binary knapsack equals exhaustive enumeration") {
    // max value s.t. weight <= cap  ==  min -value
    Rng rng(7);
    MILPModel m;
    std::vector<std::pair<int, double>> wrow;
    for (int i = 0; i < 10; ++i) {
        int b = add_bin(m, -rng.uniform(1, 10));
        wrow.emplace_back(b, rng.uniform(1, 10));
    }
    add_row(m, std::move(wrow), Rel::LE, 22.0);
    auto sol = solve_milp(m);
    REQUIRE(sol.status == MILPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(enumerate_milp(m)).epsilon(1e-9));
}

TEST_CASE("node limit semantics") {
    // Fractional root: LP relaxation puts both binaries at 0.75.
    MILPModel m;
    int a = add_bin(m, -1);
    int b = add_bin(m, -1);
    add_row(m, {{a, 1.0}, {b, 1.0}}, Rel::LE, 1.5);
    MILPOptions opts;
    opts.node_limit = 1;
    auto sol = solve_milp(m, opts);
    CHECK(sol.status == MILPStatus::NodeLimit);
    CHECK(sol.nodes <= 1);
    CHECK(sol.bound <= -1.0 + 1e-9);

    auto full = solve_milp(m);
    REQUIRE(full.status == MILPStatus::Optimal);
    CHECK(full.objective == doctest::Approx(-1.0));
}

TEST_CASE("random models: MILP equals enumeration oracle") {
    Rng rng(123);
    for (int trial = 0; trial < 25; ++trial) {
        MILPModel m = random_model(rng, 2 + trial % 7, 3, 4 + trial % 4);
        auto sol = solve_milp(m);
        double oracle = enumerate_milp(m);
        if (std::isfinite(oracle)) {
            REQUIRE(sol.status == MILPStatus::Optimal);
            CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-7));
        } else {
            CHECK(sol.status == MILPStatus::Infeasible);
        }
    }
}

TEST_CASE("relaxation never exceeds MILP optimum") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        MILPModel m = random_model(rng, 6, 2, 5);
        auto lp = solve_lp(m);
        auto mip = solve_milp(m);
        if (lp.status == LPStatus::Optimal && mip.status == MILPStatus::Optimal)
            CHECK(lp.objective <= mip.objective + 1e-7);
    }
}

TEST_CASE("determinism of repeated solves") {
    Rng rng(5);
    MILPModel m = random_model(rng, 10, 4, 7);
    auto a = solve_milp(m);
    auto b = solve_milp(m);
    CHECK(a.status == b.status);
    CHECK(a.objective == b.objective);
    CHECK(a.nodes == b.nodes);
    CHECK(a.x == b.x);
}

TEST_CASE("optimal solutions satisfy constraints within tolerance") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        MILPModel m = random_model(rng, 4, 4, 5);
        auto sol = solve_milp(m);
        if (sol.status != MILPStatus::Optimal) continue;
        for (const auto& c : m.constraints()) {
            double lhs = 0;
            for (auto [vi, co] : c.coeffs) lhs += co * sol.x[vi];
            if (c.rel == Rel::LE) CHECK(lhs <= c.rhs + 1e-7);
            if (c.rel == Rel::GE) CHECK(lhs >= c.rhs - 1e-7);
            if (c.rel == Rel::EQ) CHECK(lhs == doctest::Approx(c.rhs).epsilon(1e-7));
        }
        for (std::size_t i = 0; i < m.num_variables(); ++i)
            if (m.variables()[i].type == VarType::Binary)
                CHECK(std::abs(sol.x[i] - std::round(sol.x[i])) < 1e-6);
    }
}

TEST_CASE("LP file writer emits a well-formed model") {
    MILPModel m;
    int x = add_cont(m, 0, 5, 1.5);
    int b = add_bin(m, -2);
    add_row(m, {{x, 1.0}, {b, -3.0}}, Rel::LE, 4.0);
    std::ostringstream os;
    write_lp(m, os);
    auto text = os.str();
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("Binary") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}
