#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rollcast/model_build.hpp"
#include "rollcast/rng.hpp"

#include <cmath>

using namespace rollcast;

namespace {

// J=1, T=2 instance small enough for closed-form cost accounting.
MSlagInstance tiny_instance(double setup_cost, double capacity, double overtime_cost) {
    MSlagInstance inst;
    inst.periods = 2;
    inst.products = 1;
    inst.big_m = {{100.0}, {100.0}};
    inst.setup_time = {1.0};
    inst.unit_time = {1.0};
    inst.capacity = {capacity, capacity};
    inst.inv_capacity = {{100.0}, {100.0}};
    inst.overtime_bound = {20.0, 20.0};
    inst.setup_cost = {{setup_cost}, {setup_cost}};
    inst.backlog_cost = {{5.0}, {5.0}};
    inst.holding_cost = {{1.0}, {1.0}};
    inst.overtime_cost = {overtime_cost, overtime_cost};
    return inst;
}

MSlagInstance wide_instance(int T, int J) {
    MSlagInstance inst;
    inst.periods = T;
    inst.products = J;
    inst.big_m.assign(T, std::vector<double>(J, 50.0));
    inst.setup_time.assign(J, 2.0);
    inst.unit_time.assign(J, 1.0);
    inst.capacity.assign(T, 40.0);
    inst.inv_capacity.assign(T, std::vector<double>(J, 50.0));
    inst.overtime_bound.assign(T, 10.0);
    inst.setup_cost.assign(T, std::vector<double>(J, 20.0));
    inst.backlog_cost.assign(T, std::vector<double>(J, 5.0));
    inst.holding_cost.assign(T, std::vector<double>(J, 1.0));
    inst.overtime_cost.assign(T, 2.0);
    return inst;
}

Scenario flat_scenario(int periods, int products, double demand) {
    Scenario sc;
    sc.demands.assign(periods, std::vector<double>(products, demand));
    return sc;
}

} // namespace

TEST_CASE("deterministic model variable counts") {
    const int T = 4, J = 3;
    auto inst = wide_instance(T, J);
    auto state = SystemState::zero(J);
    auto sc = flat_scenario(T - 1, J, 5.0);
    auto model = build_deterministic(inst, state, std::vector<double>(J, 5.0), sc);
    // per period: x, y, i+, i- per product plus one overtime variable
    CHECK(model.num_binaries() == static_cast<std::size_t>(T * J));
    CHECK(model.num_variables() == static_cast<std::size_t>(T * (4 * J + 1)));
    CHECK(model.num_variables() - model.num_binaries() ==
          static_cast<std::size_t>(T * (3 * J + 1)));
}

TEST_CASE("two-stage model variable counts") {
    const int T = 4, J = 2, S = 5;
    auto inst = wide_instance(T, J);
    auto state = SystemState::zero(J);
    ScenarioSet set;
    for (int s = 0; s < S; ++s) set.scenarios.push_back(flat_scenario(T - 1, J, 4.0 + s));
    auto model = build_two_stage(inst, state, std::vector<double>(J, 4.0), set);
    CHECK(model.num_binaries() == static_cast<std::size_t>(J + S * (T - 1) * J));
    CHECK(model.num_variables() ==
          static_cast<std::size_t>((4 * J + 1) + S * (T - 1) * (4 * J + 1)));
}

TEST_CASE("final-period production forced to zero") {
    auto inst = wide_instance(3, 2);
    auto model = build_deterministic(inst, SystemState::zero(2), {5.0, 5.0},
                                     flat_scenario(2, 2, 5.0));
    int found = 0;
    for (const auto& v : model.variables()) {
        if (v.role == VarRole::Production && v.t == 2) {
            CHECK(v.ub == 0.0);
            ++found;
        }
    }
    CHECK(found == 2);
}

TEST_CASE("hand case: setup then produce-to-order") {
    // d = (4, 6); production arrives with one period lag, so period-0 demand
    // is always backlogged (cost 20). Producing 10 in period 0 (setup 30)
    // clears period 1 exactly: optimum 50.
    auto inst = tiny_instance(30.0, 100.0, 2.0);
    auto model = build_deterministic(inst, SystemState::zero(1), {4.0}, flat_scenario(1, 1, 6.0));
    auto sol = solve_milp(model);
    REQUIRE(sol.status == MILPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(50.0));

    auto d = extract_first_stage(model, sol);
    CHECK(d.setup == std::vector<int>{1});
    CHECK(d.production[0] == doctest::Approx(10.0));
    CHECK(d.backlog[0] == doctest::Approx(4.0));
    CHECK(d.inventory[0] == doctest::Approx(0.0));
    CHECK_FALSE(d.production_snapped);
}

TEST_CASE("hand case: expensive setup makes backlogging optimal") {
    // Same demands but setup costs 60: never produce, pay 20 + 50 backlog.
    auto inst = tiny_instance(60.0, 100.0, 2.0);
    auto model = build_deterministic(inst, SystemState::zero(1), {4.0}, flat_scenario(1, 1, 6.0));
    auto sol = solve_milp(model);
    REQUIRE(sol.status == MILPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(70.0));
    auto d = extract_first_stage(model, sol);
    CHECK(d.setup == std::vector<int>{0});
    CHECK(d.production[0] == 0.0);
}

TEST_CASE("hand case: tight capacity buys overtime") {
    // Capacity 5; producing 10 takes 1 + 10 = 11 time units, overtime 6 at
    // cost 0.5: optimum 30 + 20 + 3 = 53.
    auto inst = tiny_instance(30.0, 5.0, 0.5);
    auto model = build_deterministic(inst, SystemState::zero(1), {4.0}, flat_scenario(1, 1, 6.0));
    auto sol = solve_milp(model);
    REQUIRE(sol.status == MILPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(53.0));
    auto d = extract_first_stage(model, sol);
    CHECK(d.overtime == doctest::Approx(6.0));
}

TEST_CASE("initial state enters the first flow balance") {
    // 3 units on hand and 2 in the pipeline cover the period-0 demand of 4;
    // only 1 unit of period-1 demand remains unmet by stock.
    auto inst = tiny_instance(30.0, 100.0, 2.0);
    SystemState state{{3.0}, {0.0}, {2.0}};
    auto model = build_deterministic(inst, state, {4.0}, flat_scenario(1, 1, 0.0));
    auto sol = solve_milp(model);
    REQUIRE(sol.status == MILPStatus::Optimal);
    // on hand 5 vs demand 4: one leftover unit is held through both periods
    CHECK(sol.objective == doctest::Approx(2.0));
}

TEST_CASE("two-stage with identical scenarios collapses to deterministic") {
    auto inst = wide_instance(3, 2);
    auto state = SystemState::zero(2);
    std::vector<double> cur{6.0, 3.0};
    auto sc = flat_scenario(2, 2, 5.0);
    ScenarioSet set;
    for (int s = 0; s < 4; ++s) set.scenarios.push_back(sc);

    auto det = solve_milp(build_deterministic(inst, state, cur, sc));
    auto two = solve_milp(build_two_stage(inst, state, cur, set));
    REQUIRE(det.status == MILPStatus::Optimal);
    REQUIRE(two.status == MILPStatus::Optimal);
    CHECK(two.objective == doctest::Approx(det.objective).epsilon(1e-7));
}

TEST_CASE("two-stage objective dominates the wait-and-see bound") {
    auto inst = wide_instance(3, 1);
    auto state = SystemState::zero(1);
    std::vector<double> cur{5.0};
    ScenarioSet set;
    set.scenarios.push_back(flat_scenario(2, 1, 2.0));
    set.scenarios.push_back(flat_scenario(2, 1, 9.0));
    auto two = solve_milp(build_two_stage(inst, state, cur, set));
    REQUIRE(two.status == MILPStatus::Optimal);

    // Knowing the scenario before committing can only help: the average of
    // the per-scenario optima is a lower bound on the extensive form.
    double avg = 0.0;
    for (const auto& sc : set.scenarios) {
        auto det = solve_milp(build_deterministic(inst, state, cur, sc));
        REQUIRE(det.status == MILPStatus::Optimal);
        avg += det.objective / static_cast<double>(set.scenarios.size());
    }
    CHECK(two.objective >= avg - 1e-7);
}

TEST_CASE("perfect information equals the deterministic model on the truth") {
    auto inst = wide_instance(4, 2);
    TruthScenario truth;
    truth.demands = {{4, 2}, {6, 3}, {5, 1}, {2, 4}};
    Scenario tail;
    tail.demands.assign(truth.demands.begin() + 1, truth.demands.end());

    auto pi = solve_milp(build_perfect_information(inst, SystemState::zero(2), truth));
    auto det = solve_milp(build_deterministic(inst, SystemState::zero(2), truth.demands[0], tail));
    REQUIRE(pi.status == MILPStatus::Optimal);
    CHECK(pi.objective == doctest::Approx(det.objective));
}

TEST_CASE("extract snaps production when the setup is off") {
    auto inst = tiny_instance(30.0, 100.0, 2.0);
    auto model = build_deterministic(inst, SystemState::zero(1), {4.0}, flat_scenario(1, 1, 6.0));
    auto sol = solve_milp(model);
    REQUIRE(sol.status == MILPStatus::Optimal);

    MILPSolution doctored = sol;
    for (std::size_t i = 0; i < model.num_variables(); ++i) {
        const auto& v = model.variables()[i];
        if (v.t == 0 && v.role == VarRole::Setup) doctored.x[i] = 0.0;
        if (v.t == 0 && v.role == VarRole::Production) doctored.x[i] = 1e-9;
    }
    auto d = extract_first_stage(model, doctored);
    CHECK(d.setup == std::vector<int>{0});
    CHECK(d.production[0] == 0.0);
    CHECK(d.production_snapped);

    SUBCASE("fractional setup is rejected") {
        for (std::size_t i = 0; i < model.num_variables(); ++i)
            if (model.variables()[i].t == 0 && model.variables()[i].role == VarRole::Setup)
                doctored.x[i] = 0.4;
        CHECK_THROWS_AS(extract_first_stage(model, doctored), NotOptimal);
    }
}

TEST_CASE("deterministic optimum matches setup-pattern enumeration") {
    // Oracle: enumerate every setup pattern, fix the binaries, solve the LP.
    // Catches any constraint that would cut off an optimal solution.
    Rng rng(6);
    for (int trial = 0; trial < 8; ++trial) {
        const int T = 4;
        auto inst = wide_instance(T, 1);
        if (trial % 2) inst.capacity.assign(T, 10.0);  // make overtime bind
        SystemState state{{rng.uniform(0.0, 6.0)}, {0.0}, {rng.uniform(0.0, 6.0)}};
        if (trial % 3 == 0) state = SystemState{{0.0}, {rng.uniform(0.0, 8.0)}, {0.0}};
        std::vector<double> cur{std::round(rng.uniform(0.0, 12.0))};
        Scenario sc;
        for (int k = 0; k < T - 1; ++k)
            sc.demands.push_back({std::round(rng.uniform(0.0, 12.0))});

        auto model = build_deterministic(inst, state, cur, sc);
        auto sol = solve_milp(model);
        REQUIRE(sol.status == MILPStatus::Optimal);

        double best = kInf;
        std::vector<int> setups;
        for (std::size_t i = 0; i < model.num_variables(); ++i)
            if (model.variables()[i].type == VarType::Binary) setups.push_back(static_cast<int>(i));
        for (unsigned mask = 0; mask < (1u << setups.size()); ++mask) {
            MILPModel fixed = model;
            for (std::size_t b = 0; b < setups.size(); ++b) {
                double v = (mask >> b) & 1 ? 1.0 : 0.0;
                fixed.variable(setups[b]).lb = v;
                fixed.variable(setups[b]).ub = v;
            }
            auto lp = solve_lp(fixed);
            if (lp.status == LPStatus::Optimal) best = std::min(best, lp.objective);
        }
        CHECK(sol.objective == doctest::Approx(best).epsilon(1e-7));
    }
}

TEST_CASE("dimension mismatches are rejected") {
    auto inst = wide_instance(3, 2);
    auto state = SystemState::zero(2);
    CHECK_THROWS_AS(
        build_deterministic(inst, state, {1.0}, flat_scenario(2, 2, 1.0)),
        DimensionMismatch);
    CHECK_THROWS_AS(
        build_deterministic(inst, state, {1.0, 1.0}, flat_scenario(2, 3, 1.0)),
        DimensionMismatch);
    CHECK_THROWS_AS(
        build_deterministic(inst, state, {1.0, 1.0}, flat_scenario(4, 2, 1.0)),
        DimensionMismatch);
    CHECK_THROWS_AS(build_two_stage(inst, state, {1.0, 1.0}, ScenarioSet{}),
                    DimensionMismatch);
    CHECK_THROWS_AS(build_two_stage(inst, SystemState::zero(3), {1.0, 1.0},
                                    ScenarioSet{{flat_scenario(2, 2, 1.0)}, 0}),
                    DimensionMismatch);
}
