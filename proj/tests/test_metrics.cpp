#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rollcast/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace rollcast;

TEST_CASE("nd hand values") {
    CHECK(nd({{10.0}, {10.0}}, {{8.0}, {14.0}}) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(nd({{5.0, 5.0}}, {{5.0, 5.0}}) == doctest::Approx(0.0));
    // one period off by the full demand
    CHECK(nd({{4.0}}, {{0.0}}) == doctest::Approx(1.0));
}

TEST_CASE("nd is scale invariant") {
    std::vector<std::vector<double>> truth = {{3.0, 7.0}, {2.0, 9.0}};
    std::vector<std::vector<double>> pred = {{4.0, 6.5}, {1.0, 9.5}};
    double base = nd(truth, pred);
    for (auto& row : truth)
        for (auto& v : row) v *= 100.0;
    for (auto& row : pred)
        for (auto& v : row) v *= 100.0;
    CHECK(nd(truth, pred) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("nd rejects bad input") {
    CHECK_THROWS_AS(nd({{1.0}}, {{1.0}, {2.0}}), MetricError);
    CHECK_THROWS_AS(nd({{1.0, 2.0}}, {{1.0}}), MetricError);
    CHECK_THROWS_AS(nd({{0.0}, {0.0}}, {{1.0}, {1.0}}), ZeroDenominator);
}

TEST_CASE("rho risk hand values") {
    CHECK(rho_risk_product(0.9, 10.0, 12.0) == doctest::Approx(3.6).epsilon(1e-12));
    CHECK(rho_risk_product(0.9, 10.0, 8.0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(rho_risk_product(0.5, 10.0, 12.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rho_risk_product(0.5, 10.0, 8.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rho_risk_product(0.9, 10.0, 10.0) == doctest::Approx(0.0));
}

TEST_CASE("rho risk is nonnegative and penalizes the wrong side") {
    for (double rho : {0.1, 0.5, 0.9}) {
        for (double zh : {0.0, 5.0, 10.0, 15.0}) {
            CHECK(rho_risk_product(rho, 10.0, zh) >= 0.0);
        }
    }
    // high rho makes overshooting the expensive side
    CHECK(rho_risk_product(0.9, 10.0, 8.0) < rho_risk_product(0.9, 10.0, 12.0));
    CHECK(rho_risk_product(0.9, 10.0, 5.0) < rho_risk_product(0.9, 10.0, 15.0));
    CHECK_THROWS_AS(rho_risk_product(0.0, 1.0, 1.0), MetricError);
    CHECK_THROWS_AS(rho_risk_product(1.0, 1.0, 1.0), MetricError);
}

TEST_CASE("rho risk aggregate") {
    // (3.6 + 0.4) / 20
    CHECK(rho_risk_aggregate(0.9, {{10.0, 12.0}, {10.0, 8.0}}) ==
          doctest::Approx(0.2).epsilon(1e-12));
    CHECK_THROWS_AS(rho_risk_aggregate(0.9, {{0.0, 1.0}}), ZeroDenominator);
}

TEST_CASE("gap percent") {
    CHECK(gap_percent(116.8, 100.0) == doctest::Approx(16.8).epsilon(1e-12));
    CHECK(gap_percent(100.0, 100.0) == doctest::Approx(0.0));
    CHECK(gap_percent(99.0, 100.0) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(gap_percent(1.0, 0.0), ZeroPIBound);
    CHECK_THROWS_AS(gap_percent(1.0, -5.0), ZeroPIBound);
}

TEST_CASE("metric report serializes to json") {
    MetricReport rep;
    rep.nd_table = {0.3, 0.25};
    rep.rho_risk["0.9"] = 0.2;
    rep.gap_percent = 16.8;
    rep.metadata["policy"] = "deterministic";
    std::string s = rep.to_json();
    CHECK(s.find("\"gap_percent\": 16.8") != std::string::npos);
    CHECK(s.find("\"0.9\": 0.2") != std::string::npos);
    CHECK(s.find("deterministic") != std::string::npos);
}
