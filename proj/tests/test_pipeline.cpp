#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "paramest/errors.hpp"
#include "paramest/pipeline.hpp"
#include "paramest/registry.hpp"

using namespace paramest;

namespace {

TimeSeries toy_data() {
    TimeSeries ts;
    ts.times = {0.0, 0.333, 0.666, 1.0};
    ts.values["y1"] = {2.000, 1.563, 1.229, 0.974};
    return ts;
}

Candidate make(double mu, double x, double error, const std::string& scheme = "aaa") {
    Candidate c;
    c.parameters["mu"] = mu;
    c.initial_conditions["x"] = x;
    c.error = error;
    c.scheme = scheme;
    return c;
}

bool near(const Candidate& c, double mu, double x, double tol) {
    return std::abs(c.parameters.at("mu") - mu) <= tol && std::abs(c.initial_conditions.at("x") - x) <= tol;
}

std::vector<double> grid(double lo, double hi, int n) {
    std::vector<double> t;
    for (int i = 0; i < n; ++i) t.push_back(lo + (hi - lo) * i / (n - 1));
    return t;
}

}  // namespace

TEST_CASE("toy estimate selects one candidate and surfaces both roots") {
    const EstimationResult r = estimate(example_model(), toy_data());
    CHECK(r.k == 1);
    REQUIRE(r.candidates.size() == 1);
    CHECK(near(r.candidates[0], 0.5, 1.0, 0.01));
    CHECK(r.t_eval == 0.0);
    CHECK(r.t_initial == 0.0);
    bool first = false, second = false;
    for (const auto& c : r.all_candidates) {
        first = first || near(c, 0.499, 1.0, 5e-3);
        second = second || near(c, 0.249, -2.0, 5e-3);
    }
    CHECK(first);
    CHECK(second);
    CHECK(r.diagnostics.orders.at("y1") >= 1);
    CHECK(r.diagnostics.dropped_equations >= 1);
    CHECK_FALSE(r.diagnostics.short_of_k);
    CHECK(r.diagnostics.schemes.size() == default_schemes().size());
}

TEST_CASE("toy range constraint keeps the other root") {
    EstimationConfig cfg;
    cfg.ranges["mu"] = {0.0, 0.3};
    const EstimationResult r = estimate(example_model(), toy_data(), cfg);
    REQUIRE(r.candidates.size() == 1);
    CHECK(near(r.candidates[0], 0.249, -2.0, 5e-3));
    CHECK(r.diagnostics.range_rejected >= 1);
    // ranges act only after solving
    const EstimationResult plain = estimate(example_model(), toy_data());
    CHECK(plain.all_candidates.size() == r.all_candidates.size());
}

TEST_CASE("ranges excluding everything leave no candidate") {
    EstimationConfig cfg;
    cfg.ranges["mu"] = {5.0, 6.0};
    const EstimationResult r = estimate(example_model(), toy_data(), cfg);
    CHECK(r.candidates.empty());
    CHECK(r.diagnostics.short_of_k);
    CHECK_FALSE(r.all_candidates.empty());
}

TEST_CASE("reported errors match a fresh candidate_error") {
    const EstimationResult r = estimate(example_model(), toy_data());
    for (const auto& c : r.all_candidates) {
        const double e = candidate_error(example_model(), c.parameters, c.initial_conditions, toy_data(), r.t_initial);
        CHECK(std::abs(e - c.error) <= 1e-12 * std::max(1.0, e));
    }
    CHECK(std::is_sorted(r.all_candidates.begin(), r.all_candidates.end(),
                         [](const Candidate& a, const Candidate& b) { return a.error < b.error; }));
}

TEST_CASE("lotka-volterra round trip from noise-free data") {
    const auto& m = registry_entry("lotka_volterra").model;
    const std::map<std::string, double> params{{"k1", 0.4}, {"k2", 0.6}, {"k3", 0.3}};
    const std::map<std::string, double> x0{{"r", 0.2}, {"w", 0.5}};
    const TimeSeries data = generate_data(m, params, x0, grid(-0.5, 0.5, 21));
    const EstimationResult r = estimate(m, data);
    REQUIRE(r.candidates.size() == 1);
    const Candidate& c = r.candidates[0];
    for (const auto& [name, v] : params) CHECK(std::abs(c.parameters.at(name) - v) <= 1e-2 * v);
    for (const auto& [name, v] : x0) CHECK(std::abs(c.initial_conditions.at(name) - v) <= 1e-2 * v);
    CHECK(r.t_initial == -0.5);
}

TEST_CASE("midpoint evaluation reports states at the first sample") {
    const auto& m = registry_entry("harmonic").model;
    const std::map<std::string, double> params{{"a", 0.3}, {"b", 0.7}};
    const std::map<std::string, double> x0{{"x1", 0.4}, {"x2", 0.8}};
    const TimeSeries data = generate_data(m, params, x0, grid(-0.5, 0.5, 21));
    EstimationConfig cfg;
    cfg.t_eval_policy = TEvalPolicy::midpoint;
    const EstimationResult r = estimate(m, data, cfg);
    CHECK(r.t_eval == 0.0);
    REQUIRE(r.candidates.size() == 1);
    for (const auto& [name, v] : x0) CHECK(std::abs(r.candidates[0].initial_conditions.at(name) - v) <= 1e-6);
}

TEST_CASE("estimator reuses its template across datasets") {
    const auto& m = registry_entry("harmonic").model;
    const Estimator est(m);
    CHECK(est.identifiability().k == 1);
    for (double a : {0.2, 0.6}) {
        const std::map<std::string, double> params{{"a", a}, {"b", 0.5}};
        const TimeSeries data = generate_data(m, params, {{"x1", 0.3}, {"x2", 0.4}}, grid(-0.5, 0.5, 21));
        const EstimationResult r = est.estimate(data);
        REQUIRE(r.candidates.size() == 1);
        CHECK(std::abs(r.candidates[0].parameters.at("a") - a) < 1e-6);
        const EstimationResult again = estimate(m, data);
        CHECK(again.candidates[0].parameters == r.candidates[0].parameters);
    }
}

TEST_CASE("estimate input checks") {
    TimeSeries missing;
    missing.times = {0, 1, 2};
    missing.values["y2"] = {1, 2, 3};
    CHECK_THROWS_AS(estimate(example_model(), missing), std::invalid_argument);

    EstimationConfig cfg;
    cfg.t_eval_policy = TEvalPolicy::explicit_time;
    cfg.t_eval = 2.0;
    CHECK_THROWS_AS(estimate(example_model(), toy_data(), cfg), std::invalid_argument);

    EstimationConfig none;
    none.schemes.clear();
    CHECK_THROWS_AS((Estimator{example_model(), none}), std::invalid_argument);

    TimeSeries impossible;
    impossible.times = {0.0, 0.25, 0.5, 0.75, 1.0};
    impossible.values["y1"] = std::vector<double>(5, -1.0);
    CHECK_THROWS_AS(estimate(example_model(), impossible), EstimationError);
}

TEST_CASE("non-identifiable model is reported as such") {
    const OdeModel m = parse_model("states: x\nparameters: a, b\nequations:\n  x' = -(a + b)*x\noutputs:\n  y1 = x\n");
    CHECK_THROWS_AS(Estimator{m}, EstimationError);
}

TEST_CASE("select_candidates follows the filter-sort-truncate order") {
    const std::vector<Candidate> toy{make(0.499, 1.0, 6.87e-4), make(0.249, -2.0, 2.22e-2)};
    const auto one = select_candidates(toy, 1, {});
    REQUIRE(one.size() == 1);
    CHECK(one[0].error == 6.87e-4);

    bool short_of_k = false;
    const auto all = select_candidates(toy, 5, {}, &short_of_k);
    CHECK(all.size() == 2);
    CHECK(short_of_k);

    std::size_t rejected = 0;
    const auto none = select_candidates(toy, 1, {{"mu", {2.0, 3.0}}}, &short_of_k, &rejected);
    CHECK(none.empty());
    CHECK(short_of_k);
    CHECK(rejected == 2);

    // the filter runs before truncation
    const auto other = select_candidates(toy, 1, {{"x", {-3.0, 0.0}}});
    REQUIRE(other.size() == 1);
    CHECK(other[0].error == 2.22e-2);

    CHECK_THROWS_AS(select_candidates(toy, 0, {}), std::invalid_argument);
}

TEST_CASE("select_candidates does not depend on input order") {
    std::vector<Candidate> pool{make(0.1, 1.0, 1e-3), make(0.2, 1.0, 1e-3), make(0.3, 2.0, 5e-4),
                                make(0.3, 1.0, 5e-4, "fh3"), make(0.3, 1.0, 5e-4, "aaa"), make(0.9, 0.5, 2e-3)};
    const auto reference = select_candidates(pool, 4, {});
    std::mt19937 rng(3);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(pool.begin(), pool.end(), rng);
        const auto got = select_candidates(pool, 4, {});
        REQUIRE(got.size() == reference.size());
        for (std::size_t j = 0; j < got.size(); ++j) {
            CHECK(got[j].parameters == reference[j].parameters);
            CHECK(got[j].initial_conditions == reference[j].initial_conditions);
            CHECK(got[j].scheme == reference[j].scheme);
        }
    }
    CHECK(reference[0].parameters.at("mu") == 0.3);
    CHECK(reference[0].initial_conditions.at("x") == 1.0);
    CHECK(reference[0].scheme == "aaa");
}
