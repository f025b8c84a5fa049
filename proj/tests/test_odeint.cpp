#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "paramest/errors.hpp"
#include "paramest/odeint.hpp"
#include "paramest/registry.hpp"

using namespace paramest;

namespace {

const OdeModel& decay_model() {
    static const OdeModel m = parse_model("states: x\nparameters: k\nequations:\n  x' = -k*x\noutputs:\n  y1 = x\n");
    return m;
}

TimeSeries toy_data() {
    TimeSeries ts;
    ts.times = {0.0, 0.333, 0.666, 1.0};
    ts.values["y1"] = {2.000, 1.563, 1.229, 0.974};
    return ts;
}

double toy_output(double mu, double x0, double t) {
    const double x = x0 * std::exp(-mu * t);
    return x * x + x;
}

}  // namespace

TEST_CASE("exponential decay matches the analytic solution") {
    const Trajectory tr = simulate(decay_model(), {{"k", 1.0}}, {{"x", 1.0}}, 0.0, {0.0, 1.0});
    CHECK(std::abs(tr.states(1, 0) - std::exp(-1.0)) < 1e-9);
    CHECK(tr.outputs(1, 0) == tr.states(1, 0));
}

TEST_CASE("example model reproduces the tabulated data") {
    const std::vector<double> times{0.0, 0.333, 0.666, 1.0};
    const Trajectory tr = simulate(example_model(), {{"mu", 0.5}}, {{"x", 1.0}}, 0.0, times);
    CHECK(std::abs(tr.outputs(0, 0) - 2.000) < 5e-4);
    CHECK(std::abs(tr.outputs(1, 0) - 1.563) < 5e-4);
    CHECK(std::abs(tr.outputs(3, 0) - 0.974) < 5e-4);
    // the third tabulated value (1.229) is off by about 1.5e-3 from the exact curve
    CHECK(std::abs(tr.outputs(2, 0) - toy_output(0.5, 1.0, 0.666)) < 1e-9);
}

TEST_CASE("harmonic oscillator is periodic and conserves energy") {
    const OdeModel& m = registry_entry("harmonic").model;
    const Trajectory tr = simulate(m, {{"a", 1.0}, {"b", 1.0}}, {{"x1", 0.0}, {"x2", 1.0}}, 0.0, {2 * std::numbers::pi});
    CHECK(std::abs(tr.states(0, 0)) < 1e-7);
    CHECK(std::abs(tr.states(0, 1) - 1.0) < 1e-7);

    const double a = 0.3;
    const double b = 0.7;
    std::vector<double> times;
    for (int i = 0; i <= 20; ++i) times.push_back(-0.5 + 0.05 * i);
    const Trajectory e = simulate(m, {{"a", a}, {"b", b}}, {{"x1", 0.4}, {"x2", 0.8}}, 0.0, times);
    const double e0 = 0.4 * 0.4 / a + b * 0.8 * 0.8;
    for (Eigen::Index i = 0; i < e.states.rows(); ++i) {
        const double ei = e.states(i, 0) * e.states(i, 0) / a + b * e.states(i, 1) * e.states(i, 1);
        CHECK(std::abs(ei - e0) / e0 < 1e-8);
    }
}

TEST_CASE("backward integration undoes forward integration") {
    const OdeModel& m = registry_entry("vanderpol").model;
    const std::map<std::string, double> p{{"a", 0.4}, {"b", 0.6}};
    const Trajectory fwd = simulate(m, p, {{"x1", 0.3}, {"x2", 0.8}}, 0.0, {0.7});
    const Trajectory back =
        simulate(m, p, {{"x1", fwd.states(0, 0)}, {"x2", fwd.states(0, 1)}}, 0.7, {0.0});
    CHECK(std::abs(back.states(0, 0) - 0.3) < 1e-8 * 0.3);
    CHECK(std::abs(back.states(0, 1) - 0.8) < 1e-8 * 0.8);
}

TEST_CASE("mixed evaluation times around the start") {
    const Trajectory tr = simulate(decay_model(), {{"k", 2.0}}, {{"x", 1.0}}, 0.0, {-0.5, -0.1, 0.0, 0.25, 0.5});
    for (Eigen::Index i = 0; i < 5; ++i)
        CHECK(std::abs(tr.states(i, 0) - std::exp(-2.0 * tr.times[static_cast<std::size_t>(i)])) < 1e-9);
}

TEST_CASE("tighter tolerances reduce the error") {
    auto error_at = [](double tol) {
        IntegratorConfig cfg;
        cfg.relative_tolerance = tol;
        cfg.absolute_tolerance = tol;
        const Trajectory tr = simulate(decay_model(), {{"k", 1.0}}, {{"x", 1.0}}, 0.0, {3.0}, cfg);
        return std::abs(tr.states(0, 0) - std::exp(-3.0));
    };
    CHECK(error_at(1e-7) < error_at(1e-4) / 10);
    CHECK(error_at(1e-10) < error_at(1e-7) / 10);
}

TEST_CASE("poles and blow-up become integration errors") {
    const OdeModel blow = parse_model("states: x\nparameters: c\nequations:\n  x' = c*x^2\noutputs:\n  y1 = x\n");
    try {
        simulate(blow, {{"c", 1.0}}, {{"x", 1.0}}, 0.0, {0.5, 2.0});
        FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
        CHECK(e.last_good_time() >= 0.5);
        CHECK(e.last_good_time() < 1.0);
    }
    const OdeModel pole = parse_model("states: x\nparameters: c\nequations:\n  x' = c/x\noutputs:\n  y1 = x\n");
    CHECK_THROWS_AS(simulate(pole, {{"c", 1.0}}, {{"x", 0.0}}, 0.0, {1.0}), IntegrationError);
    CHECK_THROWS_AS(simulate(decay_model(), {{"k", 1.0}}, {}, 0.0, {1.0}), ModelError);
}

TEST_CASE("candidate errors on the example data") {
    const OdeModel& m = example_model();
    const TimeSeries data = toy_data();
    const double e1 = candidate_error(m, {{"mu", 0.499}}, {{"x", 1.000}}, data, 0.0);
    const double e2 = candidate_error(m, {{"mu", 0.249}}, {{"x", -2.000}}, data, 0.0);
    CHECK(e1 > 6.87e-4 / 2);
    CHECK(e1 < 6.87e-4 * 2);
    CHECK(e2 > 2.22e-2 / 2);
    CHECK(e2 < 2.22e-2 * 2);
    CHECK(std::isinf(candidate_error(m, {{"mu", std::nan("")}}, {{"x", 1.0}}, data, 0.0)));
}

TEST_CASE("truth beats a perturbed truth on every registry model") {
    std::vector<double> times;
    for (int i = 0; i <= 20; ++i) times.push_back(-0.5 + 0.05 * i);
    for (const auto& entry : registry()) {
        CAPTURE(entry.name);
        const OdeModel& m = entry.model;
        std::map<std::string, double> p;
        std::map<std::string, double> x;
        double v = 0.15;
        for (const auto& s : m.parameters()) p[s] = (v += 0.07) > 0.9 ? (v = 0.15) : v;
        for (const auto& s : m.states()) x[s] = (v += 0.07) > 0.9 ? (v = 0.15) : v;
        const TimeSeries data = generate_data(m, p, x, times);
        CHECK(data.size() == 21);
        CHECK(candidate_error(m, p, x, data, -0.5) <= 1e-8);
        auto px = p;
        for (auto& [k, val] : px) val *= 1.01;
        CHECK(candidate_error(m, p, x, data, -0.5) < candidate_error(m, px, x, data, -0.5));
    }
}

TEST_CASE("generate_data edge cases") {
    const TimeSeries one = generate_data(example_model(), {{"mu", 0.5}}, {{"x", 1.0}}, {0.2});
    CHECK(one.size() == 1);
    CHECK(one.values.at("y1")[0] == doctest::Approx(2.0));
    const OdeModel& seir = registry_entry("seir").model;
    std::map<std::string, double> p;
    std::map<std::string, double> x;
    for (const auto& s : seir.parameters()) p[s] = 0.4;
    for (const auto& s : seir.states()) x[s] = 0.6;
    std::vector<double> times{-0.5, 0.0, 0.5};
    const TimeSeries ts = generate_data(seir, p, x, times);
    CHECK(ts.values.size() == seir.outputs().size());
    for (double y : ts.values.at("y2")) CHECK(y == doctest::Approx(0.6).epsilon(1e-12));
}
