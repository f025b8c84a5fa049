#include <cmath>
#include <random>

#include "doctest.h"
#include "paramest/prolongation.hpp"
#include "paramest/registry.hpp"

using namespace paramest;

TEST_CASE("total derivative of the example model") {
    const OdeModel& m = example_model();
    const RationalExpr dx = total_derivative(RationalExpr::symbol("x"), m);
    CHECK(eval_expr(dx, {{"mu", 0.5}, {"x[0]", 2.0}}) == doctest::Approx(-1.0));
    CHECK(total_derivative(RationalExpr(3), m).is_zero());
    const RationalExpr dy = total_derivative(parse_expression("x^2 + x"), m);
    for (double x : {0.3, 1.0, -2.0}) {
        const double mu = 0.7;
        CHECK(eval_expr(dy, {{"mu", mu}, {"x[0]", x}}) == doctest::Approx(-mu * (2 * x * x + x)));
    }
    const RationalExpr formal = formal_derivative(parse_expression("x^2 + x"), m);
    CHECK(eval_expr(formal, {{"x[0]", 2.0}, {"x[1]", 3.0}}) == doctest::Approx(2 * 2.0 * 3.0 + 3.0));
}

TEST_CASE("default orders") {
    CHECK(default_orders(example_model()).at("y1") == 3);
    CHECK(default_orders(registry_entry("lotka_volterra").model).at("y1") == 6);
    const OdeModel wide = parse_model(
        "states: x\nparameters: a\nequations:\n  x' = -a*x\noutputs:\n  y1 = x\n  y2 = 2*x\n  y3 = a*x\n");
    CHECK(default_orders(wide).at("y1") == 1);
}

TEST_CASE("example prolongation has the expected layout") {
    const OdeModel& m = example_model();
    const ProlongedSystem ps = prolong(m, {{"y1", 2}});
    CHECK(ps.output_equations().size() == 3);
    CHECK(ps.jet_constraints().size() == 2);
    CHECK(ps.aux_relations().empty());
    CHECK(ps.equation_count() == 5);
    std::vector<std::string> names;
    for (int v : ps.unknowns()) names.push_back(ps.variables()[static_cast<std::size_t>(v)].name);
    CHECK(names == std::vector<std::string>{"mu", "x[0]", "x[1]", "x[2]"});

    // y'' = 2(x1^2 + x0 x2) + x2
    const RationalExpr y2 = ps.output_expr("y1", 2);
    const std::map<std::string, double> at{{"x[0]", 0.4}, {"x[1]", -1.1}, {"x[2]", 2.3}};
    CHECK(eval_expr(y2, at) == doctest::Approx(2 * (1.1 * 1.1 + 0.4 * 2.3) + 2.3));
}

TEST_CASE("zero orders give bare outputs") {
    const OdeModel& m = registry_entry("harmonic").model;
    const ProlongedSystem ps = prolong(m, {{"y1", 0}, {"y2", 0}});
    CHECK(ps.output_equations().size() == 2);
    CHECK(ps.jet_constraints().empty());
}

TEST_CASE("harmonic first derivatives") {
    const OdeModel& m = registry_entry("harmonic").model;
    const ProlongedSystem ps = prolong(m, {{"y1", 1}, {"y2", 1}});
    REQUIRE(ps.jet_constraints().size() == 2);
    const std::map<std::string, double> at{{"a", 1.7}, {"b", 0.6}, {"x1[0]", 0.3}, {"x2[0]", -0.8}};
    for (const auto& c : ps.jet_constraints()) {
        const double v = eval_expr(ps.constraint_expr(c), at);
        if (c.state == "x1") CHECK(v == doctest::Approx(-1.7 * -0.8));
        if (c.state == "x2") CHECK(v == doctest::Approx(0.3 / 0.6));
    }
}

TEST_CASE("taylor coefficients of the example") {
    const JetValues j = taylor_coefficients(example_model(), {{"mu", 0.5}}, {{"x", 1.0}}, 2);
    CHECK(j.states.at("x")[1] == doctest::Approx(-0.5));
    CHECK(j.states.at("x")[2] == doctest::Approx(0.25));
    CHECK(j.outputs.at("y1")[0] == doctest::Approx(2.0));
    CHECK(j.outputs.at("y1")[1] == doctest::Approx(-1.5));
    CHECK(j.outputs.at("y1")[2] == doctest::Approx(1.25));

    const JetValues h = taylor_coefficients(registry_entry("harmonic").model, {{"a", 1.0}, {"b", 1.0}},
                                            {{"x1", 1.0}, {"x2", 0.0}}, 2);
    CHECK(h.states.at("x1")[1] == doctest::Approx(0.0));
    CHECK(h.states.at("x2")[1] == doctest::Approx(1.0));
    CHECK(h.states.at("x1")[2] == doctest::Approx(-1.0));

    const JetValues z = taylor_coefficients(registry_entry("harmonic").model, {{"a", 2.0}, {"b", 3.0}},
                                            {{"x1", 0.2}, {"x2", 0.7}}, 0);
    CHECK(z.states.at("x1") == std::vector<double>{0.2});
    CHECK(z.outputs.at("y2") == std::vector<double>{0.7});
}

TEST_CASE("biohydrogenation records the cleared denominators") {
    const OdeModel& m = registry_entry("biohydrogenation").model;
    const ProlongedSystem ps = prolong(m, default_orders(m));
    std::vector<std::string> printed;
    for (const auto& s : ps.side_conditions()) printed.push_back(to_string(ps.to_expr(s)));
    bool found = false;
    for (const auto& s : ps.side_conditions()) {
        const double v1 = eval_expr(ps.to_expr(s), {{"k6", 0.3}, {"x4[0]", 0.5}, {"k8", 0.1}, {"x5[0]", 0.2},
                                                   {"x6[0]", 0.4}, {"k10", 0.7}});
        const double v2 = eval_expr(ps.to_expr(s), {{"k6", 0.9}, {"x4[0]", 0.2}, {"k8", 0.1}, {"x5[0]", 0.2},
                                                   {"x6[0]", 0.4}, {"k10", 0.7}});
        if (std::abs(v1 - 0.8) < 1e-12 && std::abs(v2 - 1.1) < 1e-12) found = true;
    }
    CHECK_MESSAGE(found, "k6 + x4 side condition missing");
    const auto absent = ps.absent_unknowns();
    CHECK(std::find(absent.begin(), absent.end(), "x7") != absent.end());
}

TEST_CASE("prolonged equations vanish at the exact jets of every registry model") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> draw(0.1, 0.9);
    for (const auto& entry : registry()) {
        const OdeModel& m = entry.model;
        const ProlongedSystem ps = prolong(m, default_orders(m));
        std::map<std::string, double> params;
        std::map<std::string, double> x0;
        for (const auto& p : m.parameters()) params[p] = draw(rng);
        for (const auto& x : m.states()) x0[x] = draw(rng);
        const std::vector<double> values = variable_values(ps, m, params, x0, 0.0);
        const JetValues jets = taylor_coefficients(m, params, x0, 12);
        std::span<const double> vals(values);
        auto rel = [&](const RationalPolynomial& p) {
            const auto pd = p.map_coefficients<double>([](const Rational& c) { return to_double(c); });
            double scale = 0;
            for (const auto& [mono, c] : pd.terms()) {
                double t = std::abs(c);
                for (const auto& [v, e] : mono.factors()) t *= std::pow(std::abs(vals[static_cast<std::size_t>(v)]), e);
                scale += t;
            }
            return std::abs(pd.evaluate(vals)) / (scale + 1e-300);
        };
        for (const auto& e : ps.output_equations()) {
            const RationalPolynomial eq =
                e.denominator * RationalPolynomial(Rational(0)) + e.numerator;
            const auto num = e.numerator.map_coefficients<double>([](const Rational& c) { return to_double(c); });
            const auto den = e.denominator.map_coefficients<double>([](const Rational& c) { return to_double(c); });
            const double predicted = num.evaluate(vals) / den.evaluate(vals);
            const double truth = jets.outputs.at(e.output)[static_cast<std::size_t>(e.order)];
            CHECK_MESSAGE(std::abs(predicted - truth) <= 1e-9 * (1 + std::abs(truth)),
                          entry.name << " " << e.output << "^(" << e.order << ")");
            (void)eq;
        }
        for (const auto& c : ps.jet_constraints()) {
            const RationalPolynomial eq =
                c.denominator * RationalPolynomial::variable(ps.variable_index(jet_name(c.state, c.order))) -
                c.numerator;
            CHECK_MESSAGE(rel(eq) <= 1e-12, entry.name << " " << c.state << "[" << c.order << "]");
        }
        for (const auto& a : ps.aux_relations())
            CHECK_MESSAGE(rel(a.relation) <= 1e-12, entry.name << " " << a.aux << "[" << a.order << "]");
    }
}
