#include <cmath>

#include "doctest.h"
#include "paramest/model.hpp"

using namespace paramest;

namespace {
const char* const harmonic_text = R"(states: x1, x2
parameters: a, b
equations:
  x1' = -a*x2
  x2' = x1/b
outputs:
  y1 = x1
  y2 = x2
)";
}

TEST_CASE("parse harmonic model") {
    const OdeModel m = parse_model(harmonic_text);
    CHECK(m.states() == std::vector<std::string>{"x1", "x2"});
    CHECK(m.parameters() == std::vector<std::string>{"a", "b"});
    CHECK(m.outputs() == std::vector<std::string>{"y1", "y2"});
    CHECK(eval_expr(m.rhs_of_state("x1"), {{"a", 2.0}, {"x2", 3.0}}) == doctest::Approx(-6.0));
    CHECK(eval_expr(m.rhs_of_state("x2"), {{"b", 4.0}, {"x1", 2.0}}) == doctest::Approx(0.5));
    CHECK(m.kind_of("t") == SymbolKind::time);
}

TEST_CASE("dsl round trip is idempotent") {
    const OdeModel m = parse_model(harmonic_text);
    const std::string once = to_dsl(m);
    const OdeModel again = parse_model(once);
    CHECK(to_dsl(again) == once);
    for (std::size_t i = 0; i < m.states().size(); ++i) CHECK(m.state_rhs()[i] == again.state_rhs()[i]);
}

TEST_CASE("round trip of nested expressions") {
    const char* exprs[] = {"a - (b - c)", "a/(b*c)", "(a/b)/c", "-x^2", "(-x)^2", "x^(-2)", "a*(b + c)*d",
                           "1/(k6 + x4)", "-(a - b)", "2.5*x - 0.125", "a - -b", "(a*b)^3/c"};
    for (const char* s : exprs) {
        const RationalExpr e = parse_expression(s);
        const std::string printed = to_string(e);
        const RationalExpr back = parse_expression(printed);
        CHECK_MESSAGE(back == e, s << " -> " << printed);
        const std::map<std::string, double> at{{"a", 1.3}, {"b", 0.7}, {"c", 2.1}, {"d", -0.4},
                                               {"x", 1.9}, {"k6", 0.3}, {"x4", 0.8}};
        CHECK(eval_expr(back, at) == doctest::Approx(eval_expr(e, at)));
    }
}

TEST_CASE("decimal literals stay exact") {
    const RationalExpr e = parse_expression("0.1 + 0.2");
    CHECK(simplify(e) == RationalExpr::constant(Rational(3, 10)));
}

TEST_CASE("parse errors carry position") {
    CHECK_THROWS_AS(parse_model("states: x\nequations:\n  x' = exp(x)\noutputs:\n  y = x\n"), ParseError);
    try {
        parse_model("states: x\nequations:\n  x' = exp(x)\noutputs:\n  y = x\n");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 8);
    }
    CHECK_THROWS_AS(parse_model("parameters: a\nequations:\noutputs:\n  y = a\n"), ParseError);
    CHECK_THROWS_AS(parse_model("states: x\nequations:\n  x' = -x\noutputs:\n"), ParseError);
    CHECK_THROWS_AS(parse_model("states: x\nequations:\n  x' = -q*x\noutputs:\n  y = x\n"), ParseError);
    CHECK_THROWS_AS(parse_model("states: x\nequations:\n  x' = -x\noutputs:\n  y = x\n  z = y\n"), ParseError);
    CHECK_THROWS_AS(parse_model("states: x\nequations:\n  x' = x/0\noutputs:\n  y = x\n"), ParseError);
    CHECK_THROWS_AS(parse_model("states: x, x\nequations:\n  x' = -x\noutputs:\n  y = x\n"), ParseError);
    CHECK_THROWS_AS(parse_model("states: x, y\nequations:\n  x' = -x\noutputs:\n  z = x\n"), ParseError);
    CHECK_THROWS_AS(parse_model("states: x\nequations:\n  x' = x^1.5\noutputs:\n  y = x\n"), ParseError);
}

TEST_CASE("derivative rules") {
    const RationalExpr e = parse_expression("x^3*y/(1 + x)");
    const RationalExpr d = diff_expr(e, "x");
    const double x = 0.7;
    const double y = 1.3;
    const double expected = (3 * x * x * y * (1 + x) - x * x * x * y) / ((1 + x) * (1 + x));
    CHECK(eval_expr(d, {{"x", x}, {"y", y}}) == doctest::Approx(expected));
    CHECK(diff_expr(e, "z").is_zero());
}

TEST_CASE("observable closure") {
    const OdeModel m = parse_model(
        "states: a, b, c\nequations:\n  a' = -a\n  b' = a - b\n  c' = b\noutputs:\n  y = b\n");
    CHECK(m.observable_states() == std::vector<std::string>{"a", "b"});
}
