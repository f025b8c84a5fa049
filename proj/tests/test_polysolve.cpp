#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "paramest/errors.hpp"
#include "paramest/homotopy.hpp"
#include "paramest/polysystem.hpp"
#include "paramest/registry.hpp"
#include "resultant_oracle.hpp"

using namespace paramest;

namespace {

ComplexPolynomial var(int i) { return ComplexPolynomial::variable(i); }
ComplexPolynomial num(double c) { return ComplexPolynomial(Complex(c, 0.0)); }

PolynomialSystem numeric(std::vector<std::string> vars, std::vector<ComplexPolynomial> polys) {
    PolynomialSystem s;
    s.variables = std::move(vars);
    s.polys = std::move(polys);
    return s;
}

bool contains(const SolutionSet& set, std::vector<double> point, double tol) {
    for (const auto& s : set.solutions) {
        bool ok = true;
        for (std::size_t i = 0; i < point.size(); ++i)
            if (std::abs(s.point[static_cast<Eigen::Index>(i)] - point[i]) > tol) ok = false;
        if (ok) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("x^2 - 1 has two real roots") {
    const auto sys = numeric({"x"}, {var(0) * var(0) - num(1)});
    const SolutionSet set = solve_total_degree(sys);
    CHECK(set.paths_tracked == 2);
    REQUIRE(set.solutions.size() == 2);
    CHECK(set.real_count() == 2);
    CHECK(contains(set, {1.0}, 1e-10));
    CHECK(contains(set, {-1.0}, 1e-10));
}

TEST_CASE("circle and hyperbola") {
    const auto sys = numeric({"x", "y"}, {var(0) * var(0) + var(1) * var(1) - num(5), var(0) * var(1) - num(2)});
    const SolutionSet set = solve_total_degree(sys);
    CHECK(set.paths_tracked == 4);
    REQUIRE(set.solutions.size() == 4);
    for (auto p : std::vector<std::vector<double>>{{1, 2}, {2, 1}, {-1, -2}, {-2, -1}}) CHECK(contains(set, p, 1e-10));
    for (const auto& s : set.solutions) {
        CHECK(s.real);
        CHECK(s.polished);
        CHECK(s.residual < 1e-14);
    }
}

TEST_CASE("newton_refine converges to sqrt 2") {
    const auto sys = numeric({"x"}, {var(0) * var(0) - num(2)});
    Eigen::VectorXcd x0(1);
    x0[0] = 1.4;
    const NewtonResult r = newton_refine(sys, x0);
    CHECK(r.converged);
    CHECK(std::abs(r.point[0] - std::sqrt(2.0)) < 1e-14);
}

TEST_CASE("newton_refine flags a singular Jacobian") {
    const auto sys = numeric({"x", "y"}, {var(0) + var(1) - num(1), num(2) * var(0) + num(2) * var(1) - num(2)});
    Eigen::VectorXcd x0(2);
    x0 << 0.3, 0.1;
    CHECK_FALSE(newton_refine(sys, x0).converged);
}

TEST_CASE("side conditions remove spurious roots") {
    auto sys = numeric({"x"}, {var(0) * (var(0) - num(3))});
    sys.side_conditions.push_back(var(0));
    const SolutionSet set = solve_total_degree(sys);
    REQUIRE(set.solutions.size() == 1);
    CHECK(std::abs(set.solutions[0].point[0] - 3.0) < 1e-10);
}

TEST_CASE("total degree matches the resultant oracle on random dense systems") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const auto [f, g] = testing::random_dense_pair(rng, 3);
        const auto oracle = testing::resultant_solutions(f, g);
        const auto sys = numeric({"x", "y"}, {f, g});
        const SolutionSet set = solve_total_degree(sys);
        CHECK(set.paths_tracked == sys.bezout_number());
        REQUIRE(set.solutions.size() == oracle.size());
        for (const auto& o : oracle) {
            bool hit = false;
            for (const auto& s : set.solutions)
                if (std::abs(s.point[0] - o[0]) <= 1e-6 * std::max(1.0, std::abs(o[0])) &&
                    std::abs(s.point[1] - o[1]) <= 1e-6 * std::max(1.0, std::abs(o[1])))
                    hit = true;
            CHECK(hit);
        }
    }
}

TEST_CASE("monodromy solve agrees with total degree") {
    std::mt19937_64 rng(7);
    const auto [f, g] = testing::random_dense_pair(rng, 3);
    const auto sys = numeric({"x", "y"}, {f, g});
    TrackerConfig cfg;
    cfg.max_total_degree_paths = 1;
    const SolutionSet mono = solve(sys, cfg);
    CHECK(mono.method == "monodromy");
    const SolutionSet td = solve_total_degree(sys);
    REQUIRE(mono.solutions.size() == td.solutions.size());
    for (const auto& s : td.solutions) {
        bool hit = false;
        for (const auto& m : mono.solutions)
            if ((m.point - s.point).norm() < 1e-8) hit = true;
        CHECK(hit);
    }
}

TEST_CASE("presolve eliminates affine equations and lifts back") {
    // x - 2y - 1 = 0, y^2 - 4 = 0, x*y - z = 0
    const auto sys = numeric({"x", "y", "z"},
                             {var(0) - num(2) * var(1) - num(1), var(1) * var(1) - num(4), var(0) * var(1) - var(2)});
    const ReducedSystem r = presolve(sys);
    CHECK(r.system.unknown_count() < 3);
    const ReducedSystem d = eliminate_dangling(r.system);
    const Reduction all = compose(r.reduction, d.reduction);
    REQUIRE(d.system.unknown_count() == 1);
    CHECK(d.system.variables[0] == "x");
    const SolutionSet set = solve_total_degree(d.system);
    REQUIRE(set.solutions.size() == 2);
    for (const auto& s : set.solutions) {
        const Eigen::VectorXcd full = all.lift(s.point);
        CHECK(scaled_residual(sys.polys, full) < 1e-14);
    }
}

TEST_CASE("square_system drops the dependent equation") {
    // Three equations, two unknowns; the second is a multiple of the first.
    const auto sys = numeric({"x", "y"}, {var(0) + var(1), num(2) * var(0) + num(2) * var(1), var(0) * var(1) - num(1)});
    const SquaringResult sq = square_system(sys);
    REQUIRE(sq.selected.size() == 2);
    CHECK(sq.selected[0] == 0);
    CHECK(sq.selected[1] == 2);
    CHECK(sq.system.residual_polys.size() == 3);
}

TEST_CASE("square_system reports rank deficiency") {
    const auto sys = numeric({"x", "y"}, {var(0) + var(1), var(0) * var(0) + num(2) * var(0) * var(1) + var(1) * var(1)});
    CHECK_THROWS_AS(square_system(sys), RankDeficiencyError);
}

TEST_CASE("toy estimation system") {
    const OdeModel m = example_model();
    const ProlongedSystem ps = prolong(m, {{"y1", 2}});
    const PolynomialSystem par = build_parametric_system(ps);
    CHECK(par.polys.size() == 5);
    CHECK(par.unknown_count() == 4);
    CHECK(par.data_symbols == std::vector<std::string>{"y1^(0)", "y1^(1)", "y1^(2)"});

    const std::map<JetKey, double> est{{{"y1", 0}, 2.0}, {{"y1", 1}, -1.5}, {{"y1", 2}, 1.25}};
    const PolynomialSystem sys = build_estimation_system(ps, est, {}, 0.0);
    CHECK(sys.data_count() == 0);
    const SquaringResult sq = square_system(sys);
    CHECK(sq.selected.size() == 4);
    const SolutionSet set = solve_total_degree(sq.system);
    // y'' is dropped, so mu = 0.25, x = -2 survives next to the true root.
    const int mu = sys.variable_index("mu");
    const int x0 = sys.variable_index("x[0]");
    bool first = false;
    bool second = false;
    for (const auto& s : set.solutions) {
        if (std::abs(s.point[mu] - 0.5) < 1e-9 && std::abs(s.point[x0] - 1.0) < 1e-9) first = true;
        if (std::abs(s.point[mu] - 0.25) < 1e-9 && std::abs(s.point[x0] + 2.0) < 1e-9) second = true;
    }
    CHECK(first);
    CHECK(second);
}
