#include <cmath>
#include <random>

#include "doctest.h"
#include "paramest/errors.hpp"
#include "paramest/interpolation.hpp"

using namespace paramest;

namespace {
std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return t;
}

template <class F>
std::vector<double> sample(const std::vector<double>& t, F f) {
    std::vector<double> v;
    for (double x : t) v.push_back(f(x));
    return v;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
}  // namespace

TEST_CASE("AAA recovers a low-degree rational") {
    auto target = [](double t) { return (0.58 * t * t - 3.11 * t + 6.82) / (t + 3.41); };
    const auto t = linspace(0, 1, 21);
    const auto r = aaa_fit(t, sample(t, target));
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        const double x = 0.005 + 0.0099 * i;
        worst = std::max(worst, std::abs(r(x) - target(x)) / std::abs(target(x)));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("constant data") {
    const auto t = linspace(0, 1, 7);
    const std::vector<double> v(7, 3.25);
    for (const auto& r : {aaa_fit(t, v), fh_fit(t, v, 3)}) {
        CHECK(r(0.123) == doctest::Approx(3.25));
        const auto d = taylor_eval(r, 0.4, 5);
        CHECK(d[0] == doctest::Approx(3.25));
        for (std::size_t k = 1; k < d.size(); ++k) CHECK(std::abs(d[k]) < 1e-9);
    }
}

TEST_CASE("AAA on the four-point example data") {
    const std::vector<double> t{0.000, 0.333, 0.666, 1.000};
    const std::vector<double> y{2.000, 1.563, 1.229, 0.974};
    const auto r = aaa_fit(t, y);
    CHECK(r(0.0) == 2.0);
    const auto d = taylor_eval(r, 0.0, 2);
    CHECK(d[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(d[1] + 1.50) <= 2e-2);
    CHECK(std::abs(d[2] - 1.22) <= 2e-2);
}

TEST_CASE("Floater-Hormann reproduces polynomials") {
    const auto t = linspace(-1, 2, 10);
    const auto r = fh_fit(t, sample(t, [](double x) { return x * x * x; }), 3);
    for (int i = 0; i < 50; ++i) {
        const double x = -0.97 + 0.0591 * i;
        CHECK(std::abs(r(x) - x * x * x) <= 1e-12 * (1 + std::abs(x * x * x)));
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> c(-1, 1);
    for (int d = 0; d <= 8; ++d) {
        std::vector<double> coef(static_cast<std::size_t>(d) + 1);
        for (auto& v : coef) v = c(rng);
        auto p = [&](double x) {
            double acc = 0;
            for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * x + *it;
            return acc;
        };
        const auto ts = linspace(-0.5, 0.5, 21);
        const auto fh = fh_fit(ts, sample(ts, p), d);
        for (int i = 0; i < 30; ++i) {
            const double x = -0.49 + 0.0331 * i;
            CHECK(std::abs(fh(x) - p(x)) <= 1e-11);
        }
    }
}

TEST_CASE("Floater-Hormann with d = 0 interpolates two points") {
    const std::vector<double> t{0.0, 1.0};
    const std::vector<double> v{1.0, 3.0};
    const auto r = fh_fit(t, v, 0);
    CHECK(r(0.0) == 1.0);
    CHECK(r(1.0) == 3.0);
    CHECK(r(0.5) == doctest::Approx(2.0));
    CHECK_THROWS(fh_fit(t, v, 2));
}

namespace {
// Floater-Hormann by its definition: blend of the local degree-d
// interpolating polynomials with weights (-1)^i / prod (t - x_j).
double fh_blend(const std::vector<double>& x, const std::vector<double>& f, int d, double t) {
    const int n = static_cast<int>(x.size()) - 1;
    double num = 0;
    double den = 0;
    for (int i = 0; i <= n - d; ++i) {
        double lam = (i % 2 == 0) ? 1.0 : -1.0;
        for (int j = i; j <= i + d; ++j) lam /= (t - x[static_cast<std::size_t>(j)]);
        double p = 0;
        for (int k = i; k <= i + d; ++k) {
            double l = f[static_cast<std::size_t>(k)];
            for (int j = i; j <= i + d; ++j)
                if (j != k) l *= (t - x[static_cast<std::size_t>(j)]) / (x[static_cast<std::size_t>(k)] - x[static_cast<std::size_t>(j)]);
            p += l;
        }
        num += lam * p;
        den += lam;
    }
    return num / den;
}
}  // namespace

TEST_CASE("Floater-Hormann matches the blended-polynomial definition on the Runge function") {
    auto runge = [](double x) { return 1.0 / (1.0 + 25.0 * x * x); };
    const auto t = linspace(-0.5, 0.5, 21);
    const auto v = sample(t, runge);
    for (int d : {3, 6, 8}) {
        const auto r = fh_fit(t, v, d);
        for (int i = 0; i < 200; ++i) {
            const double x = -0.4987 + 0.00499 * i;
            CHECK(std::abs(r(x) - fh_blend(t, v, d, x)) <= 1e-12);
        }
    }
}

TEST_CASE("higher blending order is more accurate on a well-resolved function") {
    auto f = [](double x) { return 1.0 / (1.0 + x * x); };
    const auto t = linspace(-0.5, 0.5, 21);
    const auto v = sample(t, f);
    const auto r3 = fh_fit(t, v, 3);
    const auto r8 = fh_fit(t, v, 8);
    double e3 = 0;
    double e8 = 0;
    for (int i = 0; i < 200; ++i) {
        const double x = -0.4987 + 0.00499 * i;
        e3 = std::max(e3, std::abs(r3(x) - f(x)));
        e8 = std::max(e8, std::abs(r8(x) - f(x)));
    }
    CHECK(e8 < e3);
}

TEST_CASE("series derivatives of a fitted rational") {
    const auto t = linspace(0, 1, 21);
    const auto r = aaa_fit(t, sample(t, [](double x) { return 1.0 / (x + 2.0); }));
    const auto d = taylor_eval(r, 0.5, 4);
    double fact = 1;
    for (int k = 0; k <= 4; ++k) {
        if (k > 0) fact *= k;
        const double exact = (k % 2 == 0 ? 1.0 : -1.0) * fact / std::pow(2.5, k + 1);
        CHECK(std::abs(d[static_cast<std::size_t>(k)] - exact) <= 1e-7 * std::abs(exact));
    }
}

TEST_CASE("first derivative agrees with central differences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    const auto t = linspace(0, 1, 21);
    const auto v = sample(t, [](double x) { return std::exp(-x) * std::cos(3 * x); });
    for (const auto& r : {aaa_fit(t, v), fh_fit(t, v, 6)}) {
        for (int i = 0; i < 10; ++i) {
            double x = u(rng);
            const double h = 1e-5;
            const double fd = (r(x + h) - r(x - h)) / (2 * h);
            const double d1 = taylor_eval(r, x, 1)[1];
            CHECK(std::abs(d1 - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("interpolation condition and support-point derivatives") {
    const auto t = linspace(-0.5, 0.5, 21);
    const auto v = sample(t, [](double x) { return std::sin(2 * x) + 0.3; });
    for (const auto& r : {aaa_fit(t, v), fh_fit(t, v, 3), fh_fit(t, v, 8)}) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (r.weights[j] == 0.0) continue;
            CHECK(std::abs(r(r.support_points[j]) - r.support_values[j]) <= 1e-12 * (1 + std::abs(r.support_values[j])));
            const auto d = taylor_eval(r, r.support_points[j], 2);
            CHECK(std::abs(d[0] - r.support_values[j]) <= 1e-12 * (1 + std::abs(r.support_values[j])));
        }
    }
    // Derivatives at a support point are continuous with nearby values.
    const auto r = aaa_fit(t, v);
    const auto at = taylor_eval(r, 0.0, 3);
    const auto near = taylor_eval(r, 1e-7, 3);
    for (std::size_t k = 0; k <= 3; ++k) CHECK(rel_err(at[k], near[k]) < 1e-4);
    CHECK(std::abs(at[1] - 2.0) < 1e-8);
}

TEST_CASE("random type-(2,2) rationals are recovered") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> c(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const double a0 = c(rng), a1 = c(rng), a2 = c(rng);
        // Denominator without real roots near the interval.
        const double b1 = 0.5 * c(rng), b2 = 0.5 * c(rng);
        auto f = [&](double x) { return (a0 + a1 * x + a2 * x * x) / (1.5 + b1 * x + b2 * x * x); };
        const auto t = linspace(-0.5, 0.5, 21);
        const auto r = aaa_fit(t, sample(t, f));
        double worst = 0;
        double scale = 0;
        for (int i = 0; i < 100; ++i) {
            const double x = -0.4975 + 0.00995 * i;
            worst = std::max(worst, std::abs(r(x) - f(x)));
            scale = std::max(scale, std::abs(f(x)));
        }
        CHECK(worst <= 1e-9 * scale);
    }
}

TEST_CASE("nudging") {
    BarycentricInterpolant r{{0.0, 0.3, 1.0}, {1, 2, 3}, {1, -1, 1}};
    CHECK(nudge_eval_point(r, 0.0, 0.0, 1.0) == doctest::Approx(1e-6));
    CHECK(nudge_eval_point(r, 0.5, 0.0, 1.0) == 0.5);
    CHECK(nudge_eval_point(r, 1.0, 0.0, 1.0) == doctest::Approx(1.0 - 1e-6));
}

TEST_CASE("scheme names") {
    CHECK(parse_scheme("aaa").family == SchemeSpec::Family::aaa);
    CHECK(parse_scheme("fh6").d == 6);
    CHECK(parse_scheme("fh8").name() == "fh8");
    CHECK_THROWS(parse_scheme("spline"));
    CHECK(parse_scheme("aaa:1e-10").tol == 1e-10);
    CHECK(parse_scheme("aaa:1e-10").name() == "aaa:1e-10");
    CHECK(SchemeSpec::aaa().name() == "aaa");
    CHECK(parse_scheme(SchemeSpec::aaa(1e-9).name()).tol == 1e-9);
    CHECK_THROWS(parse_scheme("aaa:"));
    CHECK_THROWS(parse_scheme("aaa:2"));
    CHECK_THROWS(parse_scheme("aaa:1e-9x"));
    CHECK(default_schemes().size() == 4);
}
