#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace paramest {

/// r(t) = sum_j w_j f_j / (t - z_j) / sum_j w_j / (t - z_j).
struct BarycentricInterpolant {
    std::vector<double> support_points;
    std::vector<double> support_values;
    std::vector<double> weights;

    double operator()(double t) const;
    std::size_t size() const noexcept { return support_points.size(); }
};

struct SchemeSpec {
    enum class Family { aaa, floater_hormann };
    Family family = Family::aaa;
    double tol = 1e-13;     // AAA relative residual
    std::size_t mmax = 0;   // AAA max support size; 0 means all data points
    int d = 3;              // Floater-Hormann blending order

    static SchemeSpec aaa(double tol = 1e-13, std::size_t mmax = 0) { return {Family::aaa, tol, mmax, 0}; }
    static SchemeSpec floater_hormann(int d) { return {Family::floater_hormann, 0.0, 0, d}; }

    /// "aaa", "aaa:<tol>" when tol is not 1e-13, or "fh<d>"; parse_scheme
    /// accepts the same spellings.
    std::string name() const;
};

SchemeSpec parse_scheme(const std::string& text);

/// AAA with tol 1e-13, then Floater-Hormann with d = 3, 6, 8.
std::vector<SchemeSpec> default_schemes();

/// Greedy AAA fit: support points are added where the residual is largest and
/// weights come from the smallest right singular vector of the Loewner matrix.
BarycentricInterpolant aaa_fit(std::span<const double> times, std::span<const double> values, double tol = 1e-13,
                               std::size_t mmax = 0);

/// Floater-Hormann interpolant of blending order d on all data points.
BarycentricInterpolant fh_fit(std::span<const double> times, std::span<const double> values, int d);

BarycentricInterpolant fit(const SchemeSpec& scheme, std::span<const double> times, std::span<const double> values);

/// r^{(k)}(t) for k = 0..order, from the barycentric formula in truncated
/// power-series arithmetic. The formula is multiplied through by (t - z)
/// for the nearest support point z, so it stays exact at support points.
/// Throws PoleError when t is a pole of r.
std::vector<double> taylor_eval(const BarycentricInterpolant& r, double t, int order);

/// t unchanged if it is farther than 1e-8*span from every support point,
/// otherwise moved 1e-6*span away from the nearest one, inside [lo, hi].
double nudge_eval_point(const BarycentricInterpolant& r, double t, double lo, double hi);

}  // namespace paramest
