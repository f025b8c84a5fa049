#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "paramest/poly.hpp"
#include "paramest/prolongation.hpp"

namespace paramest {

using Complex = std::complex<double>;

/// Polynomials in unknowns (indices 0..n-1) and, optionally, data symbols
/// (indices n..n+m-1) that parametrize a family of systems. Systems with no
/// data symbols are plain numeric systems.
struct PolynomialSystem {
    std::vector<std::string> variables;
    std::vector<std::string> data_symbols;
    std::vector<ComplexPolynomial> polys;
    std::vector<std::string> labels;
    /// Must not vanish at a solution (cleared denominators).
    std::vector<ComplexPolynomial> side_conditions;
    /// The overdetermined system residuals are measured against; empty
    /// means polys.
    std::vector<ComplexPolynomial> residual_polys;
    /// Unknowns and data are stored divided by these factors (unknowns, then
    /// data); empty means all ones. Estimation systems store jets and
    /// derivative estimates as Taylor coefficients, x^(j) / j!.
    std::vector<double> scales;

    std::size_t unknown_count() const noexcept { return variables.size(); }
    std::size_t data_count() const noexcept { return data_symbols.size(); }
    bool is_square() const noexcept { return polys.size() == variables.size(); }
    const std::vector<ComplexPolynomial>& residual_system() const noexcept {
        return residual_polys.empty() ? polys : residual_polys;
    }
    int variable_index(const std::string& name) const;

    /// Total degree of each polynomial in the unknowns.
    std::vector<int> degrees() const;
    /// Product of degrees; saturates at 2^62.
    std::uint64_t bezout_number() const;

    /// The numeric system at the given (stored, i.e. scaled) data values.
    PolynomialSystem instantiate(const Eigen::VectorXcd& data) const;

    double scale_of(std::size_t index) const { return scales.empty() ? 1.0 : scales[index]; }
    /// Unknown values in natural units.
    Eigen::VectorXcd unscaled(const Eigen::VectorXcd& stored) const;
};

/// Unknown-degree of one polynomial (data symbols do not count).
int unknown_degree(const ComplexPolynomial& p, std::size_t unknowns);

/// Max over polys of |p(x)| / sum_t |c_t| prod_i max(1, |x_i|)^a_ti.
double scaled_residual(const std::vector<ComplexPolynomial>& polys, const Eigen::VectorXcd& point);
double scaled_value(const ComplexPolynomial& p, const Eigen::VectorXcd& point);

/// Key of a derivative estimate: (output name, order).
using JetKey = std::pair<std::string, int>;

/// Symbol of the estimate of y^{(k)}: "y1^(k)".
std::string estimate_symbol(const std::string& output, int order);

/// Output equations become den*estimate - num, jet constraints den*x[j] - num,
/// aux relations stay as they are. Order: jet constraints (ascending order),
/// aux relations, then output equations by ascending derivative order.
/// Estimates, input jets, and time are data symbols.
PolynomialSystem build_parametric_system(const ProlongedSystem& ps);

/// Stored data values for build_parametric_system in data_symbols order.
Eigen::VectorXcd data_vector(const PolynomialSystem& parametric, const std::map<JetKey, double>& jet_estimates,
                             const std::map<std::string, std::vector<double>>& input_jets, double t_eval);

/// The numeric system with every estimate substituted.
PolynomialSystem build_estimation_system(const ProlongedSystem& ps, const std::map<JetKey, double>& jet_estimates,
                                         const std::map<std::string, std::vector<double>>& input_jets, double t_eval);

/// Variable elimination that can be undone numerically.
struct Reduction {
    struct Step {
        int variable;               // index in the original unknowns
        ComplexPolynomial numerator;    // over original unknowns + data
        ComplexPolynomial denominator;  // value = numerator / denominator
    };
    std::vector<Step> steps;        // in elimination order
    std::vector<int> kept;          // original index of each reduced unknown
    std::size_t original_unknowns = 0;
    std::size_t data = 0;

    /// Full unknown vector from a reduced one (data values needed when the
    /// system is parametric).
    Eigen::VectorXcd lift(const Eigen::VectorXcd& reduced, const Eigen::VectorXcd& data_values = {}) const;
    Eigen::VectorXcd restrict(const Eigen::VectorXcd& full) const;
};

struct ReducedSystem {
    PolynomialSystem system;
    Reduction reduction;
};

/// Repeatedly removes an unknown from an equation that is affine in the
/// unknowns (with a numeric pivot coefficient) by substitution into every
/// other equation. Equations that become constant stay in the system.
ReducedSystem presolve(const PolynomialSystem& sys);

/// Removes unknowns that occur in exactly one equation, linearly; the pair
/// does not constrain the remaining unknowns. Applied to a square system it
/// keeps it square.
ReducedSystem eliminate_dangling(const PolynomialSystem& sys);

/// Composition: first `outer` then `inner` (inner acts on outer's result).
Reduction compose(const Reduction& outer, const Reduction& inner);

struct SquaringResult {
    PolynomialSystem system;              // square
    std::vector<std::size_t> selected;    // indices into the input polys
};

/// Greedy selection of equations increasing the numeric Jacobian rank (SVD,
/// sigma_min > 1e-10 sigma_max) at up to trial_points random complex points.
/// Throws RankDeficiencyError if full rank is not reached.
SquaringResult square_system(const PolynomialSystem& sys, int trial_points = 3, std::uint64_t seed = 1);

/// Numeric rank of the Jacobian (w.r.t. the unknowns) of the given
/// polynomials at a point.
int jacobian_rank(const std::vector<ComplexPolynomial>& polys, std::size_t unknowns, const Eigen::VectorXcd& point);

}  // namespace paramest
