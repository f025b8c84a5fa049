#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "paramest/polysystem.hpp"

namespace paramest {

struct TrackerConfig {
    double corrector_tol = 1e-12;   // final Newton polish
    double path_tol = 1e-9;         // corrector during tracking
    int max_corrector_iterations = 5;
    double initial_step = 0.1;
    double max_step = 0.1;
    double min_step = 1e-10;
    double divergence = 1e10;
    double real_tol = 1e-6;
    double dedupe_tol = 1e-8;
    double side_condition_tol = 1e-8;
    std::size_t max_steps = 20000;
    std::uint64_t seed = 42;
    std::size_t threads = 0;  // 0: hardware concurrency
    /// Above this Bezout number solve() switches to monodromy.
    std::uint64_t max_total_degree_paths = 4096;
    /// Same threshold when preparing generic solutions of an estimation
    /// system (monodromy is far cheaper there).
    std::uint64_t template_total_degree_paths = 64;
    int monodromy_stall_loops = 10;
    int monodromy_max_loops = 200;
};

struct Solution {
    Eigen::VectorXcd point;
    double residual = 0.0;  // scaled residual on the residual system
    bool real = false;
    bool polished = false;
};

struct SolutionSet {
    std::vector<Solution> solutions;
    std::size_t paths_tracked = 0;
    std::size_t failed_paths = 0;
    std::size_t diverged_paths = 0;
    std::string method;

    std::size_t real_count() const;
};

/// Flattened polynomials for repeated evaluation. The evaluation vector holds
/// unknowns followed by data values.
class CompiledSystem {
public:
    CompiledSystem(const std::vector<ComplexPolynomial>& polys, std::size_t unknowns, std::size_t data = 0);

    std::size_t size() const noexcept { return rows_; }
    std::size_t unknowns() const noexcept { return unknowns_; }
    std::size_t data() const noexcept { return data_; }

    void evaluate(const Complex* at, Eigen::VectorXcd& f) const;
    /// Jacobian with respect to the unknowns.
    void jacobian(const Complex* at, Eigen::MatrixXcd& j) const;
    /// Sum_l dF/dq_l * direction_l.
    void data_derivative(const Complex* at, const Eigen::VectorXcd& direction, Eigen::VectorXcd& out) const;

private:
    struct Term {
        Complex coefficient;
        std::uint32_t begin;
        std::uint32_t end;
    };
    struct Block {
        std::uint32_t row;
        std::uint32_t column;
        std::uint32_t begin;
        std::uint32_t end;
    };
    Complex eval_terms(std::uint32_t begin, std::uint32_t end, const Complex* at) const;
    void append(const ComplexPolynomial& p, std::uint32_t row, std::uint32_t column, std::vector<Block>& blocks);

    std::size_t rows_;
    std::size_t unknowns_;
    std::size_t data_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> factors_;
    std::vector<Term> terms_;
    std::vector<Block> values_;
    std::vector<Block> jacobian_;
    std::vector<Block> data_jacobian_;
};

struct NewtonResult {
    Eigen::VectorXcd point;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

/// Newton (Gauss-Newton for overdetermined systems) on a numeric system.
/// Stops when the update is below tol relative to the point; a singular
/// Jacobian ends the iteration unconverged.
NewtonResult newton_refine(const PolynomialSystem& sys, const Eigen::VectorXcd& point, double tol = 1e-12,
                           int max_iterations = 20);

/// Total-degree homotopy with random gamma on a square numeric system. One
/// path per Bezout start solution.
SolutionSet solve_total_degree(const PolynomialSystem& sys, const TrackerConfig& config = {});

/// Tracks the given solutions of parametric at data q_from to data q_to
/// along a straight segment; q_from should be generic complex.
SolutionSet track_parameter(const PolynomialSystem& parametric, const Eigen::VectorXcd& q_from,
                            const std::vector<Eigen::VectorXcd>& starts, const Eigen::VectorXcd& q_to,
                            const TrackerConfig& config = {});

struct MonodromyResult {
    Eigen::VectorXcd data;                     // the generic base data
    std::vector<Eigen::VectorXcd> solutions;   // all found at data
    std::size_t loops = 0;
    std::size_t paths_tracked = 0;
    std::size_t failed_paths = 0;
};

/// Populates the solution set of a square parametric system at generic data
/// by tracking known solutions around random loops in data space until no
/// new solutions appear for monodromy_stall_loops loops. Loop vertices come
/// from vertex_source when given, else from random multiplicative
/// perturbations of start_data.
using VertexSource = std::function<Eigen::VectorXcd(std::mt19937_64&)>;
MonodromyResult solve_monodromy(const PolynomialSystem& parametric, const Eigen::VectorXcd& start_point,
                                const Eigen::VectorXcd& start_data, const TrackerConfig& config = {},
                                const VertexSource& vertex_source = {});

/// Solutions of a square numeric system: total degree when the Bezout number
/// is at most config.max_total_degree_paths, otherwise monodromy on the
/// family F(x) = c followed by a parameter homotopy to c = 0.
SolutionSet solve(const PolynomialSystem& sys, const TrackerConfig& config = {});

}  // namespace paramest
