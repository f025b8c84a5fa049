#pragma once

#include <Eigen/Dense>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "paramest/homotopy.hpp"
#include "paramest/model.hpp"
#include "paramest/polysystem.hpp"
#include "paramest/prolongation.hpp"

namespace paramest {

/// A unknown/data point satisfying every equation of a parametric system
/// whose equations are labelled by the symbol they define (jet constraints,
/// aux relations, output equations). Undefined symbols take their value from
/// fixed (by name, stored units) or are drawn at random.
struct ConsistentPoint {
    Eigen::VectorXcd unknowns;
    Eigen::VectorXcd data;
};
ConsistentPoint consistent_point(const PolynomialSystem& parametric, std::mt19937_64& rng,
                                 const std::map<std::string, Complex>& fixed = {});

/// Everything about an estimation system that does not depend on the data:
/// prolongation orders, the squared and reduced parametric system, and all
/// its solutions at one generic data point.
class SystemTemplate {
public:
    SystemTemplate(const OdeModel& m, const std::map<std::string, int>& orders, const TrackerConfig& config = {});

    const ProlongedSystem& prolonged() const noexcept { return prolonged_; }
    const PolynomialSystem& parametric() const noexcept { return parametric_; }
    const PolynomialSystem& square() const noexcept { return square_; }
    const Reduction& reduction() const noexcept { return reduction_; }
    const std::map<std::string, int>& orders() const noexcept { return orders_; }
    /// Non-constant equations of the presolved system left out by squaring.
    std::size_t surplus() const noexcept { return surplus_; }
    std::uint64_t bezout_number() const noexcept { return square_.bezout_number(); }

    /// Solves the square system at generic data (cached).
    void prepare() const;
    std::size_t generic_solution_count() const;
    const std::string& generic_method() const noexcept { return generic_method_; }

    /// All solutions at the given data, as full unknown vectors of
    /// parametric(), scored against the full system at that data.
    SolutionSet solve(const Eigen::VectorXcd& data) const;

private:
    std::map<std::string, int> orders_;
    ProlongedSystem prolonged_;
    PolynomialSystem parametric_;
    PolynomialSystem square_;
    Reduction reduction_;
    std::size_t surplus_ = 0;
    TrackerConfig config_;

    mutable bool prepared_ = false;
    mutable Eigen::VectorXcd generic_data_;
    mutable std::vector<Eigen::VectorXcd> generic_solutions_;
    mutable std::string generic_method_;
};

/// Starts at the given orders (default: 1 for every output) and raises them
/// one output at a time (round robin) until squaring reaches full rank with
/// at least one surplus equation, up to n + p + 2. Throws RankDeficiencyError
/// otherwise.
SystemTemplate make_template(const OdeModel& m, const TrackerConfig& config = {},
                             std::map<std::string, int> orders = {});

}  // namespace paramest
