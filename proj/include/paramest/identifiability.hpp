#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "paramest/homotopy.hpp"
#include "paramest/model.hpp"
#include "paramest/system_template.hpp"

namespace paramest {

enum class UnknownClass { global, local, non_identifiable };

std::string_view to_string(UnknownClass c);

struct IdentifiabilityReport {
    /// Number of parameter-value solutions (mode over trials).
    std::size_t k = 0;
    /// Parameters and initial states (by state name).
    std::map<std::string, UnknownClass> classes;
    std::size_t trials = 0;
    std::map<std::string, int> orders;
    /// Solutions counted per trial; 0 marks a failed trial.
    std::vector<std::size_t> counts;
    /// Whether the drawn truth was among the counted solutions.
    std::vector<bool> truth_found;

    std::vector<std::string> unknowns_of(UnknownClass c) const;
};

/// Monte-Carlo solution count: per trial draws parameters and initial states
/// uniformly in [0.1, 0.9], builds exact jets, solves the estimation system and
/// counts distinct solutions whose full-system scaled residual is at most
/// residual_tol.
IdentifiabilityReport assess(const SystemTemplate& tmpl, const OdeModel& m, std::size_t trials = 3,
                             std::uint64_t seed = 1, double residual_tol = 1e-10);

/// Builds the template first (make_template); rank deficiency at every order
/// becomes an AssessmentError.
IdentifiabilityReport assess(const OdeModel& m, std::size_t trials = 3, std::uint64_t seed = 1,
                             const TrackerConfig& config = {});

/// Parametric-system data for the exact solution through (params, x_init) at t0.
Eigen::VectorXcd exact_data(const SystemTemplate& tmpl, const OdeModel& m, const std::map<std::string, double>& params,
                            const std::map<std::string, double>& x_init, double t0 = 0.0);

}  // namespace paramest
