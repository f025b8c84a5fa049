#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "paramest/homotopy.hpp"
#include "paramest/identifiability.hpp"
#include "paramest/interpolation.hpp"
#include "paramest/model.hpp"
#include "paramest/odeint.hpp"
#include "paramest/system_template.hpp"

namespace paramest {

/// Where the interpolants are differentiated.
enum class TEvalPolicy { first_sample, midpoint, explicit_time };

/// Closed interval for one parameter or initial state.
using Ranges = std::map<std::string, std::pair<double, double>>;

struct EstimationConfig {
    std::vector<SchemeSpec> schemes = default_schemes();
    TEvalPolicy t_eval_policy = TEvalPolicy::first_sample;
    double t_eval = 0.0;  // used with explicit_time
    TrackerConfig tracker;
    IntegratorConfig integrator;
    Ranges ranges;
    std::size_t identifiability_trials = 3;
    std::uint64_t seed = 1;
};

struct Candidate {
    std::map<std::string, double> parameters;
    /// States at the first data time.
    std::map<std::string, double> initial_conditions;
    double error = 0.0;
    std::string scheme;
};

struct SchemeDiagnostics {
    std::string scheme;
    double t_eval = 0.0;
    bool nudged = false;
    std::size_t solutions = 0;
    std::size_t real_solutions = 0;
    std::size_t paths_tracked = 0;
    std::size_t failed_paths = 0;
    std::string failure;  // empty when the scheme ran
};

struct EstimationDiagnostics {
    std::map<std::string, int> orders;
    /// Equations left out by squaring.
    std::size_t dropped_equations = 0;
    std::string solve_method;
    std::vector<SchemeDiagnostics> schemes;
    /// Unknowns that do not enter the estimation system; they are set to 0
    /// for simulation and not reported.
    std::vector<std::string> non_identifiable;
    std::size_t range_rejected = 0;
    /// Fewer than k candidates survived.
    bool short_of_k = false;
};

struct EstimationResult {
    /// Selected, ascending by error, at most k.
    std::vector<Candidate> candidates;
    std::size_t k = 1;
    double t_eval = 0.0;     // derivative evaluation time
    double t_initial = 0.0;  // time of initial_conditions (first sample)
    EstimationDiagnostics diagnostics;
    /// Every real solution from every scheme, deduplicated, before range
    /// filtering and selection.
    std::vector<Candidate> all_candidates;
};

/// Range filter, then ascending error (ties in lexicographic order of the
/// parameter and initial-state values), then the first min(k, n).
std::vector<Candidate> select_candidates(std::vector<Candidate> candidates, std::size_t k, const Ranges& ranges,
                                         bool* short_of_k = nullptr, std::size_t* rejected = nullptr);

/// Holds everything about a model that does not depend on the data (system
/// template and identifiability report), so repeated estimates on one model
/// solve only the parameter homotopies.
class Estimator {
public:
    explicit Estimator(const OdeModel& m, const EstimationConfig& config = {});

    const OdeModel& model() const noexcept { return model_; }
    const SystemTemplate& system_template() const noexcept { return *template_; }
    const IdentifiabilityReport& identifiability() const noexcept { return report_; }
    const EstimationConfig& config() const noexcept { return config_; }

    EstimationResult estimate(const TimeSeries& data) const;
    /// Same, with ranges replacing config().ranges.
    EstimationResult estimate(const TimeSeries& data, const Ranges& ranges) const;

private:
    OdeModel model_;
    EstimationConfig config_;
    std::unique_ptr<SystemTemplate> template_;
    IdentifiabilityReport report_;
};

EstimationResult estimate(const OdeModel& m, const TimeSeries& data, const EstimationConfig& config = {});

}  // namespace paramest
