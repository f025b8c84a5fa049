#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "paramest/model.hpp"

namespace paramest {

struct IntegratorConfig {
    double relative_tolerance = 1e-12;
    double absolute_tolerance = 1e-12;
    std::size_t max_steps = 1000000;
};

/// Row i holds the states (outputs) at times[i].
struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd states;
    Eigen::MatrixXd outputs;
};

/// Input name -> u(t). Required for every input of the model.
using InputSignals = std::map<std::string, std::function<double(double)>>;

/// Dormand-Prince 5(4) with dense output. Times before t_start are reached by
/// integrating backward. Throws IntegrationError on poles, non-finite states,
/// or when the step budget runs out.
Trajectory simulate(const OdeModel& m, const std::map<std::string, double>& params,
                    const std::map<std::string, double>& x_init, double t_start, const std::vector<double>& t_eval,
                    const IntegratorConfig& config = {}, const InputSignals& inputs = {});

/// RMS over outputs and data times of (yhat - y) / rms(y_output), with the
/// candidate's states given at t_anchor. Integration failure gives +inf.
double candidate_error(const OdeModel& m, const std::map<std::string, double>& params,
                       const std::map<std::string, double>& x_init, const TimeSeries& data, double t_anchor,
                       const IntegratorConfig& config = {}, const InputSignals& inputs = {});

/// Noise-free outputs at the given times, starting from x_init at times[0].
TimeSeries generate_data(const OdeModel& m, const std::map<std::string, double>& params,
                         const std::map<std::string, double>& x_init, const std::vector<double>& times,
                         const IntegratorConfig& config = {}, const InputSignals& inputs = {});

}  // namespace paramest
