#include "paramest/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "paramest/errors.hpp"
#include "paramest/prolongation.hpp"

namespace paramest {

namespace {

std::vector<double> values_of(const Candidate& c) {
    std::vector<double> v;
    for (const auto& [k, x] : c.parameters) v.push_back(x);
    for (const auto& [k, x] : c.initial_conditions) v.push_back(x);
    return v;
}

bool better(const Candidate& a, const Candidate& b) {
    if (a.error != b.error) return a.error < b.error;
    const auto va = values_of(a);
    const auto vb = values_of(b);
    if (va != vb) return va < vb;
    return a.scheme < b.scheme;
}

bool in_ranges(const Candidate& c, const Ranges& ranges) {
    for (const auto& [name, range] : ranges) {
        double v;
        if (auto it = c.parameters.find(name); it != c.parameters.end())
            v = it->second;
        else if (auto jt = c.initial_conditions.find(name); jt != c.initial_conditions.end())
            v = jt->second;
        else
            continue;
        if (v < range.first || v > range.second) return false;
    }
    return true;
}

bool same_candidate(const Candidate& a, const Candidate& b, double tol) {
    const auto va = values_of(a);
    const auto vb = values_of(b);
    if (va.size() != vb.size()) return false;
    for (std::size_t i = 0; i < va.size(); ++i)
        if (std::abs(va[i] - vb[i]) > tol * std::max(std::abs(va[i]), std::abs(vb[i])) + 1e-12) return false;
    return true;
}

double pick_t_eval(const EstimationConfig& cfg, const TimeSeries& data) {
    switch (cfg.t_eval_policy) {
    case TEvalPolicy::first_sample: return data.times.front();
    case TEvalPolicy::midpoint: return 0.5 * (data.times.front() + data.times.back());
    case TEvalPolicy::explicit_time:
        if (cfg.t_eval < data.times.front() || cfg.t_eval > data.times.back())
            throw std::invalid_argument("explicit evaluation time lies outside the data span");
        return cfg.t_eval;
    }
    return data.times.front();
}

int input_jet_order(const ProlongedSystem& ps) {
    int top = -1;
    for (const auto& v : ps.variables())
        if (v.kind == ProlongedSystem::VariableKind::input_jet) top = std::max(top, v.order);
    return top;
}

}  // namespace

std::vector<Candidate> select_candidates(std::vector<Candidate> candidates, std::size_t k, const Ranges& ranges,
                                         bool* short_of_k, std::size_t* rejected) {
    if (k == 0) throw std::invalid_argument("select_candidates: k must be positive");
    const std::size_t before = candidates.size();
    std::erase_if(candidates, [&](const Candidate& c) { return !in_ranges(c, ranges); });
    if (rejected) *rejected = before - candidates.size();
    std::sort(candidates.begin(), candidates.end(), better);
    if (short_of_k) *short_of_k = candidates.size() < k;
    if (candidates.size() > k) candidates.resize(k);
    return candidates;
}

Estimator::Estimator(const OdeModel& m, const EstimationConfig& config) : model_(m), config_(config) {
    if (config_.schemes.empty()) throw std::invalid_argument("EstimationConfig: no interpolation schemes");
    try {
        template_ = std::make_unique<SystemTemplate>(make_template(model_, config_.tracker));
    } catch (const RankDeficiencyError& e) {
        throw EstimationError(std::string("estimation system stays rank deficient (model may be non-identifiable): ") +
                              e.what());
    }
    report_ = assess(*template_, model_, config_.identifiability_trials, config_.seed);
}

EstimationResult Estimator::estimate(const TimeSeries& data) const { return estimate(data, config_.ranges); }

EstimationResult Estimator::estimate(const TimeSeries& data, const Ranges& ranges) const {
    data.validate(2);
    for (const auto& y : model_.outputs())
        if (!data.values.count(y)) throw std::invalid_argument("data has no column for output '" + y + "'");
    for (const auto& u : model_.inputs())
        if (!data.values.count(u)) throw std::invalid_argument("data has no column for input '" + u + "'");

    const SystemTemplate& tmpl = *template_;
    const PolynomialSystem& parametric = tmpl.parametric();
    EstimationResult result;
    result.k = report_.k;
    result.t_eval = pick_t_eval(config_, data);
    result.t_initial = data.times.front();
    auto& diag = result.diagnostics;
    diag.orders = tmpl.orders();
    diag.dropped_equations = tmpl.surplus();
    diag.solve_method = tmpl.generic_method();
    diag.non_identifiable = report_.unknowns_of(UnknownClass::non_identifiable);

    const int input_order = input_jet_order(tmpl.prolonged());
    std::vector<Candidate> pool;

    for (const SchemeSpec& scheme : config_.schemes) {
        SchemeDiagnostics sd;
        sd.scheme = scheme.name();
        sd.t_eval = result.t_eval;
        try {
            std::map<std::string, BarycentricInterpolant> fits;
            for (const auto& [name, column] : data.values) {
                if (model_.output_index(name) < 0 && model_.input_index(name) < 0) continue;
                fits.emplace(name, fit(scheme, data.times, column));
            }
            std::map<JetKey, double> est;
            std::map<std::string, std::vector<double>> input_jets;
            auto evaluate_at = [&](double t) {
                est.clear();
                input_jets.clear();
                for (const auto& [y, order] : tmpl.orders()) {
                    const auto d = taylor_eval(fits.at(y), t, order);
                    for (int j = 0; j <= order; ++j) est[{y, j}] = d[static_cast<std::size_t>(j)];
                }
                if (input_order >= 0)
                    for (const auto& u : model_.inputs()) input_jets[u] = taylor_eval(fits.at(u), t, input_order);
            };
            try {
                evaluate_at(sd.t_eval);
            } catch (const PoleError&) {
                double t = sd.t_eval;
                for (const auto& [name, r] : fits) t = nudge_eval_point(r, t, data.times.front(), data.times.back());
                sd.t_eval = t;
                sd.nudged = true;
                evaluate_at(t);
            }

            const SolutionSet set = tmpl.solve(data_vector(parametric, est, input_jets, sd.t_eval));
            sd.solutions = set.solutions.size();
            sd.paths_tracked = set.paths_tracked;
            sd.failed_paths = set.failed_paths;

            InputSignals signals;
            for (const auto& u : model_.inputs()) {
                const BarycentricInterpolant r = fits.at(u);
                signals[u] = [r](double t) { return r(t); };
            }
            for (const auto& s : set.solutions) {
                if (!s.real) continue;
                ++sd.real_solutions;
                const Eigen::VectorXcd x = parametric.unscaled(s.point);
                Candidate c;
                c.scheme = sd.scheme;
                for (const auto& p : model_.parameters())
                    if (int i = parametric.variable_index(p); i >= 0) c.parameters[p] = x[i].real();
                for (const auto& st : model_.states())
                    if (int i = parametric.variable_index(jet_name(st, 0)); i >= 0)
                        c.initial_conditions[st] = x[i].real();
                std::map<std::string, double> params = c.parameters;
                std::map<std::string, double> x_init = c.initial_conditions;
                for (const auto& p : model_.parameters()) params.emplace(p, 0.0);
                for (const auto& st : model_.states()) x_init.emplace(st, 0.0);
                if (sd.t_eval != result.t_initial) {
                    try {
                        const Trajectory back =
                            simulate(model_, params, x_init, sd.t_eval, {result.t_initial}, config_.integrator, signals);
                        for (const auto& st : model_.states()) {
                            const double v = back.states(0, model_.state_index(st));
                            x_init[st] = v;
                            if (auto it = c.initial_conditions.find(st); it != c.initial_conditions.end()) it->second = v;
                        }
                    } catch (const IntegrationError&) {
                        continue;
                    }
                }
                c.error = candidate_error(model_, params, x_init, data, result.t_initial, config_.integrator, signals);
                if (!std::isfinite(c.error)) continue;
                pool.push_back(std::move(c));
            }
        } catch (const PoleError& e) {
            sd.failure = std::string("pole at the evaluation time: ") + e.what();
        } catch (const std::invalid_argument& e) {
            sd.failure = e.what();
        } catch (const RankDeficiencyError& e) {
            sd.failure = e.what();
        }
        diag.schemes.push_back(std::move(sd));
    }

    // merge across schemes, keeping the lower error of near-identical candidates
    std::sort(pool.begin(), pool.end(), better);
    for (auto& c : pool) {
        bool dup = false;
        for (const auto& kept : result.all_candidates) dup = dup || same_candidate(kept, c, 1e-4);
        if (!dup) result.all_candidates.push_back(c);
    }
    if (result.all_candidates.empty()) {
        std::ostringstream msg;
        msg << "no interpolation scheme produced a candidate with finite error";
        for (const auto& sd : diag.schemes) {
            msg << "; " << sd.scheme << ": ";
            if (!sd.failure.empty())
                msg << sd.failure;
            else
                msg << sd.solutions << " solutions, " << sd.real_solutions << " real";
        }
        throw EstimationError(msg.str());
    }
    result.candidates =
        select_candidates(result.all_candidates, result.k, ranges, &diag.short_of_k, &diag.range_rejected);
    return result;
}

EstimationResult estimate(const OdeModel& m, const TimeSeries& data, const EstimationConfig& config) {
    return Estimator(m, config).estimate(data);
}

}  // namespace paramest
