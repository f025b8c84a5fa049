#include "paramest/odeint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include <boost/numeric/odeint.hpp>

#include "paramest/errors.hpp"

namespace paramest {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

// Slots: states, parameters, inputs, time.
class Rhs {
public:
    Rhs(const OdeModel& m, const std::map<std::string, double>& params, const InputSignals& inputs)
        : n_(m.states().size()), p_(m.parameters().size()), q_(m.inputs().size()) {
        auto slot_of = [&](const std::string& s) -> int {
            if (s == time_symbol) return static_cast<int>(n_ + p_ + q_);
            if (int i = m.state_index(s); i >= 0) return i;
            if (int i = m.parameter_index(s); i >= 0) return static_cast<int>(n_) + i;
            if (int i = m.input_index(s); i >= 0) return static_cast<int>(n_ + p_) + i;
            return -1;
        };
        for (const auto& f : m.state_rhs()) f_.emplace_back(f, slot_of);
        for (const auto& g : m.output_rhs()) g_.emplace_back(g, slot_of);
        slots_.assign(n_ + p_ + q_ + 1, 0.0);
        for (std::size_t i = 0; i < p_; ++i) {
            const auto it = params.find(m.parameters()[i]);
            if (it == params.end()) throw ModelError("missing value for parameter '" + m.parameters()[i] + "'");
            slots_[n_ + i] = it->second;
        }
        for (std::size_t i = 0; i < q_; ++i) {
            const auto it = inputs.find(m.inputs()[i]);
            if (it == inputs.end()) throw ModelError("no signal for input '" + m.inputs()[i] + "'");
            signals_.push_back(it->second);
        }
    }

    void operator()(const State& x, State& dxdt, double t) {
        load(x, t);
        for (std::size_t i = 0; i < n_; ++i) dxdt[i] = f_[i].run<double>(slots_);
        for (double v : dxdt)
            if (!std::isfinite(v)) throw PoleError("non-finite derivative");
        ++evaluations_;
    }

    std::vector<double> outputs(const State& x, double t) {
        load(x, t);
        std::vector<double> y;
        for (const auto& g : g_) y.push_back(g.run<double>(slots_));
        return y;
    }

    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    void load(const State& x, double t) {
        std::copy(x.begin(), x.end(), slots_.begin());
        for (std::size_t i = 0; i < q_; ++i) slots_[n_ + p_ + i] = signals_[i](t);
        slots_[n_ + p_ + q_] = t;
    }

    std::size_t n_;
    std::size_t p_;
    std::size_t q_;
    std::vector<ExprProgram> f_;
    std::vector<ExprProgram> g_;
    std::vector<std::function<double(double)>> signals_;
    std::vector<double> slots_;
    std::size_t evaluations_ = 0;
};

struct BudgetExceeded {};

// Integrates from t0 through the (monotone) times, storing states per time.
void sweep(Rhs& rhs, State x, double t0, const std::vector<double>& times, std::vector<State>& out,
           const IntegratorConfig& cfg) {
    // dense output cannot be sampled at t0 before the first step
    auto first = times.begin();
    while (first != times.end() && *first == t0) {
        out.push_back(x);
        ++first;
    }
    if (first == times.end()) return;
    std::vector<double> grid;
    grid.push_back(t0);
    grid.insert(grid.end(), first, times.end());
    const double span = std::abs(times.back() - t0);
    const double dt0 = (times.back() >= t0 ? 1.0 : -1.0) * std::max(span, 1e-3) * 1e-3;

    double last_good = t0;
    std::size_t k = 0;
    auto observer = [&](const State& s, double t) {
        for (double v : s)
            if (!std::isfinite(v)) throw IntegrationError("non-finite state", last_good);
        last_good = t;
        if (k > 0) out.push_back(s);
        ++k;
    };
    const std::size_t budget = cfg.max_steps;
    auto guarded = [&](const State& s, State& d, double t) {
        if (rhs.evaluations() > 12 * budget) throw BudgetExceeded{};
        rhs(s, d, t);
    };
    auto stepper = odeint::make_dense_output(cfg.absolute_tolerance, cfg.relative_tolerance,
                                             odeint::runge_kutta_dopri5<State>());
    try {
        odeint::integrate_times(stepper, guarded, x, grid.begin(), grid.end(), dt0, observer);
    } catch (const IntegrationError&) {
        throw;
    } catch (const PoleError& e) {
        throw IntegrationError(std::string("pole: ") + e.what(), last_good);
    } catch (const BudgetExceeded&) {
        throw IntegrationError("step budget exhausted", last_good);
    } catch (const std::exception& e) {
        throw IntegrationError(e.what(), last_good);
    }
    if (out.size() < times.size()) throw IntegrationError("integration stopped early", last_good);
}

}  // namespace

Trajectory simulate(const OdeModel& m, const std::map<std::string, double>& params,
                    const std::map<std::string, double>& x_init, double t_start, const std::vector<double>& t_eval,
                    const IntegratorConfig& config, const InputSignals& inputs) {
    if (!(config.relative_tolerance > 0 && config.relative_tolerance < 1 && config.absolute_tolerance > 0 &&
          config.absolute_tolerance < 1))
        throw std::invalid_argument("integrator tolerances must lie in (0, 1)");
    if (!std::is_sorted(t_eval.begin(), t_eval.end())) throw std::invalid_argument("simulate: t_eval must be sorted");
    Rhs rhs(m, params, inputs);
    State x0;
    for (const auto& s : m.states()) {
        const auto it = x_init.find(s);
        if (it == x_init.end()) throw ModelError("missing initial value for '" + s + "'");
        if (!std::isfinite(it->second)) throw IntegrationError("non-finite initial value", t_start);
        x0.push_back(it->second);
    }

    std::vector<double> backward;
    std::vector<double> forward;
    for (double t : t_eval) (t < t_start ? backward : forward).push_back(t);
    std::reverse(backward.begin(), backward.end());
    std::vector<State> back_states;
    std::vector<State> fwd_states;
    sweep(rhs, x0, t_start, backward, back_states, config);
    sweep(rhs, x0, t_start, forward, fwd_states, config);
    std::reverse(back_states.begin(), back_states.end());

    Trajectory tr;
    tr.times = t_eval;
    const auto rows = static_cast<Eigen::Index>(t_eval.size());
    tr.states.resize(rows, static_cast<Eigen::Index>(m.states().size()));
    tr.outputs.resize(rows, static_cast<Eigen::Index>(m.outputs().size()));
    Eigen::Index r = 0;
    for (const auto* part : {&back_states, &fwd_states}) {
        for (const auto& s : *part) {
            for (std::size_t i = 0; i < s.size(); ++i) tr.states(r, static_cast<Eigen::Index>(i)) = s[i];
            std::vector<double> y;
            try {
                y = rhs.outputs(s, tr.times[static_cast<std::size_t>(r)]);
            } catch (const PoleError& e) {
                throw IntegrationError(std::string("pole in output: ") + e.what(), tr.times[static_cast<std::size_t>(r)]);
            }
            for (std::size_t k = 0; k < y.size(); ++k) tr.outputs(r, static_cast<Eigen::Index>(k)) = y[k];
            ++r;
        }
    }
    return tr;
}

double candidate_error(const OdeModel& m, const std::map<std::string, double>& params,
                       const std::map<std::string, double>& x_init, const TimeSeries& data, double t_anchor,
                       const IntegratorConfig& config, const InputSignals& inputs) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (const auto& [k, v] : params)
        if (!std::isfinite(v)) return inf;
    for (const auto& [k, v] : x_init)
        if (!std::isfinite(v)) return inf;
    Trajectory tr;
    try {
        tr = simulate(m, params, x_init, t_anchor, data.times, config, inputs);
    } catch (const IntegrationError&) {
        return inf;
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t o = 0; o < m.outputs().size(); ++o) {
        const auto it = data.values.find(m.outputs()[o]);
        if (it == data.values.end()) throw ModelError("data has no column for output '" + m.outputs()[o] + "'");
        const auto& y = it->second;
        double ms = 0.0;
        for (double v : y) ms += v * v;
        double rms = std::sqrt(ms / static_cast<double>(y.size()));
        if (rms == 0.0) rms = 1.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double d = (tr.outputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o)) - y[i]) / rms;
            sum += d * d;
            ++count;
        }
    }
    const double e = std::sqrt(sum / static_cast<double>(std::max<std::size_t>(count, 1)));
    return std::isfinite(e) ? e : inf;
}

TimeSeries generate_data(const OdeModel& m, const std::map<std::string, double>& params,
                         const std::map<std::string, double>& x_init, const std::vector<double>& times,
                         const IntegratorConfig& config, const InputSignals& inputs) {
    if (times.empty()) throw std::invalid_argument("generate_data: no times");
    const Trajectory tr = simulate(m, params, x_init, times.front(), times, config, inputs);
    TimeSeries ts;
    ts.times = times;
    for (std::size_t o = 0; o < m.outputs().size(); ++o) {
        std::vector<double> col(times.size());
        for (std::size_t i = 0; i < times.size(); ++i)
            col[i] = tr.outputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o));
        ts.values[m.outputs()[o]] = std::move(col);
    }
    return ts;
}

}  // namespace paramest
