#include "paramest/identifiability.hpp"

#include <algorithm>
#include <cmath>

#include "paramest/errors.hpp"
#include "paramest/polysystem.hpp"
#include "paramest/prolongation.hpp"
#include "paramest/random.hpp"

namespace paramest {

namespace {

struct Probe {
    std::string name;
    int index;  // in the parametric unknowns, -1 when absent
};

std::vector<Probe> probes(const PolynomialSystem& parametric, const OdeModel& m) {
    std::vector<Probe> out;
    for (const auto& p : m.parameters()) out.push_back({p, parametric.variable_index(p)});
    for (const auto& s : m.states()) out.push_back({s, parametric.variable_index(jet_name(s, 0))});
    return out;
}

bool close(const std::vector<Complex>& a, const std::vector<Complex>& b, double tol) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol * std::max(1.0, std::abs(b[i]))) return false;
    return true;
}

Eigen::VectorXcd exact_jet_data(const PolynomialSystem& parametric, const std::map<std::string, int>& orders,
                                const OdeModel& m, const std::map<std::string, double>& params,
                                const std::map<std::string, double>& x_init, double t0) {
    int top = 0;
    for (const auto& [y, k] : orders) top = std::max(top, k);
    const JetValues jets = taylor_coefficients(m, params, x_init, top, t0);
    std::map<JetKey, double> est;
    for (const auto& [y, k] : orders)
        for (int j = 0; j <= k; ++j) est[{y, j}] = jets.outputs.at(y)[static_cast<std::size_t>(j)];
    return data_vector(parametric, est, {}, t0);
}

// Output jets predicted by the unknowns of a solution on a longer
// prolongation, compared with the exact ones.
class JetCheck {
public:
    JetCheck(const OdeModel& m, const std::map<std::string, int>& orders) {
        std::map<std::string, int> longer = orders;
        for (auto& [y, k] : longer) k += 2;
        orders_ = longer;
        system_ = build_parametric_system(prolong(m, longer));
        for (std::size_t e = 0; e < system_.labels.size(); ++e)
            for (std::size_t j = 0; j < system_.data_count(); ++j)
                if (system_.data_symbols[j] == system_.labels[e]) estimates_.push_back(j);
    }

    bool matches(const std::map<std::string, Complex>& unknowns, const OdeModel& m,
                 const std::map<std::string, double>& params, const std::map<std::string, double>& x_init,
                 double tol) const {
        const Eigen::VectorXcd exact = exact_jet_data(system_, orders_, m, params, x_init, 0.0);
        std::map<std::string, Complex> fixed = unknowns;
        for (std::size_t j = 0; j < system_.data_count(); ++j) fixed.emplace(system_.data_symbols[j], exact[j]);
        std::mt19937_64 rng(5);
        try {
            const ConsistentPoint pt = consistent_point(system_, rng, fixed);
            for (std::size_t j : estimates_)
                if (std::abs(pt.data[j] - exact[j]) > tol * std::max(1.0, std::abs(exact[j]))) return false;
        } catch (const PoleError&) {
            return false;
        }
        return true;
    }

private:
    std::map<std::string, int> orders_;
    PolynomialSystem system_;
    std::vector<std::size_t> estimates_;
};

}  // namespace

std::string_view to_string(UnknownClass c) {
    switch (c) {
    case UnknownClass::global: return "global";
    case UnknownClass::local: return "local";
    case UnknownClass::non_identifiable: return "non-identifiable";
    }
    return "?";
}

std::vector<std::string> IdentifiabilityReport::unknowns_of(UnknownClass c) const {
    std::vector<std::string> out;
    for (const auto& [name, cls] : classes)
        if (cls == c) out.push_back(name);
    return out;
}

Eigen::VectorXcd exact_data(const SystemTemplate& tmpl, const OdeModel& m, const std::map<std::string, double>& params,
                            const std::map<std::string, double>& x_init, double t0) {
    return exact_jet_data(tmpl.parametric(), tmpl.orders(), m, params, x_init, t0);
}

IdentifiabilityReport assess(const SystemTemplate& tmpl, const OdeModel& m, std::size_t trials, std::uint64_t seed,
                             double residual_tol) {
    if (trials == 0) throw std::invalid_argument("assess: trials must be positive");
    const std::vector<Probe> probe = probes(tmpl.parametric(), m);
    IdentifiabilityReport report;
    report.trials = trials;
    report.orders = tmpl.orders();
    std::vector<std::vector<std::vector<Complex>>> found(trials);
    const JetCheck check(m, tmpl.orders());
    std::string last_error;

    for (std::size_t trial = 0; trial < trials; ++trial) {
        SplitMix64 rng(stream_seed(seed, trial));
        std::map<std::string, double> params;
        std::map<std::string, double> x_init;
        for (const auto& p : m.parameters()) params[p] = rng.uniform(0.1, 0.9);
        for (const auto& s : m.states()) x_init[s] = rng.uniform(0.1, 0.9);
        std::vector<Complex> truth;
        for (const auto& pr : probe)
            if (pr.index >= 0) truth.emplace_back(params.count(pr.name) ? params[pr.name] : x_init[pr.name]);

        auto& sols = found[trial];
        try {
            const SolutionSet set = tmpl.solve(exact_data(tmpl, m, params, x_init));
            for (const auto& s : set.solutions) {
                if (!(s.residual <= residual_tol)) continue;
                std::vector<Complex> proj;
                std::map<std::string, Complex> named;
                for (const auto& pr : probe) {
                    if (pr.index < 0) continue;
                    proj.push_back(s.point[pr.index]);
                    named[m.parameter_index(pr.name) >= 0 ? pr.name : jet_name(pr.name, 0)] = s.point[pr.index];
                }
                if (!check.matches(named, m, params, x_init, 1e-8)) continue;
                bool dup = false;
                for (const auto& prev : sols) dup = dup || close(prev, proj, 1e-6);
                if (!dup) sols.push_back(std::move(proj));
            }
        } catch (const std::exception& e) {
            last_error = e.what();
            sols.clear();
        }
        report.counts.push_back(sols.size());
        bool hit = false;
        for (const auto& s : sols) hit = hit || close(s, truth, 1e-6);
        report.truth_found.push_back(hit);
    }

    std::map<std::size_t, std::size_t> freq;
    for (std::size_t c : report.counts)
        if (c > 0) ++freq[c];
    if (freq.empty()) throw AssessmentError("no trial produced a solution" + (last_error.empty() ? "" : ": " + last_error));
    std::size_t best = 0;
    for (const auto& [count, n] : freq)
        if (n > best) {
            best = n;
            report.k = count;
        }

    std::size_t slot = 0;
    for (const auto& pr : probe) {
        if (pr.index < 0) {
            report.classes[pr.name] = UnknownClass::non_identifiable;
            continue;
        }
        bool varies = false;
        for (std::size_t trial = 0; trial < trials; ++trial) {
            const auto& sols = found[trial];
            if (sols.size() != report.k) continue;
            for (const auto& s : sols)
                if (std::abs(s[slot] - sols.front()[slot]) > 1e-6 * std::max(1.0, std::abs(sols.front()[slot])))
                    varies = true;
        }
        report.classes[pr.name] = varies ? UnknownClass::local : UnknownClass::global;
        ++slot;
    }
    return report;
}

IdentifiabilityReport assess(const OdeModel& m, std::size_t trials, std::uint64_t seed, const TrackerConfig& config) {
    try {
        const SystemTemplate tmpl = make_template(m, config);
        return assess(tmpl, m, trials, seed);
    } catch (const RankDeficiencyError& e) {
        throw AssessmentError(std::string("estimation system stays rank deficient (model may be non-identifiable): ") +
                              e.what());
    }
}

}  // namespace paramest
