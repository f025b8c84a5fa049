#include "paramest/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "paramest/errors.hpp"
#include "paramest/random.hpp"
#include "paramest/registry.hpp"

namespace paramest {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t registry_index(const std::string& name) {
    const auto& reg = registry();
    for (std::size_t i = 0; i < reg.size(); ++i)
        if (reg[i].name == name) return i;
    throw std::invalid_argument("unknown model '" + name + "'");
}

}  // namespace

double rmsre(const std::map<std::string, double>& truth, const std::map<std::string, double>& estimate,
             const std::set<std::string>& identifiable) {
    if (identifiable.empty()) throw std::invalid_argument("rmsre: no identifiable unknowns");
    double sum = 0.0;
    for (const auto& name : identifiable) {
        const auto t = truth.find(name);
        const auto e = estimate.find(name);
        if (t == truth.end() || e == estimate.end()) throw std::invalid_argument("rmsre: no value for '" + name + "'");
        if (t->second == 0.0) throw std::invalid_argument("rmsre: zero true value for '" + name + "'");
        const double r = (t->second - e->second) / t->second;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(identifiable.size())) * 100.0;
}

std::vector<double> ModelBench::rmsre_values() const {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.rmsre);
    return v;
}

std::vector<double> bench_times() {
    std::vector<double> t;
    for (int i = 0; i <= 20; ++i) t.push_back(-0.5 + 0.05 * i);
    return t;
}

EstimationConfig bench_config() {
    EstimationConfig cfg;
    cfg.t_eval_policy = TEvalPolicy::midpoint;
    for (double tol : {1e-12, 1e-11, 1e-10, 1e-9, 1e-8}) cfg.schemes.push_back(SchemeSpec::aaa(tol));
    return cfg;
}

BenchReport run_benchmark(const std::vector<std::string>& models, std::size_t datasets, std::uint64_t seed) {
    return run_benchmark(models, datasets, seed, bench_config());
}

BenchReport run_benchmark(const std::vector<std::string>& models, std::size_t datasets, std::uint64_t seed,
                          const EstimationConfig& config) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    BenchReport report;
    report.seed = seed;
    report.datasets = datasets;
    const std::vector<double> times = bench_times();

    for (const auto& name : models) {
        const std::size_t mi = registry_index(name);
        const ModelRegistryEntry& entry = registry()[mi];
        const OdeModel& m = entry.model;
        const std::set<std::string> scored(entry.identifiable_unknowns.begin(), entry.identifiable_unknowns.end());
        ModelBench mb;
        mb.name = name;

        const auto setup_start = std::chrono::steady_clock::now();
        std::unique_ptr<Estimator> estimator;
        std::string setup_failure;
        try {
            estimator = std::make_unique<Estimator>(m, config);
            estimator->system_template().prepare();
            mb.k = estimator->identifiability().k;
        } catch (const std::exception& e) {
            setup_failure = e.what();
        }
        mb.setup_seconds = seconds_since(setup_start);

        for (std::size_t j = 0; j < datasets; ++j) {
            DatasetRun run;
            run.seed = stream_seed(seed, mi, j);
            SplitMix64 rng(run.seed);
            TimeSeries data;
            std::map<std::string, double> params;
            std::map<std::string, double> x_init;
            for (;;) {
                params.clear();
                x_init.clear();
                for (const auto& p : m.parameters()) params[p] = rng.uniform(0.1, 0.9);
                for (const auto& s : m.states()) x_init[s] = rng.uniform(0.1, 0.9);
                try {
                    data = generate_data(m, params, x_init, times, config.integrator);
                    break;
                } catch (const IntegrationError&) {
                    if (++run.redraws > 100) throw std::runtime_error("benchmark: 100 consecutive failed draws for " + name);
                }
            }
            run.truth = params;
            run.truth.insert(x_init.begin(), x_init.end());

            const auto t0 = std::chrono::steady_clock::now();
            run.rmsre = inf;
            if (!estimator) {
                run.failure = setup_failure;
            } else {
                try {
                    const EstimationResult res = estimator->estimate(data);
                    for (const auto& c : res.candidates) {
                        std::map<std::string, double> est = c.parameters;
                        est.insert(c.initial_conditions.begin(), c.initial_conditions.end());
                        run.rmsre = std::min(run.rmsre, rmsre(run.truth, est, scored));
                    }
                } catch (const EstimationError& e) {
                    run.failure = e.what();
                }
            }
            run.seconds = seconds_since(t0);
            mb.runs.push_back(std::move(run));
        }

        std::vector<double> v = mb.rmsre_values();
        if (!v.empty()) {
            std::sort(v.begin(), v.end());
            const std::size_t h = v.size() / 2;
            mb.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
            mb.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        }
        report.models.push_back(std::move(mb));
    }
    return report;
}

}  // namespace paramest
