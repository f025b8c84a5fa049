#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "paramest/pipeline.hpp"

namespace paramest {

/// sqrt(mean over P of ((truth - estimate) / truth)^2) * 100.
double rmsre(const std::map<std::string, double>& truth, const std::map<std::string, double>& estimate,
             const std::set<std::string>& identifiable);

struct DatasetRun {
    std::uint64_t seed = 0;
    std::map<std::string, double> truth;  // parameters and states at t = -0.5
    double rmsre = 0.0;                   // +inf when estimation failed
    double seconds = 0.0;
    std::size_t redraws = 0;
    std::string failure;
};

struct ModelBench {
    std::string name;
    std::size_t k = 0;
    double setup_seconds = 0.0;  // template, generic solutions, identifiability
    std::vector<DatasetRun> runs;
    double median = 0.0;
    double mean = 0.0;

    std::vector<double> rmsre_values() const;
};

struct BenchReport {
    std::uint64_t seed = 0;
    std::size_t datasets = 0;
    std::vector<ModelBench> models;
};

/// Synthetic-data benchmark. For model i (registry index) and dataset j the
/// truth is drawn from SplitMix64(stream_seed(seed, i, j)): parameters, then
/// initial states, each uniform in [0.1, 0.9]. Data are the noise-free outputs
/// at 21 equispaced times on [-0.5, 0.5] with the states given at t = -0.5; a
/// draw whose integration fails is discarded and the next draw of the same
/// stream is used. Each dataset is scored by the returned candidate with the
/// smallest RMSRE over the model's identifiable unknowns.
BenchReport run_benchmark(const std::vector<std::string>& models, std::size_t datasets, std::uint64_t seed,
                          const EstimationConfig& config);
BenchReport run_benchmark(const std::vector<std::string>& models, std::size_t datasets, std::uint64_t seed);

/// Estimation settings of the benchmark: derivatives are taken at the
/// midpoint t = 0 of the sampling interval, and AAA is also run with
/// tolerances 1e-12 .. 1e-8 after the default schemes.
EstimationConfig bench_config();

/// 21 equispaced times on [-0.5, 0.5].
std::vector<double> bench_times();

}  // namespace paramest
