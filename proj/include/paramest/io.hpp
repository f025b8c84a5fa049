#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "paramest/bench.hpp"
#include "paramest/identifiability.hpp"
#include "paramest/model.hpp"
#include "paramest/pipeline.hpp"

namespace paramest {

using Json = nlohmann::json;

/// Whole file as text; ParseError if it cannot be read.
std::string read_text_file(const std::filesystem::path& path);

OdeModel load_model(const std::filesystem::path& path);

/// {"t": [...], "<column>": [...], ...}
TimeSeries parse_data_json(std::string_view text);
/// Header row with a "t" column; '#' lines and blank lines are skipped.
TimeSeries parse_data_csv(std::string_view text);
/// JSON when the first non-blank character is '{', CSV otherwise.
TimeSeries parse_data(std::string_view text);
TimeSeries load_data(const std::filesystem::path& path);

Json to_json(const TimeSeries& data);
Json to_json(const Candidate& c);
Json to_json(const EstimationResult& result);
Json to_json(const IdentifiabilityReport& report);
/// Infinite RMSRE values (failed datasets) are written as null.
Json to_json(const BenchReport& report);

Candidate candidate_from_json(const Json& j);
EstimationResult result_from_json(const Json& j);
BenchReport bench_report_from_json(const Json& j);

}  // namespace paramest
