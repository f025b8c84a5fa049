#include "paramest/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "paramest/errors.hpp"

namespace paramest {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_number(const std::string& s, int line, int column) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw ParseError("not a number: '" + s + "'", line, column);
    return v;
}

TimeSeries checked(TimeSeries ts) {
    try {
        ts.validate(1);
    } catch (const ModelError& e) {
        throw ParseError(std::string("invalid data: ") + e.what());
    }
    return ts;
}

// JSON has no infinity; null stands for it.
Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
double number_from(const Json& j) { return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>(); }

std::map<std::string, double> values_from(const Json& j) {
    std::map<std::string, double> out;
    for (const auto& [k, v] : j.items()) out[k] = v.get<double>();
    return out;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

OdeModel load_model(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_model(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
    }
}

TimeSeries parse_data_json(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("malformed JSON data: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("JSON data must be an object of columns");
    if (!j.contains("t")) throw ParseError("JSON data has no \"t\" column");
    TimeSeries ts;
    for (const auto& [name, column] : j.items()) {
        if (!column.is_array()) throw ParseError("column '" + name + "' is not an array");
        std::vector<double> v;
        for (const auto& x : column) {
            if (!x.is_number()) throw ParseError("column '" + name + "' has a non-numeric entry");
            v.push_back(x.get<double>());
        }
        if (name == "t")
            ts.times = std::move(v);
        else
            ts.values[name] = std::move(v);
    }
    return checked(std::move(ts));
}

TimeSeries parse_data_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s.front() == '#') continue;
        const auto cells = split(s, ',');
        if (header.empty()) {
            header = cells;
            for (const auto& h : header)
                if (h.empty()) throw ParseError("empty column name in CSV header", line);
            columns.resize(header.size());
            continue;
        }
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(cells.size()),
                             line);
        for (std::size_t c = 0; c < cells.size(); ++c)
            columns[c].push_back(parse_number(cells[c], line, static_cast<int>(c + 1)));
    }
    if (header.empty()) throw ParseError("CSV data is empty");
    TimeSeries ts;
    bool has_t = false;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "t") {
            ts.times = std::move(columns[c]);
            has_t = true;
        } else {
            ts.values[header[c]] = std::move(columns[c]);
        }
    }
    if (!has_t) throw ParseError("CSV data has no \"t\" column");
    return checked(std::move(ts));
}

TimeSeries parse_data(std::string_view text) {
    const auto b = text.find_first_not_of(" \t\r\n");
    if (b != std::string_view::npos && text[b] == '{') return parse_data_json(text);
    return parse_data_csv(text);
}

TimeSeries load_data(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_data(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line(), e.column());
    }
}

Json to_json(const TimeSeries& data) {
    Json j;
    j["t"] = data.times;
    for (const auto& [name, v] : data.values) j[name] = v;
    return j;
}

Json to_json(const Candidate& c) {
    return Json{{"parameters", c.parameters},
                {"initial_conditions", c.initial_conditions},
                {"error", number_or_null(c.error)},
                {"scheme", c.scheme}};
}

Json to_json(const EstimationResult& result) {
    Json candidates = Json::array();
    for (const auto& c : result.candidates) candidates.push_back(to_json(c));
    Json all = Json::array();
    for (const auto& c : result.all_candidates) all.push_back(to_json(c));
    const auto& d = result.diagnostics;
    Json schemes = Json::array();
    for (const auto& s : d.schemes)
        schemes.push_back({{"scheme", s.scheme},
                           {"t_eval", s.t_eval},
                           {"nudged", s.nudged},
                           {"solutions", s.solutions},
                           {"real_solutions", s.real_solutions},
                           {"paths_tracked", s.paths_tracked},
                           {"failed_paths", s.failed_paths},
                           {"failure", s.failure}});
    Json diag{{"orders", d.orders},
              {"dropped_equations", d.dropped_equations},
              {"solve_method", d.solve_method},
              {"schemes", schemes},
              {"non_identifiable", d.non_identifiable},
              {"range_rejected", d.range_rejected},
              {"short_of_k", d.short_of_k},
              {"t_eval", result.t_eval},
              {"t_initial", result.t_initial},
              {"all_candidates", all}};
    return Json{{"candidates", candidates}, {"k", result.k}, {"diagnostics", diag}};
}

Json to_json(const IdentifiabilityReport& report) {
    std::map<std::string, std::string> classes;
    for (const auto& [name, c] : report.classes) classes[name] = std::string(to_string(c));
    return Json{{"k", report.k},
                {"classes", classes},
                {"trials", report.trials},
                {"orders", report.orders},
                {"counts", report.counts},
                {"truth_found", report.truth_found}};
}

Json to_json(const BenchReport& report) {
    Json models = Json::array();
    for (const auto& m : report.models) {
        Json runs = Json::array();
        for (const auto& r : m.runs)
            runs.push_back({{"seed", r.seed},
                            {"truth", r.truth},
                            {"rmsre", number_or_null(r.rmsre)},
                            {"seconds", r.seconds},
                            {"redraws", r.redraws},
                            {"failure", r.failure}});
        Json values = Json::array();
        for (double v : m.rmsre_values()) values.push_back(number_or_null(v));
        models.push_back({{"name", m.name},
                          {"k", m.k},
                          {"setup_seconds", m.setup_seconds},
                          {"rmsre", values},
                          {"median", number_or_null(m.median)},
                          {"mean", number_or_null(m.mean)},
                          {"runs", runs}});
    }
    return Json{{"seed", report.seed}, {"datasets", report.datasets}, {"models", models}};
}

Candidate candidate_from_json(const Json& j) {
    Candidate c;
    c.parameters = values_from(j.at("parameters"));
    c.initial_conditions = values_from(j.at("initial_conditions"));
    c.error = number_from(j.at("error"));
    c.scheme = j.at("scheme").get<std::string>();
    return c;
}

EstimationResult result_from_json(const Json& j) {
    try {
        EstimationResult r;
        for (const auto& c : j.at("candidates")) r.candidates.push_back(candidate_from_json(c));
        r.k = j.at("k").get<std::size_t>();
        const Json& d = j.at("diagnostics");
        auto& diag = r.diagnostics;
        diag.orders = d.at("orders").get<std::map<std::string, int>>();
        diag.dropped_equations = d.at("dropped_equations").get<std::size_t>();
        diag.solve_method = d.at("solve_method").get<std::string>();
        for (const auto& s : d.at("schemes")) {
            SchemeDiagnostics sd;
            sd.scheme = s.at("scheme").get<std::string>();
            sd.t_eval = s.at("t_eval").get<double>();
            sd.nudged = s.at("nudged").get<bool>();
            sd.solutions = s.at("solutions").get<std::size_t>();
            sd.real_solutions = s.at("real_solutions").get<std::size_t>();
            sd.paths_tracked = s.at("paths_tracked").get<std::size_t>();
            sd.failed_paths = s.at("failed_paths").get<std::size_t>();
            sd.failure = s.at("failure").get<std::string>();
            diag.schemes.push_back(std::move(sd));
        }
        diag.non_identifiable = d.at("non_identifiable").get<std::vector<std::string>>();
        diag.range_rejected = d.at("range_rejected").get<std::size_t>();
        diag.short_of_k = d.at("short_of_k").get<bool>();
        r.t_eval = d.at("t_eval").get<double>();
        r.t_initial = d.at("t_initial").get<double>();
        for (const auto& c : d.at("all_candidates")) r.all_candidates.push_back(candidate_from_json(c));
        return r;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed estimation result: ") + e.what());
    }
}

BenchReport bench_report_from_json(const Json& j) {
    try {
        BenchReport r;
        r.seed = j.at("seed").get<std::uint64_t>();
        r.datasets = j.at("datasets").get<std::size_t>();
        for (const auto& m : j.at("models")) {
            ModelBench mb;
            mb.name = m.at("name").get<std::string>();
            mb.k = m.at("k").get<std::size_t>();
            mb.setup_seconds = m.at("setup_seconds").get<double>();
            mb.median = number_from(m.at("median"));
            mb.mean = number_from(m.at("mean"));
            for (const auto& run : m.at("runs")) {
                DatasetRun d;
                d.seed = run.at("seed").get<std::uint64_t>();
                d.truth = values_from(run.at("truth"));
                d.rmsre = number_from(run.at("rmsre"));
                d.seconds = run.at("seconds").get<double>();
                d.redraws = run.at("redraws").get<std::size_t>();
                d.failure = run.at("failure").get<std::string>();
                mb.runs.push_back(std::move(d));
            }
            r.models.push_back(std::move(mb));
        }
        return r;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed benchmark report: ") + e.what());
    }
}

}  // namespace paramest
