#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "paramest/errors.hpp"
#include "paramest/io.hpp"
#include "paramest/registry.hpp"

using namespace paramest;

namespace {

const std::string source_dir = PARAMEST_SOURCE_DIR;

struct RunResult {
    int status = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(PARAMEST_CLI) + " " + args + " 2>&1";
    RunResult r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

EstimationResult sample_result() {
    EstimationResult r;
    r.k = 2;
    r.t_eval = 0.0;
    r.t_initial = -0.5;
    Candidate a;
    a.parameters = {{"a", 0.25}, {"b", -1.5e-3}};
    a.initial_conditions = {{"x", 0.125}};
    a.error = 3.5e-9;
    a.scheme = "aaa";
    Candidate b = a;
    b.parameters["a"] = 0.75;
    b.error = 1e-3;
    b.scheme = "fh6";
    r.candidates = {a, b};
    r.all_candidates = {a, b, b};
    r.all_candidates[2].error = 0.5;
    auto& d = r.diagnostics;
    d.orders = {{"y1", 3}, {"y2", 2}};
    d.dropped_equations = 1;
    d.solve_method = "monodromy";
    d.non_identifiable = {"x7"};
    d.range_rejected = 4;
    d.short_of_k = true;
    SchemeDiagnostics sd;
    sd.scheme = "aaa";
    sd.t_eval = 0.001;
    sd.nudged = true;
    sd.solutions = 6;
    sd.real_solutions = 2;
    sd.paths_tracked = 9;
    sd.failed_paths = 1;
    d.schemes = {sd};
    sd.scheme = "fh3";
    sd.failure = "pole at the evaluation time";
    d.schemes.push_back(sd);
    return r;
}

bool same(const Candidate& a, const Candidate& b) {
    return a.parameters == b.parameters && a.initial_conditions == b.initial_conditions && a.error == b.error &&
           a.scheme == b.scheme;
}

}  // namespace

TEST_CASE("JSON data with a t column") {
    const TimeSeries ts = parse_data(R"({"t": [0, 0.5, 1], "y1": [1, 2, 3], "y2": [0, 0, 1e-3]})");
    CHECK(ts.times == std::vector<double>{0, 0.5, 1});
    CHECK(ts.values.at("y1") == std::vector<double>{1, 2, 3});
    CHECK(ts.values.at("y2")[2] == 1e-3);
    CHECK(ts.values.size() == 2);
}

TEST_CASE("malformed JSON data is rejected") {
    CHECK_THROWS_AS(parse_data_json("{\"t\": [0, 1], \"y1\": [1"), ParseError);
    CHECK_THROWS_AS(parse_data_json("[1, 2]"), ParseError);
    CHECK_THROWS_AS(parse_data_json(R"({"y1": [1, 2]})"), ParseError);
    CHECK_THROWS_AS(parse_data_json(R"({"t": [0, 1], "y1": [1, "a"]})"), ParseError);
    CHECK_THROWS_AS(parse_data_json(R"({"t": [0, 1], "y1": [1]})"), ParseError);
    CHECK_THROWS_AS(parse_data_json(R"({"t": [1, 0], "y1": [1, 2]})"), ParseError);
}

TEST_CASE("CSV data with comments and blank lines") {
    const TimeSeries ts = parse_data("# toy\nt, y1\n\n0.0, 2.0\n0.5 ,1.5\n1.0,1.0\n");
    CHECK(ts.times == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(ts.values.at("y1") == std::vector<double>{2.0, 1.5, 1.0});
}

TEST_CASE("CSV errors carry a line number") {
    try {
        parse_data_csv("t,y1\n0,1\n1,2,3\n");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    try {
        parse_data_csv("t,y1\n0,1\n1,abc\n");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 2);
    }
    CHECK_THROWS_AS(parse_data_csv("y1\n1\n"), ParseError);
    CHECK_THROWS_AS(parse_data_csv(""), ParseError);
}

TEST_CASE("bundled example files agree with each other") {
    const TimeSeries j = load_data(source_dir + "/tools/data/toy_data.json");
    const TimeSeries c = load_data(source_dir + "/tools/data/toy_data.csv");
    CHECK(j.times == c.times);
    CHECK(j.values == c.values);
    const OdeModel m = load_model(source_dir + "/tools/data/toy_model.txt");
    CHECK(to_dsl(m) == to_dsl(example_model()));
    CHECK_THROWS_AS(load_data(source_dir + "/no/such/file.json"), ParseError);
}

TEST_CASE("data JSON round trip") {
    TimeSeries ts;
    ts.times = {-0.5, 0.0, 0.5};
    ts.values["y1"] = {0.1, 1.0 / 3.0, std::numbers::pi};
    const TimeSeries back = parse_data(to_json(ts).dump());
    CHECK(back.times == ts.times);
    CHECK(back.values == ts.values);
}

TEST_CASE("estimation result JSON round trip") {
    const EstimationResult r = sample_result();
    const Json j = to_json(r);
    CHECK(j.contains("candidates"));
    CHECK(j.contains("k"));
    CHECK(j.contains("diagnostics"));
    CHECK(j["candidates"][0].contains("parameters"));
    CHECK(j["candidates"][0].contains("initial_conditions"));
    CHECK(j["candidates"][0].contains("error"));
    CHECK(j["candidates"][0].contains("scheme"));

    const EstimationResult back = result_from_json(Json::parse(j.dump()));
    REQUIRE(back.candidates.size() == r.candidates.size());
    for (std::size_t i = 0; i < r.candidates.size(); ++i) CHECK(same(back.candidates[i], r.candidates[i]));
    REQUIRE(back.all_candidates.size() == r.all_candidates.size());
    for (std::size_t i = 0; i < r.all_candidates.size(); ++i) CHECK(same(back.all_candidates[i], r.all_candidates[i]));
    CHECK(back.k == r.k);
    CHECK(back.t_eval == r.t_eval);
    CHECK(back.t_initial == r.t_initial);
    const auto& d = back.diagnostics;
    CHECK(d.orders == r.diagnostics.orders);
    CHECK(d.dropped_equations == 1);
    CHECK(d.solve_method == "monodromy");
    CHECK(d.non_identifiable == std::vector<std::string>{"x7"});
    CHECK(d.range_rejected == 4);
    CHECK(d.short_of_k);
    REQUIRE(d.schemes.size() == 2);
    CHECK(d.schemes[0].nudged);
    CHECK(d.schemes[0].t_eval == 0.001);
    CHECK(d.schemes[0].paths_tracked == 9);
    CHECK(d.schemes[1].failure == "pole at the evaluation time");
    CHECK(to_json(back) == j);
    CHECK_THROWS_AS(result_from_json(Json::parse(R"({"k": 1})")), ParseError);
}

TEST_CASE("bench report JSON round trip keeps failures") {
    BenchReport r;
    r.seed = 7;
    r.datasets = 2;
    ModelBench m;
    m.name = "harmonic";
    m.k = 1;
    m.setup_seconds = 0.25;
    DatasetRun ok;
    ok.seed = 11;
    ok.truth = {{"a", 0.3}, {"x1", 0.7}};
    ok.rmsre = 1e-9;
    ok.seconds = 0.1;
    DatasetRun bad = ok;
    bad.seed = 12;
    bad.rmsre = std::numeric_limits<double>::infinity();
    bad.failure = "no candidate";
    bad.redraws = 3;
    m.runs = {ok, bad};
    m.median = std::numeric_limits<double>::infinity();
    m.mean = std::numeric_limits<double>::infinity();
    r.models = {m};

    const Json j = to_json(r);
    CHECK(j["models"][0]["rmsre"].size() == 2);
    CHECK(j["models"][0]["rmsre"][1].is_null());
    const BenchReport back = bench_report_from_json(Json::parse(j.dump()));
    REQUIRE(back.models.size() == 1);
    const auto& bm = back.models[0];
    CHECK(bm.name == "harmonic");
    REQUIRE(bm.runs.size() == 2);
    CHECK(bm.runs[0].rmsre == 1e-9);
    CHECK(std::isinf(bm.runs[1].rmsre));
    CHECK(bm.runs[1].failure == "no candidate");
    CHECK(bm.runs[1].redraws == 3);
    CHECK(bm.runs[0].truth == ok.truth);
    CHECK(std::isinf(bm.median));
    CHECK(to_json(back) == j);
}

TEST_CASE("cli estimate on the example files") {
    const RunResult r = run_cli("estimate --model " + source_dir + "/tools/data/toy_model.txt --data " + source_dir +
                                "/tools/data/toy_data.json");
    CHECK(r.status == 0);
    CHECK(r.out.find("mu = 0.499") != std::string::npos);
    CHECK(r.out.find("x(t1) = 1.000") != std::string::npos);
}

TEST_CASE("cli estimate json output parses back") {
    const RunResult r = run_cli("estimate --model toy --data " + source_dir +
                                "/tools/data/toy_data.csv --format json --range mu=0,0.3");
    REQUIRE(r.status == 0);
    const EstimationResult back = result_from_json(Json::parse(r.out));
    REQUIRE(back.candidates.size() == 1);
    CHECK(std::abs(back.candidates[0].parameters.at("mu") - 0.249) < 5e-3);
    CHECK(std::abs(back.candidates[0].initial_conditions.at("x") + 2.0) < 5e-3);
}

TEST_CASE("cli usage errors exit 1") {
    const RunResult none = run_cli("estimate");
    CHECK(none.status == 1);
    CHECK(none.out.find("Usage") != std::string::npos);
    CHECK(run_cli("").status == 1);
    CHECK(run_cli("estimate --model toy --data /no/such/data.json").status == 1);
    CHECK(run_cli("estimate --model /no/such/model.txt --data " + source_dir + "/tools/data/toy_data.json").status == 1);
    CHECK(run_cli("estimate --model toy --data " + source_dir + "/tools/data/toy_data.json --range mu=1").status == 1);
    CHECK(run_cli("simulate --model toy --params mu --x0 x=1 --times 0,1").status == 1);
    CHECK(run_cli("bench --models nosuchmodel --datasets 1").status == 1);
}

TEST_CASE("cli estimation failure exits 2") {
    // x^2 + x = -1 has no real solution
    const RunResult r = run_cli("estimate --model toy --data " + source_dir + "/tests/data/below_range.json");
    CHECK(r.status == 2);
}

TEST_CASE("cli simulate prints data that parses back") {
    const RunResult r = run_cli("simulate --model toy --params mu=0.5 --x0 x=1 --times 0:1:5");
    REQUIRE(r.status == 0);
    const TimeSeries ts = parse_data(r.out);
    REQUIRE(ts.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        const double x = std::exp(-0.5 * ts.times[i]);
        CHECK(std::abs(ts.values.at("y1")[i] - (x * x + x)) < 1e-9);
    }
}

TEST_CASE("cli bench emits one RMSRE per dataset") {
    const RunResult r = run_cli("bench --models harmonic --datasets 2 --seed 7");
    REQUIRE(r.status == 0);
    const Json j = Json::parse(r.out);
    REQUIRE(j["models"].size() == 1);
    CHECK(j["models"][0]["rmsre"].size() == 2);
}

TEST_CASE("cli identify") {
    const RunResult r = run_cli("identify --model toy --format json");
    REQUIRE(r.status == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["k"] == 1);
    CHECK(j["classes"]["mu"] == "global");
}
