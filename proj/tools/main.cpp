#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "paramest/bench.hpp"
#include "paramest/errors.hpp"
#include "paramest/io.hpp"
#include "paramest/registry.hpp"

using namespace paramest;

namespace {

// Usage errors exit 1, estimation and assessment failures exit 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A path to a model file, or the name of a built-in model.
OdeModel resolve_model(const std::string& spec) {
    if (std::filesystem::exists(spec)) return load_model(spec);
    for (const auto& e : registry())
        if (e.name == spec) return e.model;
    if (spec == "toy") return example_model();
    throw UsageError("no model file '" + spec + "' and no built-in model of that name");
}

// "a=1,b=2"
std::map<std::string, double> parse_assignments(const std::string& text, const char* what) {
    std::map<std::string, double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError(std::string(what) + ": expected name=value, got '" + item + "'");
        try {
            std::size_t used = 0;
            const std::string value = item.substr(eq + 1);
            out[item.substr(0, eq)] = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw UsageError(std::string(what) + ": bad number in '" + item + "'");
        }
    }
    return out;
}

std::vector<double> parse_times(const std::string& text) {
    std::vector<double> t;
    // lo:hi:n or a comma list
    if (std::count(text.begin(), text.end(), ':') == 2) {
        double lo = 0, hi = 0;
        int n = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(text);
        if (!(in >> lo >> c1 >> hi >> c2 >> n) || n < 1) throw UsageError("--times: expected lo:hi:n");
        for (int i = 0; i < n; ++i) t.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
        return t;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            t.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw UsageError("--times: bad number '" + item + "'");
        }
    }
    return t;
}

std::pair<std::string, std::pair<double, double>> parse_range(const std::string& text) {
    const auto eq = text.find('=');
    const auto comma = text.find(',', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || comma == std::string::npos)
        throw UsageError("--range: expected name=lo,hi, got '" + text + "'");
    try {
        const double lo = std::stod(text.substr(eq + 1, comma - eq - 1));
        const double hi = std::stod(text.substr(comma + 1));
        if (lo > hi) throw UsageError("--range: empty interval in '" + text + "'");
        return {text.substr(0, eq), {lo, hi}};
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("--range: bad number in '" + text + "'");
    }
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw UsageError("cannot write '" + out_path + "'");
    out << text;
}

std::string format_value(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << std::fixed << v;
    return s.str();
}

std::string result_text(const EstimationResult& r) {
    std::ostringstream out;
    if (r.candidates.empty()) out << "no candidate satisfies the range constraints\n";
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        const auto& c = r.candidates[i];
        if (r.candidates.size() > 1) out << "candidate " << i + 1 << ": ";
        bool first = true;
        auto sep = [&] {
            if (!first) out << ", ";
            first = false;
        };
        for (const auto& [name, v] : c.parameters) {
            sep();
            out << name << " = " << format_value(v);
        }
        for (const auto& [name, v] : c.initial_conditions) {
            sep();
            out << name << "(t1) = " << format_value(v);
        }
        std::ostringstream e;
        e << std::setprecision(3) << std::scientific << c.error;
        out << "  [error " << e.str() << ", " << c.scheme << "]\n";
    }
    if (!r.diagnostics.non_identifiable.empty()) {
        out << "not identifiable:";
        for (const auto& n : r.diagnostics.non_identifiable) out << ' ' << n;
        out << '\n';
    }
    return out.str();
}

std::string bench_text(const BenchReport& r) {
    std::ostringstream out;
    out << std::left << std::setw(18) << "model" << std::right << std::setw(4) << "k" << std::setw(12) << "median"
        << std::setw(12) << "mean" << std::setw(10) << "seconds" << '\n';
    for (const auto& m : r.models) {
        double seconds = m.setup_seconds;
        for (const auto& d : m.runs) seconds += d.seconds;
        out << std::left << std::setw(18) << m.name << std::right << std::setw(4) << m.k << std::setw(12)
            << std::setprecision(4) << m.median << std::setw(12) << m.mean << std::setw(10) << std::setprecision(1)
            << std::fixed << seconds << std::defaultfloat << '\n';
    }
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameter and initial-condition estimation for rational ODE models"};
    app.require_subcommand(1);

    std::string model_spec, data_path, out_path, format = "text", t_eval_text;
    std::vector<std::string> scheme_names, range_texts;
    auto* est = app.add_subcommand("estimate", "Estimate parameters and initial states from data");
    est->add_option("--model", model_spec, "Model file, or a built-in model name")->required();
    est->add_option("--data", data_path, "Data file (JSON or CSV with a t column)")->required();
    est->add_option("--scheme", scheme_names, "Interpolation scheme: aaa, fh3, fh6, ... (repeatable)");
    est->add_option("--t-eval", t_eval_text, "Derivative evaluation time: first, mid or a number");
    est->add_option("--range", range_texts, "Post-filter constraint name=lo,hi (repeatable)");
    est->add_option("--out", out_path, "Write the output here instead of stdout");
    est->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

    std::string params_text, x0_text, times_text, t_start_text;
    std::string sim_format = "json";
    auto* sim = app.add_subcommand("simulate", "Simulate a model and print its outputs");
    sim->add_option("--model", model_spec, "Model file, or a built-in model name")->required();
    sim->add_option("--params", params_text, "Parameter values name=value,...")->required();
    sim->add_option("--x0", x0_text, "Initial states name=value,... at the first time")->required();
    sim->add_option("--times", times_text, "Comma list or lo:hi:n")->required();
    sim->add_option("--t-start", t_start_text, "Time of the initial states (default: first time)");
    sim->add_option("--out", out_path, "Write the output here instead of stdout");
    sim->add_option("--format", sim_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    std::size_t trials = 3;
    std::uint64_t seed = 1;
    std::string id_format = "text";
    auto* ident = app.add_subcommand("identify", "Count solutions to classify identifiability");
    ident->add_option("--model", model_spec, "Model file, or a built-in model name")->required();
    ident->add_option("--trials", trials, "Random trials")->check(CLI::PositiveNumber);
    ident->add_option("--seed", seed, "Seed");
    ident->add_option("--format", id_format, "json or text")->check(CLI::IsMember({"json", "text"}));

    std::vector<std::string> bench_models;
    std::size_t datasets = 10;
    std::uint64_t bench_seed = 2024;
    auto* bench = app.add_subcommand("bench", "Synthetic-data benchmark over the built-in models");
    bench->add_option("--models", bench_models, "Model names (default: all ten)")->delimiter(',');
    bench->add_option("--datasets", datasets, "Datasets per model")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_seed, "Seed");
    bench->add_option("--out", out_path, "Write the JSON report here; a summary goes to stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        CLI::App* shown = &app;
        for (auto* sub : app.get_subcommands()) shown = sub;
        std::cerr << shown->help();
        return 1;
    }

    try {
        if (*est) {
            const OdeModel m = resolve_model(model_spec);
            const TimeSeries data = load_data(data_path);
            EstimationConfig cfg;
            if (!scheme_names.empty()) {
                cfg.schemes.clear();
                for (const auto& s : scheme_names) {
                    try {
                        cfg.schemes.push_back(parse_scheme(s));
                    } catch (const std::invalid_argument& e) {
                        throw UsageError(e.what());
                    }
                }
            }
            if (t_eval_text == "mid" || t_eval_text == "midpoint") {
                cfg.t_eval_policy = TEvalPolicy::midpoint;
            } else if (!t_eval_text.empty() && t_eval_text != "first") {
                cfg.t_eval_policy = TEvalPolicy::explicit_time;
                try {
                    cfg.t_eval = std::stod(t_eval_text);
                } catch (const std::exception&) {
                    throw UsageError("--t-eval: expected first, mid or a number");
                }
            }
            for (const auto& r : range_texts) cfg.ranges.insert(parse_range(r));
            const EstimationResult r = estimate(m, data, cfg);
            emit(format == "json" ? to_json(r).dump(2) + "\n" : result_text(r), out_path);
        } else if (*sim) {
            const OdeModel m = resolve_model(model_spec);
            const std::vector<double> times = parse_times(times_text);
            if (times.empty()) throw UsageError("--times: no times");
            double t_start = times.front();
            if (!t_start_text.empty()) t_start = parse_times(t_start_text).front();
            const auto params = parse_assignments(params_text, "--params");
            const auto x0 = parse_assignments(x0_text, "--x0");
            const Trajectory tr = simulate(m, params, x0, t_start, times);
            std::ostringstream out;
            if (sim_format == "json") {
                TimeSeries ts;
                ts.times = times;
                for (std::size_t o = 0; o < m.outputs().size(); ++o)
                    for (std::size_t i = 0; i < times.size(); ++i)
                        ts.values[m.outputs()[o]].push_back(
                            tr.outputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o)));
                out << to_json(ts).dump() << '\n';
            } else {
                out << "t";
                for (const auto& y : m.outputs()) out << ',' << y;
                out << '\n' << std::setprecision(17);
                for (std::size_t i = 0; i < times.size(); ++i) {
                    out << times[i];
                    for (std::size_t o = 0; o < m.outputs().size(); ++o)
                        out << ',' << tr.outputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o));
                    out << '\n';
                }
            }
            emit(out.str(), out_path);
        } else if (*ident) {
            const OdeModel m = resolve_model(model_spec);
            const IdentifiabilityReport r = assess(m, trials, seed);
            if (id_format == "json") {
                std::cout << to_json(r).dump(2) << '\n';
            } else {
                std::cout << "k = " << r.k << '\n';
                for (const auto& [name, c] : r.classes) std::cout << "  " << name << ": " << to_string(c) << '\n';
            }
        } else if (*bench) {
            if (bench_models.empty()) bench_models = registry_names();
            for (const auto& name : bench_models) {
                bool known = false;
                for (const auto& e : registry()) known = known || e.name == name;
                if (!known) throw UsageError("unknown benchmark model '" + name + "'");
            }
            const BenchReport r = run_benchmark(bench_models, datasets, bench_seed);
            const std::string json = to_json(r).dump(2) + "\n";
            if (out_path.empty()) {
                std::cout << json;
            } else {
                emit(json, out_path);
                std::cout << bench_text(r);
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what();
        if (e.line() > 0) std::cerr << " (line " << e.line() << ", column " << e.column() << ")";
        std::cerr << '\n';
        return 1;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const EstimationError& e) {
        std::cerr << "estimation failed: " << e.what() << '\n';
        return 2;
    } catch (const AssessmentError& e) {
        std::cerr << "identifiability assessment failed: " << e.what() << '\n';
        return 2;
    } catch (const IntegrationError& e) {
        std::cerr << "integration failed: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
