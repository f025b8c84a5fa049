#include "paramest/system_template.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "paramest/errors.hpp"

namespace paramest {

namespace {

bool has_unknowns(const ComplexPolynomial& p, std::size_t n) {
    for (int v : p.variables())
        if (static_cast<std::size_t>(v) < n) return true;
    return false;
}

bool finite(const Eigen::VectorXcd& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i].real()) || !std::isfinite(x[i].imag())) return false;
    return true;
}

double norm_inf(const Eigen::VectorXcd& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

}  // namespace

ConsistentPoint consistent_point(const PolynomialSystem& parametric, std::mt19937_64& rng,
                                 const std::map<std::string, Complex>& fixed) {
    const std::size_t n = parametric.unknown_count();
    const std::size_t total = n + parametric.data_count();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[parametric.variables[i]] = i;
    for (std::size_t j = 0; j < parametric.data_count(); ++j) index[parametric.data_symbols[j]] = n + j;

    std::vector<int> defines(parametric.polys.size(), -1);
    std::vector<bool> known(total, true);
    for (std::size_t e = 0; e < parametric.polys.size(); ++e) {
        const auto it = e < parametric.labels.size() ? index.find(parametric.labels[e]) : index.end();
        if (it == index.end()) continue;
        defines[e] = static_cast<int>(it->second);
        known[it->second] = false;
    }
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Complex> value(total, Complex(0.0));
    for (std::size_t v = 0; v < total; ++v) {
        if (!known[v]) continue;
        const auto it = fixed.find(v < n ? parametric.variables[v] : parametric.data_symbols[v - n]);
        value[v] = it != fixed.end() ? it->second : Complex(g(rng), g(rng));
    }

    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t e = 0; e < parametric.polys.size(); ++e) {
            const int d = defines[e];
            if (d < 0 || known[static_cast<std::size_t>(d)]) continue;
            const auto& p = parametric.polys[e];
            bool ready = p.degree_in(d) == 1;
            for (int v : p.variables())
                if (v != d && !known[static_cast<std::size_t>(v)]) ready = false;
            if (!ready) continue;
            const std::span<const Complex> at(value);
            value[static_cast<std::size_t>(d)] =
                -p.substitute(d, ComplexPolynomial()).evaluate<Complex>(at) / p.derivative(d).evaluate<Complex>(at);
            known[static_cast<std::size_t>(d)] = true;
            progress = true;
        }
    }
    for (std::size_t v = 0; v < total; ++v)
        if (!known[v]) throw std::logic_error("consistent_point: cannot determine " + (v < n ? parametric.variables[v] : parametric.data_symbols[v - n]));
    ConsistentPoint pt;
    pt.unknowns = Eigen::Map<const Eigen::VectorXcd>(value.data(), static_cast<Eigen::Index>(n));
    pt.data = Eigen::Map<const Eigen::VectorXcd>(value.data() + n, static_cast<Eigen::Index>(parametric.data_count()));
    return pt;
}

SystemTemplate::SystemTemplate(const OdeModel& m, const std::map<std::string, int>& orders, const TrackerConfig& config)
    : orders_(orders), prolonged_(prolong(m, orders)), config_(config) {
    parametric_ = build_parametric_system(prolonged_);
    const ReducedSystem pre = presolve(parametric_);
    const SquaringResult sq = square_system(pre.system, 3, config.seed);
    std::size_t nonconstant = 0;
    for (const auto& p : pre.system.polys)
        if (has_unknowns(p, pre.system.unknown_count())) ++nonconstant;
    surplus_ = nonconstant - sq.selected.size();
    const ReducedSystem trimmed = eliminate_dangling(sq.system);
    square_ = trimmed.system;
    square_.residual_polys.clear();
    reduction_ = compose(pre.reduction, trimmed.reduction);
}

void SystemTemplate::prepare() const {
    if (prepared_) return;
    std::mt19937_64 rng(config_.seed + 17);
    // Random jets can make derived unknowns (inverses, top-order jets) huge;
    // solutions at such data are badly scaled and paths from them get lost.
    auto draw = [this](std::mt19937_64& r) {
        ConsistentPoint best = consistent_point(parametric_, r);
        for (int i = 1; i < 8; ++i) {
            ConsistentPoint p = consistent_point(parametric_, r);
            if (p.unknowns.cwiseAbs().maxCoeff() < best.unknowns.cwiseAbs().maxCoeff()) best = std::move(p);
        }
        return best;
    };
    const ConsistentPoint start = draw(rng);
    generic_data_ = start.data;
    if (square_.unknown_count() == 0) {
        generic_solutions_ = {Eigen::VectorXcd()};
        generic_method_ = "none";
    } else if (square_.bezout_number() <= config_.template_total_degree_paths) {
        const SolutionSet set = solve_total_degree(square_.instantiate(generic_data_), config_);
        for (const auto& s : set.solutions)
            if (s.polished) generic_solutions_.push_back(s.point);
        generic_method_ = "total-degree";
    } else {
        const MonodromyResult mono = solve_monodromy(square_, reduction_.restrict(start.unknowns), generic_data_, config_,
                                                    [&draw](std::mt19937_64& r) { return draw(r).data; });
        generic_solutions_ = mono.solutions;
        generic_method_ = "monodromy";
    }
    prepared_ = true;
}

std::size_t SystemTemplate::generic_solution_count() const {
    prepare();
    return generic_solutions_.size();
}

SolutionSet SystemTemplate::solve(const Eigen::VectorXcd& data) const {
    prepare();
    if (static_cast<std::size_t>(data.size()) != parametric_.data_count())
        throw std::invalid_argument("SystemTemplate::solve: wrong number of data values");
    SolutionSet reduced;
    if (square_.unknown_count() == 0) {
        reduced.solutions.push_back({Eigen::VectorXcd(), 0.0, true, true});
        reduced.method = "none";
    } else {
        reduced = track_parameter(square_, generic_data_, generic_solutions_, data, config_);
    }
    const PolynomialSystem full = parametric_.instantiate(data);
    SolutionSet out;
    out.method = reduced.method;
    out.paths_tracked = reduced.paths_tracked;
    out.failed_paths = reduced.failed_paths;
    out.diverged_paths = reduced.diverged_paths;
    for (const auto& s : reduced.solutions) {
        Solution lifted;
        lifted.point = reduction_.lift(s.point, data);
        if (!finite(lifted.point)) continue;
        bool violates = false;
        for (const auto& side : full.side_conditions)
            if (scaled_value(side, lifted.point) < config_.side_condition_tol) violates = true;
        if (violates) continue;
        bool duplicate = false;
        for (const auto& prev : out.solutions)
            if (norm_inf(prev.point - lifted.point) <= config_.dedupe_tol * std::max(1.0, norm_inf(lifted.point)))
                duplicate = true;
        if (duplicate) continue;
        lifted.polished = s.polished;
        lifted.residual = scaled_residual(full.polys, lifted.point);
        lifted.real = true;
        for (Eigen::Index i = 0; i < lifted.point.size(); ++i)
            if (std::abs(lifted.point[i].imag()) > config_.real_tol * std::max(1.0, std::abs(lifted.point[i])))
                lifted.real = false;
        out.solutions.push_back(std::move(lifted));
    }
    return out;
}

SystemTemplate make_template(const OdeModel& m, const TrackerConfig& config, std::map<std::string, int> orders) {
    if (orders.empty())
        for (const auto& y : m.outputs()) orders[y] = 1;
    const int cap = static_cast<int>(m.states().size() + m.parameters().size()) + 2;
    const auto& outputs = m.outputs();
    std::size_t next = 0;
    std::string last_error = "no surplus equation";
    auto attempt = [&](const std::map<std::string, int>& o) -> std::optional<SystemTemplate> {
        try {
            SystemTemplate t(m, o, config);
            if (t.surplus() > 0) return t;
        } catch (const RankDeficiencyError& e) {
            last_error = e.what();
        }
        return std::nullopt;
    };
    for (;;) {
        if (auto t = attempt(orders)) {
            // lower each order as far as it goes, highest first
            bool lowered = true;
            while (lowered) {
                lowered = false;
                std::vector<std::string> by_order(outputs.begin(), outputs.end());
                std::stable_sort(by_order.begin(), by_order.end(),
                                 [&](const std::string& a, const std::string& b) { return orders[a] > orders[b]; });
                for (const auto& y : by_order) {
                    if (orders[y] == 0) continue;
                    auto lower = orders;
                    --lower[y];
                    if (auto u = attempt(lower)) {
                        orders = std::move(lower);
                        t = std::move(u);
                        lowered = true;
                        break;
                    }
                }
            }
            return std::move(*t);
        }
        bool raised = false;
        for (std::size_t k = 0; k < outputs.size() && !raised; ++k) {
            const std::string& y = outputs[(next + k) % outputs.size()];
            if (orders[y] < cap) {
                ++orders[y];
                next = (next + k + 1) % outputs.size();
                raised = true;
            }
        }
        if (!raised) throw RankDeficiencyError("prolongation up to order " + std::to_string(cap) + ": " + last_error, 0, 0);
    }
}

}  // namespace paramest
