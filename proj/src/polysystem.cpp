#include "paramest/polysystem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "paramest/errors.hpp"

namespace paramest {

namespace {

using Kind = ProlongedSystem::VariableKind;

ComplexPolynomial to_complex(const RationalPolynomial& p, const std::function<int(int)>& map) {
    return p.renumbered(map).map_coefficients<Complex>([](const Rational& c) { return Complex(to_double(c), 0.0); });
}

// Drops coefficients that are roundoff relative to the largest one.
void prune(ComplexPolynomial& p) {
    double big = 0.0;
    for (const auto& [m, c] : p.terms()) big = std::max(big, std::abs(c));
    if (big == 0.0) return;
    ComplexPolynomial r;
    for (const auto& [m, c] : p.terms())
        if (std::abs(c) > 1e-14 * big) r.add_term(m, c);
    p = std::move(r);
}

bool has_unknowns(const ComplexPolynomial& p, std::size_t n) {
    for (const auto& [m, c] : p.terms())
        for (const auto& f : m.factors())
            if (static_cast<std::size_t>(f.first) < n) return true;
    return false;
}

bool depends_on_any(const ComplexPolynomial& p, const std::vector<bool>& gone) {
    for (int v : p.variables())
        if (static_cast<std::size_t>(v) < gone.size() && gone[static_cast<std::size_t>(v)]) return true;
    return false;
}

// Working state for eliminations: polys stay in the original numbering.
struct Eliminator {
    const PolynomialSystem& sys;
    std::vector<ComplexPolynomial> polys;
    std::vector<std::string> labels;
    std::vector<ComplexPolynomial> sides;
    std::vector<bool> gone;
    Reduction red;

    explicit Eliminator(const PolynomialSystem& s)
        : sys(s), polys(s.polys), labels(s.labels), sides(s.side_conditions), gone(s.unknown_count(), false) {
        labels.resize(polys.size());
        red.original_unknowns = s.unknown_count();
        red.data = s.data_count();
    }

    void remove_equation(std::size_t i) {
        polys.erase(polys.begin() + static_cast<std::ptrdiff_t>(i));
        labels.erase(labels.begin() + static_cast<std::ptrdiff_t>(i));
    }

    ReducedSystem finish() {
        const std::size_t n = sys.unknown_count();
        std::vector<int> new_index(n, -1);
        PolynomialSystem out;
        for (std::size_t v = 0; v < n; ++v) {
            if (gone[v]) continue;
            new_index[v] = static_cast<int>(out.variables.size());
            red.kept.push_back(static_cast<int>(v));
            out.variables.push_back(sys.variables[v]);
        }
        const int n_new = static_cast<int>(out.variables.size());
        auto map = [&](int v) {
            if (static_cast<std::size_t>(v) >= n) return n_new + (v - static_cast<int>(n));
            return new_index[static_cast<std::size_t>(v)];
        };
        out.data_symbols = sys.data_symbols;
        if (!sys.scales.empty()) {
            for (int k : red.kept) out.scales.push_back(sys.scales[static_cast<std::size_t>(k)]);
            out.scales.insert(out.scales.end(), sys.scales.begin() + static_cast<std::ptrdiff_t>(n), sys.scales.end());
        }
        for (auto& p : polys) out.polys.push_back(p.renumbered(map));
        out.labels = labels;
        for (auto& s : sides)
            if (!depends_on_any(s, gone)) out.side_conditions.push_back(s.renumbered(map));
        // Residuals stay on the equations of the reduced system.
        return {std::move(out), std::move(red)};
    }
};

std::vector<Complex> joined(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    std::vector<Complex> v(static_cast<std::size_t>(a.size() + b.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) v[static_cast<std::size_t>(i)] = a[i];
    for (Eigen::Index i = 0; i < b.size(); ++i) v[static_cast<std::size_t>(a.size() + i)] = b[i];
    return v;
}

Eigen::VectorXcd random_point(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = Complex(g(rng), g(rng));
    return x;
}

Eigen::RowVectorXcd gradient_row(const ComplexPolynomial& p, std::size_t n, std::span<const Complex> at) {
    Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(static_cast<Eigen::Index>(n));
    for (int v : p.variables())
        if (static_cast<std::size_t>(v) < n) row[v] = p.derivative(v).evaluate<Complex>(at);
    return row;
}

int numeric_rank(const Eigen::MatrixXcd& rows) {
    if (rows.rows() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(rows);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > 1e-10 * s[0]) ++r;
    return r;
}

}  // namespace

int PolynomialSystem::variable_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i] == name) return static_cast<int>(i);
    return -1;
}

int unknown_degree(const ComplexPolynomial& p, std::size_t unknowns) {
    int d = 0;
    for (const auto& [m, c] : p.terms()) {
        int md = 0;
        for (const auto& f : m.factors())
            if (static_cast<std::size_t>(f.first) < unknowns) md += f.second;
        d = std::max(d, md);
    }
    return d;
}

std::vector<int> PolynomialSystem::degrees() const {
    std::vector<int> d;
    for (const auto& p : polys) d.push_back(unknown_degree(p, unknown_count()));
    return d;
}

std::uint64_t PolynomialSystem::bezout_number() const {
    constexpr std::uint64_t cap = std::uint64_t(1) << 62;
    std::uint64_t b = 1;
    for (int d : degrees()) {
        if (d == 0) continue;
        if (b > cap / static_cast<std::uint64_t>(d)) return cap;
        b *= static_cast<std::uint64_t>(d);
    }
    return b;
}

PolynomialSystem PolynomialSystem::instantiate(const Eigen::VectorXcd& data) const {
    if (static_cast<std::size_t>(data.size()) != data_count())
        throw std::invalid_argument("instantiate: expected " + std::to_string(data_count()) + " data values");
    const std::size_t n = unknown_count();
    auto inst = [&](const ComplexPolynomial& p) {
        ComplexPolynomial r;
        for (const auto& [m, c] : p.terms()) {
            Complex coef = c;
            Monomial mono;
            for (const auto& [v, e] : m.factors()) {
                if (static_cast<std::size_t>(v) < n)
                    mono = mono * Monomial::variable(v, e);
                else
                    coef *= std::pow(data[static_cast<Eigen::Index>(static_cast<std::size_t>(v) - n)], e);
            }
            r.add_term(mono, coef);
        }
        return r;
    };
    PolynomialSystem out;
    out.variables = variables;
    out.labels = labels;
    if (!scales.empty()) out.scales.assign(scales.begin(), scales.begin() + static_cast<std::ptrdiff_t>(n));
    for (const auto& p : polys) out.polys.push_back(inst(p));
    for (const auto& p : side_conditions) out.side_conditions.push_back(inst(p));
    for (const auto& p : residual_polys) out.residual_polys.push_back(inst(p));
    return out;
}

Eigen::VectorXcd PolynomialSystem::unscaled(const Eigen::VectorXcd& stored) const {
    Eigen::VectorXcd x = stored;
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] *= scale_of(static_cast<std::size_t>(i));
    return x;
}

double scaled_value(const ComplexPolynomial& p, const Eigen::VectorXcd& point) {
    const std::span<const Complex> x(point.data(), static_cast<std::size_t>(point.size()));
    Complex value(0.0);
    double scale = 0.0;
    for (const auto& [m, c] : p.terms()) {
        Complex t = c;
        double size = std::abs(c);
        for (const auto& [v, e] : m.factors()) {
            t *= std::pow(x[static_cast<std::size_t>(v)], e);
            size *= std::pow(std::max(1.0, std::abs(x[static_cast<std::size_t>(v)])), e);
        }
        value += t;
        scale += size;
    }
    return std::abs(value) / (scale + std::numeric_limits<double>::min());
}

double scaled_residual(const std::vector<ComplexPolynomial>& polys, const Eigen::VectorXcd& point) {
    double r = 0.0;
    for (const auto& p : polys) {
        if (p.is_zero()) continue;
        const double v = scaled_value(p, point);
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        r = std::max(r, v);
    }
    return r;
}

std::string estimate_symbol(const std::string& output, int order) {
    return output + "^(" + std::to_string(order) + ")";
}

PolynomialSystem build_parametric_system(const ProlongedSystem& ps) {
    PolynomialSystem sys;
    const auto& vars = ps.variables();
    const std::vector<int> unknowns = ps.unknowns();
    std::vector<int> map(vars.size(), -1);
    for (int v : unknowns) {
        map[static_cast<std::size_t>(v)] = static_cast<int>(sys.variables.size());
        sys.variables.push_back(vars[static_cast<std::size_t>(v)].name);
    }
    const int n = static_cast<int>(sys.variables.size());

    std::vector<const ProlongedSystem::OutputEquation*> outputs;
    for (const auto& e : ps.output_equations()) outputs.push_back(&e);
    std::stable_sort(outputs.begin(), outputs.end(), [](auto* a, auto* b) { return a->order < b->order; });
    for (const auto* e : outputs) sys.data_symbols.push_back(estimate_symbol(e->output, e->order));
    for (std::size_t v = 0; v < vars.size(); ++v) {
        if (vars[v].kind == Kind::input_jet || vars[v].kind == Kind::time) {
            map[v] = n + static_cast<int>(sys.data_symbols.size());
            sys.data_symbols.push_back(vars[v].name);
        }
    }
    auto mapper = [&](int v) {
        const int m = map[static_cast<std::size_t>(v)];
        if (m < 0) throw std::logic_error("estimation system: unmapped variable " + vars[static_cast<std::size_t>(v)].name);
        return m;
    };
    auto mapped = [&](const RationalPolynomial& p) {
        for (int v : p.variables())
            if (map[static_cast<std::size_t>(v)] < 0) return false;
        return true;
    };

    for (const auto& c : ps.jet_constraints()) {
        const int x = mapper(ps.variable_index(jet_name(c.state, c.order)));
        ComplexPolynomial eq = to_complex(c.denominator, mapper) * ComplexPolynomial::variable(x) - to_complex(c.numerator, mapper);
        sys.polys.push_back(std::move(eq));
        sys.labels.push_back(jet_name(c.state, c.order));
    }
    for (const auto& a : ps.aux_relations()) {
        sys.polys.push_back(to_complex(a.relation, mapper));
        sys.labels.push_back(jet_name(a.aux, a.order));
    }
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const auto* e = outputs[i];
        const auto q = ComplexPolynomial::variable(n + static_cast<int>(i));
        sys.polys.push_back(to_complex(e->denominator, mapper) * q - to_complex(e->numerator, mapper));
        sys.labels.push_back(sys.data_symbols[i]);
    }
    for (const auto& s : ps.side_conditions())
        if (!s.is_constant() && mapped(s)) sys.side_conditions.push_back(to_complex(s, mapper));

    // Taylor-coefficient units keep high-order jets comparable in size.
    sys.scales.assign(sys.variables.size() + sys.data_symbols.size(), 1.0);
    auto factorial = [](int j) {
        double f = 1.0;
        for (int i = 2; i <= j; ++i) f *= i;
        return f;
    };
    for (std::size_t v = 0; v < vars.size(); ++v)
        if (map[v] >= 0) sys.scales[static_cast<std::size_t>(map[v])] = factorial(vars[v].order);
    for (std::size_t i = 0; i < outputs.size(); ++i)
        sys.scales[static_cast<std::size_t>(n) + i] = factorial(outputs[i]->order);
    auto rescale = [&](ComplexPolynomial& p) {
        ComplexPolynomial r;
        for (const auto& [m, c] : p.terms()) {
            Complex k = c;
            for (const auto& [v, e] : m.factors()) k *= std::pow(sys.scales[static_cast<std::size_t>(v)], e);
            r.add_term(m, k);
        }
        p = std::move(r);
    };
    for (auto& p : sys.polys) rescale(p);
    for (auto& p : sys.side_conditions) rescale(p);
    return sys;
}

Eigen::VectorXcd data_vector(const PolynomialSystem& parametric, const std::map<JetKey, double>& jet_estimates,
                             const std::map<std::string, std::vector<double>>& input_jets, double t_eval) {
    Eigen::VectorXcd q(static_cast<Eigen::Index>(parametric.data_count()));
    for (std::size_t i = 0; i < parametric.data_count(); ++i) {
        const std::string& s = parametric.data_symbols[i];
        double value = 0.0;
        if (s == time_symbol) {
            value = t_eval;
        } else if (const auto hat = s.find("^("); hat != std::string::npos) {
            const JetKey key{s.substr(0, hat), std::stoi(s.substr(hat + 2))};
            const auto it = jet_estimates.find(key);
            if (it == jet_estimates.end())
                throw std::invalid_argument("missing derivative estimate for " + key.first + " of order " +
                                            std::to_string(key.second));
            value = it->second;
        } else if (const auto jet = parse_jet_name(s)) {
            const auto it = input_jets.find(jet->base);
            if (it != input_jets.end() && static_cast<std::size_t>(jet->order) < it->second.size())
                value = it->second[static_cast<std::size_t>(jet->order)];
        }
        q[static_cast<Eigen::Index>(i)] = Complex(value / parametric.scale_of(parametric.unknown_count() + i), 0.0);
    }
    return q;
}

PolynomialSystem build_estimation_system(const ProlongedSystem& ps, const std::map<JetKey, double>& jet_estimates,
                                         const std::map<std::string, std::vector<double>>& input_jets, double t_eval) {
    const PolynomialSystem parametric = build_parametric_system(ps);
    return parametric.instantiate(data_vector(parametric, jet_estimates, input_jets, t_eval));
}

Eigen::VectorXcd Reduction::lift(const Eigen::VectorXcd& reduced, const Eigen::VectorXcd& data_values) const {
    if (static_cast<std::size_t>(reduced.size()) != kept.size())
        throw std::invalid_argument("lift: wrong number of reduced unknowns");
    if (!steps.empty() && static_cast<std::size_t>(data_values.size()) != data)
        throw std::invalid_argument("lift: wrong number of data values");
    std::vector<Complex> full(original_unknowns + static_cast<std::size_t>(data_values.size()), Complex(0.0));
    for (std::size_t i = 0; i < kept.size(); ++i)
        full[static_cast<std::size_t>(kept[i])] = reduced[static_cast<Eigen::Index>(i)];
    for (Eigen::Index j = 0; j < data_values.size(); ++j)
        full[original_unknowns + static_cast<std::size_t>(j)] = data_values[j];
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        const std::span<const Complex> at(full);
        full[static_cast<std::size_t>(it->variable)] =
            it->numerator.evaluate<Complex>(at) / it->denominator.evaluate<Complex>(at);
    }
    Eigen::VectorXcd out(static_cast<Eigen::Index>(original_unknowns));
    for (std::size_t i = 0; i < original_unknowns; ++i) out[static_cast<Eigen::Index>(i)] = full[i];
    return out;
}

Eigen::VectorXcd Reduction::restrict(const Eigen::VectorXcd& full) const {
    Eigen::VectorXcd out(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) out[static_cast<Eigen::Index>(i)] = full[kept[i]];
    return out;
}

ReducedSystem presolve(const PolynomialSystem& sys) {
    Eliminator el(sys);
    const std::size_t n = sys.unknown_count();
    for (;;) {
        int best_eq = -1;
        int best_var = -1;
        double best_mag = 0.0;
        for (std::size_t i = 0; i < el.polys.size(); ++i) {
            const auto& p = el.polys[i];
            if (!has_unknowns(p, n) || unknown_degree(p, n) != 1) continue;
            // A pivot is an unknown whose only occurrence is a bare numeric term.
            std::map<int, int> count;
            for (const auto& [m, c] : p.terms())
                for (const auto& f : m.factors())
                    if (static_cast<std::size_t>(f.first) < n) ++count[f.first];
            for (const auto& [v, k] : count) {
                if (k != 1) continue;
                const auto it = p.terms().find(Monomial::variable(v));
                if (it == p.terms().end() || std::abs(it->second) <= best_mag) continue;
                best_eq = static_cast<int>(i);
                best_var = v;
                best_mag = std::abs(it->second);
            }
            if (best_eq >= 0) break;
        }
        if (best_eq < 0) break;
        const auto& p = el.polys[static_cast<std::size_t>(best_eq)];
        const Complex c = p.terms().at(Monomial::variable(best_var));
        ComplexPolynomial value = (p - ComplexPolynomial::term(Monomial::variable(best_var), c)).scaled(-1.0 / c);
        el.red.steps.push_back({best_var, value, ComplexPolynomial(Complex(1.0))});
        el.gone[static_cast<std::size_t>(best_var)] = true;
        el.remove_equation(static_cast<std::size_t>(best_eq));
        for (auto& q : el.polys) {
            if (!q.depends_on(best_var)) continue;
            q = q.substitute(best_var, value);
            prune(q);
        }
        for (auto& s : el.sides)
            if (s.depends_on(best_var)) s = s.substitute(best_var, value);
    }
    return el.finish();
}

ReducedSystem eliminate_dangling(const PolynomialSystem& sys) {
    Eliminator el(sys);
    const std::size_t n = sys.unknown_count();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = static_cast<int>(n) - 1; v >= 0; --v) {
            if (el.gone[static_cast<std::size_t>(v)]) continue;
            int where = -1;
            int count = 0;
            for (std::size_t i = 0; i < el.polys.size(); ++i) {
                if (el.polys[i].depends_on(v)) {
                    ++count;
                    where = static_cast<int>(i);
                }
            }
            if (count != 1) continue;
            const auto& p = el.polys[static_cast<std::size_t>(where)];
            if (p.degree_in(v) != 1) continue;
            el.red.steps.push_back({v, -p.substitute(v, ComplexPolynomial()), p.derivative(v)});
            el.gone[static_cast<std::size_t>(v)] = true;
            el.remove_equation(static_cast<std::size_t>(where));
            changed = true;
        }
    }
    return el.finish();
}

Reduction compose(const Reduction& outer, const Reduction& inner) {
    Reduction r;
    r.original_unknowns = outer.original_unknowns;
    r.data = outer.data;
    r.steps = outer.steps;
    const int mid_n = static_cast<int>(inner.original_unknowns);
    const int orig_n = static_cast<int>(outer.original_unknowns);
    auto map = [&](int v) { return v < mid_n ? outer.kept[static_cast<std::size_t>(v)] : orig_n + (v - mid_n); };
    for (const auto& s : inner.steps)
        r.steps.push_back({map(s.variable), s.numerator.renumbered(map), s.denominator.renumbered(map)});
    for (int k : inner.kept) r.kept.push_back(outer.kept[static_cast<std::size_t>(k)]);
    return r;
}

int jacobian_rank(const std::vector<ComplexPolynomial>& polys, std::size_t unknowns, const Eigen::VectorXcd& point) {
    const std::span<const Complex> at(point.data(), static_cast<std::size_t>(point.size()));
    Eigen::MatrixXcd rows(static_cast<Eigen::Index>(polys.size()), static_cast<Eigen::Index>(unknowns));
    for (std::size_t i = 0; i < polys.size(); ++i) {
        Eigen::RowVectorXcd g = gradient_row(polys[i], unknowns, at);
        const double norm = g.norm();
        rows.row(static_cast<Eigen::Index>(i)) = norm > 0 ? Eigen::RowVectorXcd(g / norm) : g;
    }
    return numeric_rank(rows);
}

SquaringResult square_system(const PolynomialSystem& sys, int trial_points, std::uint64_t seed) {
    const std::size_t n = sys.unknown_count();
    std::mt19937_64 rng(seed);
    int best = 0;
    for (int trial = 0; trial < std::max(trial_points, 1); ++trial) {
        const auto point = joined(random_point(n, rng), random_point(sys.data_count(), rng));
        std::vector<std::size_t> selected;
        Eigen::MatrixXcd rows(0, static_cast<Eigen::Index>(n));
        int rank = 0;
        for (std::size_t i = 0; i < sys.polys.size() && static_cast<std::size_t>(rank) < n; ++i) {
            if (!has_unknowns(sys.polys[i], n)) continue;
            Eigen::RowVectorXcd g = gradient_row(sys.polys[i], n, point);
            const double norm = g.norm();
            if (norm == 0.0) continue;
            Eigen::MatrixXcd next(rows.rows() + 1, rows.cols());
            next << rows, g / norm;
            const int r = numeric_rank(next);
            if (r > rank) {
                rows = std::move(next);
                rank = r;
                selected.push_back(i);
            }
        }
        best = std::max(best, rank);
        if (static_cast<std::size_t>(rank) == n) {
            SquaringResult out;
            out.selected = selected;
            out.system.variables = sys.variables;
            out.system.data_symbols = sys.data_symbols;
            out.system.side_conditions = sys.side_conditions;
            out.system.scales = sys.scales;
            out.system.residual_polys = sys.residual_system();
            for (std::size_t i : selected) {
                out.system.polys.push_back(sys.polys[i]);
                out.system.labels.push_back(i < sys.labels.size() ? sys.labels[i] : std::string());
            }
            return out;
        }
    }
    std::ostringstream msg;
    msg << "Jacobian rank " << best << " is below the " << n << " unknowns";
    throw RankDeficiencyError(msg.str(), best, static_cast<int>(n));
}

}  // namespace paramest
