#include "paramest/prolongation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "paramest/series.hpp"

namespace paramest {

std::string jet_name(const std::string& base, int order) { return base + "[" + std::to_string(order) + "]"; }

std::optional<JetVariable> parse_jet_name(const std::string& name) {
    const std::size_t open = name.find('[');
    if (open == std::string::npos || open == 0 || name.back() != ']') return std::nullopt;
    const std::string digits = name.substr(open + 1, name.size() - open - 2);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::nullopt;
    return JetVariable{name.substr(0, open), std::stoi(digits)};
}

namespace {

RationalExpr derivative_impl(const RationalExpr& bare, const OdeModel& m, bool lie) {
    std::map<std::string, RationalExpr> to_jets;
    for (const auto& x : m.states()) to_jets.emplace(x, RationalExpr::symbol(jet_name(x, 0)));
    for (const auto& u : m.inputs()) to_jets.emplace(u, RationalExpr::symbol(jet_name(u, 0)));
    const RationalExpr e = substitute(bare, to_jets);
    std::vector<RationalExpr> terms;
    for (const auto& s : free_symbols(e)) {
        RationalExpr ds;
        if (s == time_symbol) {
            ds = RationalExpr(1);
        } else if (auto jet = parse_jet_name(s)) {
            if (m.state_index(jet->base) >= 0) {
                ds = (lie && jet->order == 0) ? substitute(m.rhs_of_state(jet->base), to_jets)
                                              : RationalExpr::symbol(jet_name(jet->base, jet->order + 1));
            } else if (m.input_index(jet->base) >= 0) {
                ds = RationalExpr::symbol(jet_name(jet->base, jet->order + 1));
            } else {
                continue;
            }
        } else {
            continue;  // parameter
        }
        terms.push_back(diff_expr(e, s) * ds);
    }
    if (terms.empty()) return RationalExpr(0);
    return simplify(RationalExpr::sum(std::move(terms)));
}

}  // namespace

RationalExpr formal_derivative(const RationalExpr& e, const OdeModel& m) { return derivative_impl(e, m, false); }

RationalExpr total_derivative(const RationalExpr& e, const OdeModel& m) { return derivative_impl(e, m, true); }

std::map<std::string, int> default_orders(const OdeModel& m) {
    const std::size_t n = m.states().size();
    const std::size_t p = m.parameters().size();
    const std::size_t outputs = m.outputs().size();
    const int nu = static_cast<int>((n + p + 1 + outputs - 1) / outputs);
    std::map<std::string, int> orders;
    for (const auto& y : m.outputs()) orders[y] = nu;
    return orders;
}

int ProlongedSystem::variable_index(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

namespace {
void collect_vars(const RationalPolynomial& p, std::set<int>& out) {
    for (const auto& [m, c] : p.terms())
        for (const auto& f : m.factors()) out.insert(f.first);
}
}  // namespace

std::vector<int> ProlongedSystem::unknowns() const {
    std::set<int> used;
    for (const auto& e : outputs_) {
        collect_vars(e.numerator, used);
        collect_vars(e.denominator, used);
    }
    for (const auto& c : constraints_) {
        collect_vars(c.numerator, used);
        collect_vars(c.denominator, used);
        used.insert(variable_index(jet_name(c.state, c.order)));
    }
    for (const auto& a : aux_relations_) collect_vars(a.relation, used);
    std::vector<int> out;
    for (int v : used) {
        const auto kind = variables_[static_cast<std::size_t>(v)].kind;
        if (kind == VariableKind::parameter || kind == VariableKind::state_jet || kind == VariableKind::aux_jet)
            out.push_back(v);
    }
    return out;
}

std::vector<std::string> ProlongedSystem::absent_unknowns() const {
    const std::vector<int> used = unknowns();
    std::set<std::string> names;
    for (int v : used) names.insert(variables_[static_cast<std::size_t>(v)].name);
    std::vector<std::string> absent;
    for (const auto& p : model_parameters_)
        if (names.count(p) == 0) absent.push_back(p);
    for (const auto& x : model_states_)
        if (names.count(jet_name(x, 0)) == 0) absent.push_back(x);
    return absent;
}

RationalExpr ProlongedSystem::to_expr(const RationalPolynomial& p) const {
    std::vector<RationalExpr> terms;
    for (const auto& [m, c] : p.terms()) {
        std::vector<RationalExpr> factors;
        if (!(c == 1) || m.is_one()) factors.push_back(RationalExpr::constant(c));
        for (const auto& [v, e] : m.factors()) {
            RationalExpr s = RationalExpr::symbol(variables_[static_cast<std::size_t>(v)].name);
            factors.push_back(e == 1 ? s : RationalExpr::power(s, e));
        }
        terms.push_back(RationalExpr::product(std::move(factors)));
    }
    if (terms.empty()) return RationalExpr(0);
    return RationalExpr::sum(std::move(terms));
}

RationalExpr ProlongedSystem::output_expr(const std::string& output, int order) const {
    for (const auto& e : outputs_) {
        if (e.output == output && e.order == order) {
            if (e.denominator == RationalPolynomial(Rational(1))) return to_expr(e.numerator);
            return RationalExpr::quotient(to_expr(e.numerator), to_expr(e.denominator));
        }
    }
    throw ModelError("no equation for " + output + " at order " + std::to_string(order));
}

RationalExpr ProlongedSystem::constraint_expr(const JetConstraint& c) const {
    if (c.denominator == RationalPolynomial(Rational(1))) return to_expr(c.numerator);
    return RationalExpr::quotient(to_expr(c.numerator), to_expr(c.denominator));
}

/// Builds a ProlongedSystem: canonical polynomial forms, auxiliary inverses,
/// and the closure of jet constraints.
class Prolonger {
public:
    Prolonger(const OdeModel& m, ProlongedSystem& sys) : m_(m), sys_(sys) {
        for (const auto& p : m.parameters()) var(ProlongedSystem::VariableKind::parameter, p, 0);
        for (const auto& x : m.states()) var(ProlongedSystem::VariableKind::state_jet, x, 0);
    }

    struct Frac {
        RationalPolynomial num;
        RationalPolynomial den;
    };

    int var(ProlongedSystem::VariableKind kind, const std::string& base, int order) {
        using K = ProlongedSystem::VariableKind;
        std::string name;
        switch (kind) {
        case K::parameter: name = base; break;
        case K::time: name = std::string(time_symbol); break;
        default: name = jet_name(base, order);
        }
        auto it = sys_.index_.find(name);
        if (it != sys_.index_.end()) return it->second;
        const int idx = static_cast<int>(sys_.variables_.size());
        sys_.variables_.push_back({name, kind, base, order});
        sys_.index_.emplace(name, idx);
        return idx;
    }

    const ProlongedSystem::Variable& info(int v) const { return sys_.variables_[static_cast<std::size_t>(v)]; }

    bool parameter_only(const RationalPolynomial& p) const {
        for (const auto& [m, c] : p.terms())
            for (const auto& f : m.factors())
                if (info(f.first).kind != ProlongedSystem::VariableKind::parameter) return false;
        return true;
    }

    RationalPolynomial D(const RationalPolynomial& p) {
        using K = ProlongedSystem::VariableKind;
        RationalPolynomial r;
        for (const auto& [m, c] : p.terms()) {
            for (const auto& [v, e] : m.factors()) {
                const auto kind = info(v).kind;
                if (kind == K::parameter) continue;
                Monomial reduced = m.with_exponent(v, e - 1);
                if (kind != K::time) {
                    const std::string base = info(v).base;
                    const int order = info(v).order;
                    reduced = reduced * Monomial::variable(var(kind, base, order + 1));
                }
                r.add_term(reduced, c * e);
            }
        }
        return r;
    }

    Frac convert(const RationalExpr& e) {
        using K = ProlongedSystem::VariableKind;
        const RationalPolynomial one(Rational(1));
        switch (e.kind()) {
        case ExprKind::constant: {
            const Number& n = e.number();
            return {RationalPolynomial(n.is_float() ? Rational(n.to_double()) : n.exact()), one};
        }
        case ExprKind::symbol: {
            const std::string& s = e.name();
            if (s == time_symbol) return {RationalPolynomial::variable(var(K::time, s, 0)), one};
            auto kind = m_.kind_of(s);
            if (!kind) throw ModelError("unknown symbol '" + s + "'");
            switch (*kind) {
            case SymbolKind::state: return {RationalPolynomial::variable(var(K::state_jet, s, 0)), one};
            case SymbolKind::parameter: return {RationalPolynomial::variable(var(K::parameter, s, 0)), one};
            case SymbolKind::input: return {RationalPolynomial::variable(var(K::input_jet, s, 0)), one};
            default: throw ModelError("symbol '" + s + "' cannot appear in a right-hand side");
            }
        }
        case ExprKind::sum: {
            Frac acc{RationalPolynomial(), one};
            for (const auto& c : e.children()) {
                Frac t = convert(c);
                if (t.den == acc.den) {
                    acc.num += t.num;
                } else {
                    acc.num = acc.num * t.den + t.num * acc.den;
                    acc.den = acc.den * t.den;
                }
            }
            return acc;
        }
        case ExprKind::product: {
            Frac acc{one, one};
            for (const auto& c : e.children()) {
                Frac t = convert(c);
                acc.num *= t.num;
                acc.den *= t.den;
            }
            return acc;
        }
        case ExprKind::negation: {
            Frac t = convert(e.children()[0]);
            return {-t.num, t.den};
        }
        case ExprKind::quotient: {
            Frac a = convert(e.children()[0]);
            Frac b = invert(convert(e.children()[1]));
            return {a.num * b.num, a.den * b.den};
        }
        case ExprKind::power: {
            Frac base = convert(e.children()[0]);
            const int k = e.exponent();
            if (k >= 0) return {base.num.pow(k), base.den.pow(k)};
            Frac inv = invert(base);
            return {inv.num.pow(-k), inv.den.pow(-k)};
        }
        }
        throw ModelError("unsupported expression");
    }

    Frac invert(const Frac& f) {
        if (f.num.is_zero()) throw PoleError("denominator is identically zero");
        if (parameter_only(f.num)) return {f.den, f.num};
        return {f.den * RationalPolynomial::variable(aux_for(f.num)), RationalPolynomial(Rational(1))};
    }

    int aux_for(const RationalPolynomial& factor) {
        for (const auto& [name, F] : sys_.aux_factors_)
            if (F == factor) return var(ProlongedSystem::VariableKind::aux_jet, name, 0);
        const std::string name = "$inv" + std::to_string(sys_.aux_factors_.size() + 1);
        sys_.aux_factors_.emplace(name, factor);
        aux_order_.push_back(name);
        return var(ProlongedSystem::VariableKind::aux_jet, name, 0);
    }

    void add_side_condition(const RationalPolynomial& p) {
        if (p.is_constant()) return;
        for (const auto& s : sys_.side_conditions_)
            if (s == p) return;
        sys_.side_conditions_.push_back(p);
    }

    void run(const std::map<std::string, int>& orders) {
        using K = ProlongedSystem::VariableKind;
        std::vector<Frac> f;
        for (const auto& rhs : m_.state_rhs()) f.push_back(convert(rhs));
        std::vector<Frac> g;
        for (const auto& rhs : m_.output_rhs()) g.push_back(convert(rhs));

        for (std::size_t k = 0; k < g.size(); ++k) {
            const std::string& y = m_.outputs()[k];
            RationalPolynomial cur = g[k].num;
            const int nu = orders.at(y);
            for (int j = 0; j <= nu; ++j) {
                sys_.outputs_.push_back({y, j, cur, g[k].den});
                if (j < nu) cur = D(cur);
            }
        }

        std::vector<std::vector<RationalPolynomial>> state_derivs(f.size());
        std::map<std::string, std::vector<RationalPolynomial>> aux_derivs;
        std::set<int> defined;
        std::deque<int> work;
        std::set<int> queued;
        auto enqueue = [&](const RationalPolynomial& p) {
            std::set<int> vars;
            collect_vars(p, vars);
            for (int v : vars)
                if (queued.insert(v).second) work.push_back(v);
        };
        for (const auto& e : sys_.outputs_) enqueue(e.numerator);

        while (!work.empty()) {
            const int v = work.front();
            work.pop_front();
            const ProlongedSystem::Variable vi = info(v);
            if (vi.kind == K::state_jet && vi.order >= 1) {
                const int i = m_.state_index(vi.base);
                auto& ds = state_derivs[static_cast<std::size_t>(i)];
                if (ds.empty()) ds.push_back(f[static_cast<std::size_t>(i)].num);
                while (static_cast<int>(ds.size()) < vi.order) ds.push_back(D(ds.back()));
                const RationalPolynomial& rhs = ds[static_cast<std::size_t>(vi.order - 1)];
                sys_.constraints_.push_back({vi.base, vi.order, rhs, f[static_cast<std::size_t>(i)].den});
                enqueue(rhs);
            } else if (vi.kind == K::aux_jet) {
                auto& ds = aux_derivs[vi.base];
                if (ds.empty())
                    ds.push_back(RationalPolynomial::variable(var(K::aux_jet, vi.base, 0)) *
                                 sys_.aux_factors_.at(vi.base));
                while (static_cast<int>(ds.size()) <= vi.order) ds.push_back(D(ds.back()));
                RationalPolynomial rel = ds[static_cast<std::size_t>(vi.order)];
                if (vi.order == 0) rel -= RationalPolynomial(Rational(1));
                sys_.aux_relations_.push_back({vi.base, vi.order, rel});
                enqueue(rel);
            }
        }

        std::sort(sys_.constraints_.begin(), sys_.constraints_.end(), [&](const auto& a, const auto& b) {
            if (a.order != b.order) return a.order < b.order;
            return m_.state_index(a.state) < m_.state_index(b.state);
        });
        auto aux_rank = [&](const std::string& name) {
            return std::find(aux_order_.begin(), aux_order_.end(), name) - aux_order_.begin();
        };
        std::sort(sys_.aux_relations_.begin(), sys_.aux_relations_.end(), [&](const auto& a, const auto& b) {
            if (a.order != b.order) return a.order < b.order;
            return aux_rank(a.aux) < aux_rank(b.aux);
        });

        for (const auto& fr : f) add_side_condition(fr.den);
        for (const auto& gr : g) add_side_condition(gr.den);
        for (const auto& name : aux_order_) add_side_condition(sys_.aux_factors_.at(name));
    }

private:
    const OdeModel& m_;
    ProlongedSystem& sys_;
    std::vector<std::string> aux_order_;
};

ProlongedSystem prolong(const OdeModel& m, const std::map<std::string, int>& orders) {
    for (const auto& y : m.outputs()) {
        auto it = orders.find(y);
        if (it == orders.end()) throw ModelError("no derivative order given for output '" + y + "'");
        if (it->second < 0) throw ModelError("derivative order for '" + y + "' must be non-negative");
    }
    ProlongedSystem sys;
    sys.orders_ = orders;
    sys.model_parameters_ = m.parameters();
    sys.model_states_ = m.states();
    Prolonger builder(m, sys);
    builder.run(orders);
    return sys;
}

JetValues taylor_coefficients(const OdeModel& m, const std::map<std::string, double>& params,
                              const std::map<std::string, double>& x_init, int order, double t0,
                              const std::map<std::string, std::vector<double>>& input_jets) {
    if (order < 0) throw ModelError("order must be non-negative");
    const std::size_t n = m.states().size();
    const std::size_t p = m.parameters().size();
    const std::size_t q = m.inputs().size();
    auto slot_of = [&](const std::string& s) -> int {
        if (s == time_symbol) return static_cast<int>(n + p + q);
        if (int i = m.state_index(s); i >= 0) return i;
        if (int i = m.parameter_index(s); i >= 0) return static_cast<int>(n) + i;
        if (int i = m.input_index(s); i >= 0) return static_cast<int>(n + p) + i;
        return -1;
    };
    std::vector<ExprProgram> f;
    for (const auto& rhs : m.state_rhs()) f.emplace_back(rhs, slot_of);
    std::vector<ExprProgram> g;
    for (const auto& rhs : m.output_rhs()) g.emplace_back(rhs, slot_of);

    const std::size_t len = static_cast<std::size_t>(order) + 1;
    std::vector<Series<double>> slots(n + p + q + 1);
    std::vector<std::vector<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = x_init.find(m.states()[i]);
        if (it == x_init.end()) throw ModelError("missing initial value for '" + m.states()[i] + "'");
        x[i].push_back(it->second);
    }
    for (std::size_t i = 0; i < p; ++i) {
        auto it = params.find(m.parameters()[i]);
        if (it == params.end()) throw ModelError("missing value for parameter '" + m.parameters()[i] + "'");
        slots[n + i] = Series<double>(it->second);
    }
    for (std::size_t i = 0; i < q; ++i) {
        std::vector<double> c(len, 0.0);
        auto it = input_jets.find(m.inputs()[i]);
        double fact = 1.0;
        for (std::size_t j = 0; j < len; ++j) {
            if (j > 0) fact *= static_cast<double>(j);
            if (it != input_jets.end() && j < it->second.size()) c[j] = it->second[j] / fact;
        }
        slots[n + p + i] = Series<double>(std::move(c));
    }
    slots[n + p + q] = Series<double>::variable(t0, len);

    for (std::size_t k = 0; k < len - 1; ++k) {
        for (std::size_t i = 0; i < n; ++i) slots[i] = Series<double>(x[i]);
        for (std::size_t i = 0; i < n; ++i) {
            const Series<double> fi = f[i].run<Series<double>>(slots);
            x[i].push_back(fi.coefficient(k) / static_cast<double>(k + 1));
        }
    }
    for (std::size_t i = 0; i < n; ++i) slots[i] = Series<double>(x[i]);

    JetValues out;
    auto to_derivs = [&](const std::vector<double>& coeffs) {
        std::vector<double> d(len, 0.0);
        double fact = 1.0;
        for (std::size_t j = 0; j < len; ++j) {
            if (j > 0) fact *= static_cast<double>(j);
            d[j] = (j < coeffs.size() ? coeffs[j] : 0.0) * fact;
        }
        return d;
    };
    for (std::size_t i = 0; i < n; ++i) out.states[m.states()[i]] = to_derivs(x[i]);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Series<double> y = g[k].run<Series<double>>(slots);
        out.outputs[m.outputs()[k]] = to_derivs(y.coefficients());
    }
    return out;
}

std::vector<double> variable_values(const ProlongedSystem& sys, const OdeModel& m,
                                    const std::map<std::string, double>& params,
                                    const std::map<std::string, double>& x_init, double t0,
                                    const std::map<std::string, std::vector<double>>& input_jets) {
    using K = ProlongedSystem::VariableKind;
    int max_order = 0;
    for (const auto& v : sys.variables()) max_order = std::max(max_order, v.order);
    const JetValues jets = taylor_coefficients(m, params, x_init, max_order + 1, t0, input_jets);

    const std::size_t len = static_cast<std::size_t>(max_order) + 2;
    std::vector<Series<double>> series(sys.variables().size());
    std::vector<double> values(sys.variables().size(), 0.0);
    auto as_series = [&](const std::vector<double>& derivs) {
        std::vector<double> c(len, 0.0);
        double fact = 1.0;
        for (std::size_t j = 0; j < len && j < derivs.size(); ++j) {
            if (j > 0) fact *= static_cast<double>(j);
            c[j] = derivs[j] / fact;
        }
        return Series<double>(std::move(c));
    };
    for (std::size_t v = 0; v < sys.variables().size(); ++v) {
        const auto& var = sys.variables()[v];
        switch (var.kind) {
        case K::parameter:
            values[v] = params.at(var.base);
            series[v] = Series<double>(values[v]);
            break;
        case K::state_jet:
            values[v] = jets.states.at(var.base)[static_cast<std::size_t>(var.order)];
            series[v] = var.order == 0 ? as_series(jets.states.at(var.base)) : Series<double>(values[v]);
            break;
        case K::input_jet: {
            auto it = input_jets.find(var.base);
            const std::size_t j = static_cast<std::size_t>(var.order);
            values[v] = (it != input_jets.end() && j < it->second.size()) ? it->second[j] : 0.0;
            series[v] = var.order == 0 && it != input_jets.end() ? as_series(it->second) : Series<double>(values[v]);
            break;
        }
        case K::time:
            values[v] = t0;
            series[v] = Series<double>::variable(t0, len);
            break;
        case K::aux_jet: break;
        }
    }
    // Aux factors are polynomials in order-0 jets (and earlier aux); evaluate
    // them as series in time and invert.
    for (const auto& [name, F] : sys.aux_factors()) {
        const auto Fd = F.map_coefficients<double>([](const Rational& c) { return to_double(c); });
        const Series<double> inv = Series<double>(1.0) / Fd.evaluate<Series<double>>(series);
        for (std::size_t v = 0; v < sys.variables().size(); ++v) {
            const auto& var = sys.variables()[v];
            if (var.kind != K::aux_jet || var.base != name) continue;
            values[v] = inv.derivative(static_cast<std::size_t>(var.order));
            if (var.order == 0) series[v] = inv;
        }
    }
    return values;
}

}  // namespace paramest
