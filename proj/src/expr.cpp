#include "paramest/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

namespace paramest {

// ---------------------------------------------------------------------------
// Number

double Number::to_double() const { return is_float_ ? real_ : paramest::to_double(exact_); }

bool Number::is_zero() const { return is_float_ ? real_ == 0.0 : exact_ == 0; }

bool Number::is_one() const { return is_float_ ? real_ == 1.0 : exact_ == 1; }

bool Number::is_negative() const { return is_float_ ? real_ < 0.0 : exact_ < 0; }

Number operator+(const Number& a, const Number& b) {
    if (a.is_float_ || b.is_float_) return Number(a.to_double() + b.to_double());
    return Number(a.exact_ + b.exact_);
}

Number operator-(const Number& a, const Number& b) {
    if (a.is_float_ || b.is_float_) return Number(a.to_double() - b.to_double());
    return Number(a.exact_ - b.exact_);
}

Number operator*(const Number& a, const Number& b) {
    if (a.is_float_ || b.is_float_) return Number(a.to_double() * b.to_double());
    return Number(a.exact_ * b.exact_);
}

Number operator/(const Number& a, const Number& b) {
    if (b.is_zero()) throw PoleError("division by zero constant");
    if (a.is_float_ || b.is_float_) return Number(a.to_double() / b.to_double());
    return Number(a.exact_ / b.exact_);
}

Number operator-(const Number& a) { return a.is_float_ ? Number(-a.real_) : Number(Rational(-a.exact_)); }

int compare(const Number& a, const Number& b) {
    if (a.is_float_ != b.is_float_) return a.is_float_ ? 1 : -1;
    if (a.is_float_) return a.real_ < b.real_ ? -1 : (a.real_ > b.real_ ? 1 : 0);
    return a.exact_ < b.exact_ ? -1 : (a.exact_ > b.exact_ ? 1 : 0);
}

Number pow(const Number& base, int exponent) {
    if (exponent < 0) return Number(Rational(1)) / pow(base, -exponent);
    Number result(Rational(1));
    for (int i = 0; i < exponent; ++i) result = result * base;
    return result;
}

// ---------------------------------------------------------------------------
// RationalExpr

struct RationalExpr::Node {
    ExprKind kind = ExprKind::constant;
    Number number;
    std::string name;
    int exponent = 0;
    std::vector<RationalExpr> children;
};

RationalExpr::RationalExpr() : RationalExpr(Number(Rational(0))) {}

RationalExpr::RationalExpr(int value) : RationalExpr(Number(Rational(value))) {}

RationalExpr::RationalExpr(Number value) {
    auto node = std::make_shared<Node>();
    node->kind = ExprKind::constant;
    node->number = std::move(value);
    node_ = std::move(node);
}

RationalExpr::RationalExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

RationalExpr RationalExpr::constant(Rational value) { return RationalExpr(Number(std::move(value))); }

RationalExpr RationalExpr::real(double value) { return RationalExpr(Number(value)); }

RationalExpr RationalExpr::symbol(std::string name) {
    auto node = std::make_shared<Node>();
    node->kind = ExprKind::symbol;
    node->name = std::move(name);
    return RationalExpr(std::move(node));
}

RationalExpr RationalExpr::sum(std::vector<RationalExpr> terms) {
    if (terms.empty()) return RationalExpr(0);
    if (terms.size() == 1) return terms.front();
    auto node = std::make_shared<Node>();
    node->kind = ExprKind::sum;
    node->children = std::move(terms);
    return RationalExpr(std::move(node));
}

RationalExpr RationalExpr::product(std::vector<RationalExpr> factors) {
    if (factors.empty()) return RationalExpr(1);
    if (factors.size() == 1) return factors.front();
    auto node = std::make_shared<Node>();
    node->kind = ExprKind::product;
    node->children = std::move(factors);
    return RationalExpr(std::move(node));
}

RationalExpr RationalExpr::negation(RationalExpr operand) {
    auto node = std::make_shared<Node>();
    node->kind = ExprKind::negation;
    node->children.push_back(std::move(operand));
    return RationalExpr(std::move(node));
}

RationalExpr RationalExpr::quotient(RationalExpr numerator, RationalExpr denominator) {
    if (denominator.is_zero()) throw ModelError("quotient with a zero denominator");
    auto node = std::make_shared<Node>();
    node->kind = ExprKind::quotient;
    node->children.push_back(std::move(numerator));
    node->children.push_back(std::move(denominator));
    return RationalExpr(std::move(node));
}

RationalExpr RationalExpr::power(RationalExpr base, int exponent) {
    auto node = std::make_shared<Node>();
    node->kind = ExprKind::power;
    node->exponent = exponent;
    node->children.push_back(std::move(base));
    return RationalExpr(std::move(node));
}

ExprKind RationalExpr::kind() const noexcept { return node_->kind; }

const std::vector<RationalExpr>& RationalExpr::children() const noexcept { return node_->children; }

const Number& RationalExpr::number() const { return node_->number; }

const std::string& RationalExpr::name() const { return node_->name; }

int RationalExpr::exponent() const { return node_->exponent; }

bool RationalExpr::is_zero() const { return kind() == ExprKind::constant && number().is_zero(); }

bool RationalExpr::is_one() const { return kind() == ExprKind::constant && number().is_one(); }

int compare(const RationalExpr& a, const RationalExpr& b) {
    if (a.node_ == b.node_) return 0;
    if (a.kind() != b.kind()) return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
    switch (a.kind()) {
    case ExprKind::constant: return compare(a.number(), b.number());
    case ExprKind::symbol: return a.name() < b.name() ? -1 : (a.name() > b.name() ? 1 : 0);
    case ExprKind::power:
        if (a.exponent() != b.exponent()) return a.exponent() < b.exponent() ? -1 : 1;
        break;
    default: break;
    }
    const auto& ca = a.children();
    const auto& cb = b.children();
    const std::size_t n = std::min(ca.size(), cb.size());
    for (std::size_t i = 0; i < n; ++i) {
        const int c = compare(ca[i], cb[i]);
        if (c != 0) return c;
    }
    if (ca.size() != cb.size()) return ca.size() < cb.size() ? -1 : 1;
    return 0;
}

RationalExpr operator+(const RationalExpr& a, const RationalExpr& b) { return RationalExpr::sum({a, b}); }

RationalExpr operator-(const RationalExpr& a, const RationalExpr& b) {
    return RationalExpr::sum({a, RationalExpr::negation(b)});
}

RationalExpr operator*(const RationalExpr& a, const RationalExpr& b) { return RationalExpr::product({a, b}); }

RationalExpr operator/(const RationalExpr& a, const RationalExpr& b) { return RationalExpr::quotient(a, b); }

RationalExpr operator-(const RationalExpr& a) { return RationalExpr::negation(a); }

RationalExpr pow(const RationalExpr& base, int exponent) { return RationalExpr::power(base, exponent); }

// ---------------------------------------------------------------------------
// Printing

namespace {

constexpr int prec_sum = 1;
constexpr int prec_product = 2;
constexpr int prec_unary = 3;
constexpr int prec_power = 4;
constexpr int prec_atom = 5;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

int precedence(const RationalExpr& e) {
    switch (e.kind()) {
    case ExprKind::constant: {
        const Number& n = e.number();
        if (n.is_negative()) return prec_unary;
        if (!n.is_float() && !is_decimal(n.exact())) return prec_product;
        return prec_atom;
    }
    case ExprKind::symbol: return prec_atom;
    case ExprKind::sum: return prec_sum;
    case ExprKind::product:
    case ExprKind::quotient: return prec_product;
    case ExprKind::negation: return prec_unary;
    case ExprKind::power: return prec_power;
    }
    return prec_atom;
}

void print(const RationalExpr& e, std::string& out);

void print_wrapped(const RationalExpr& e, bool parens, std::string& out) {
    if (parens) out += '(';
    print(e, out);
    if (parens) out += ')';
}

void print(const RationalExpr& e, std::string& out) {
    switch (e.kind()) {
    case ExprKind::constant: {
        const Number& n = e.number();
        if (n.is_float()) {
            out += format_double(n.to_double());
        } else {
            out += to_string(n.exact());
        }
        break;
    }
    case ExprKind::symbol: out += e.name(); break;
    case ExprKind::sum: {
        const auto& terms = e.children();
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const RationalExpr& t = terms[i];
            if (i == 0) {
                print_wrapped(t, precedence(t) <= prec_sum, out);
            } else if (t.kind() == ExprKind::negation) {
                out += " - ";
                print_wrapped(t.children()[0], precedence(t.children()[0]) <= prec_sum, out);
            } else {
                out += " + ";
                print_wrapped(t, precedence(t) <= prec_sum, out);
            }
        }
        break;
    }
    case ExprKind::product: {
        const auto& factors = e.children();
        for (std::size_t i = 0; i < factors.size(); ++i) {
            const RationalExpr& f = factors[i];
            if (i > 0) out += '*';
            const int p = precedence(f);
            const bool parens = i == 0 ? (p < prec_product || f.kind() == ExprKind::product ||
                                          (f.is_constant() && p == prec_product))
                                       : p <= prec_product;
            print_wrapped(f, parens, out);
        }
        break;
    }
    case ExprKind::quotient: {
        const RationalExpr& num = e.children()[0];
        const RationalExpr& den = e.children()[1];
        print_wrapped(num, precedence(num) < prec_product || (num.is_constant() && precedence(num) == prec_product),
                      out);
        out += '/';
        print_wrapped(den, precedence(den) <= prec_product, out);
        break;
    }
    case ExprKind::negation: {
        const RationalExpr& c = e.children()[0];
        out += '-';
        print_wrapped(c, precedence(c) < prec_unary, out);
        break;
    }
    case ExprKind::power: {
        const RationalExpr& base = e.children()[0];
        print_wrapped(base, precedence(base) < prec_atom, out);
        out += '^';
        if (e.exponent() < 0) {
            out += "(" + std::to_string(e.exponent()) + ")";
        } else {
            out += std::to_string(e.exponent());
        }
        break;
    }
    }
}

}  // namespace

std::string to_string(const RationalExpr& e) {
    std::string out;
    print(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Structural helpers

namespace {
void collect_symbols(const RationalExpr& e, std::set<std::string>& out) {
    if (e.kind() == ExprKind::symbol) {
        out.insert(e.name());
        return;
    }
    for (const auto& c : e.children()) collect_symbols(c, out);
}
}  // namespace

std::set<std::string> free_symbols(const RationalExpr& e) {
    std::set<std::string> out;
    collect_symbols(e, out);
    return out;
}

bool depends_on(const RationalExpr& e, const std::string& symbol) {
    if (e.kind() == ExprKind::symbol) return e.name() == symbol;
    return std::any_of(e.children().begin(), e.children().end(),
                       [&](const RationalExpr& c) { return depends_on(c, symbol); });
}

namespace {
RationalExpr rebuild(const RationalExpr& e, std::vector<RationalExpr> children) {
    switch (e.kind()) {
    case ExprKind::sum: return RationalExpr::sum(std::move(children));
    case ExprKind::product: return RationalExpr::product(std::move(children));
    case ExprKind::negation: return RationalExpr::negation(std::move(children[0]));
    case ExprKind::quotient: return RationalExpr::quotient(std::move(children[0]), std::move(children[1]));
    case ExprKind::power: return RationalExpr::power(std::move(children[0]), e.exponent());
    default: return e;
    }
}
}  // namespace

RationalExpr substitute(const RationalExpr& e, const std::map<std::string, RationalExpr>& replacements) {
    if (e.kind() == ExprKind::symbol) {
        auto it = replacements.find(e.name());
        return it == replacements.end() ? e : it->second;
    }
    if (e.is_constant()) return e;
    std::vector<RationalExpr> children;
    children.reserve(e.children().size());
    for (const auto& c : e.children()) children.push_back(substitute(c, replacements));
    return rebuild(e, std::move(children));
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

/// Splits a simplified term into numeric coefficient and symbolic remainder.
std::pair<Number, RationalExpr> split_coefficient(const RationalExpr& term) {
    if (term.is_constant()) return {term.number(), RationalExpr(1)};
    if (term.kind() == ExprKind::negation) {
        auto [c, rest] = split_coefficient(term.children()[0]);
        return {-c, rest};
    }
    if (term.kind() == ExprKind::product && term.children().front().is_constant()) {
        std::vector<RationalExpr> rest(term.children().begin() + 1, term.children().end());
        return {term.children().front().number(), RationalExpr::product(std::move(rest))};
    }
    if (term.kind() == ExprKind::quotient) {
        auto [c, rest] = split_coefficient(term.children()[0]);
        if (!c.is_one()) return {c, RationalExpr::quotient(rest, term.children()[1])};
    }
    return {Number(Rational(1)), term};
}

RationalExpr scaled(const Number& c, const RationalExpr& rest) {
    if (c.is_zero()) return RationalExpr(0);
    if (rest.is_one()) return RationalExpr(c);
    if (c.is_one()) return rest;
    if (c == Number(Rational(-1))) return RationalExpr::negation(rest);
    if (rest.kind() == ExprKind::product) {
        std::vector<RationalExpr> f{RationalExpr(c)};
        f.insert(f.end(), rest.children().begin(), rest.children().end());
        return RationalExpr::product(std::move(f));
    }
    if (rest.kind() == ExprKind::quotient) {
        return RationalExpr::quotient(scaled(c, rest.children()[0]), rest.children()[1]);
    }
    return RationalExpr::product({RationalExpr(c), rest});
}

RationalExpr simplify_sum(const std::vector<RationalExpr>& raw) {
    std::vector<RationalExpr> flat;
    for (const auto& t : raw) {
        RationalExpr s = simplify(t);
        if (s.kind() == ExprKind::sum) {
            flat.insert(flat.end(), s.children().begin(), s.children().end());
        } else {
            flat.push_back(s);
        }
    }
    Number constant(Rational(0));
    std::map<RationalExpr, Number> collected;
    std::vector<RationalExpr> order;
    for (const auto& t : flat) {
        auto [c, rest] = split_coefficient(t);
        if (rest.is_one()) {
            constant = constant + c;
            continue;
        }
        auto it = collected.find(rest);
        if (it == collected.end()) {
            collected.emplace(rest, c);
            order.push_back(rest);
        } else {
            it->second = it->second + c;
        }
    }
    std::vector<RationalExpr> terms;
    for (const auto& rest : order) {
        const Number& c = collected.at(rest);
        if (!c.is_zero()) terms.push_back(scaled(c, rest));
    }
    if (!constant.is_zero()) terms.emplace_back(constant);
    if (terms.empty()) return RationalExpr(0);
    return RationalExpr::sum(std::move(terms));
}

void collect_factor(const RationalExpr& f, int exponent, Number& coefficient,
                    std::map<RationalExpr, int>& powers, std::vector<RationalExpr>& order) {
    switch (f.kind()) {
    case ExprKind::constant:
        coefficient = coefficient * pow(f.number(), exponent);
        return;
    case ExprKind::negation:
        if (exponent % 2 != 0) coefficient = -coefficient;
        collect_factor(f.children()[0], exponent, coefficient, powers, order);
        return;
    case ExprKind::product:
        for (const auto& c : f.children()) collect_factor(c, exponent, coefficient, powers, order);
        return;
    case ExprKind::quotient:
        collect_factor(f.children()[0], exponent, coefficient, powers, order);
        collect_factor(f.children()[1], -exponent, coefficient, powers, order);
        return;
    case ExprKind::power:
        collect_factor(f.children()[0], exponent * f.exponent(), coefficient, powers, order);
        return;
    default: {
        auto it = powers.find(f);
        if (it == powers.end()) {
            powers.emplace(f, exponent);
            order.push_back(f);
        } else {
            it->second += exponent;
        }
    }
    }
}

RationalExpr simplify_product(const std::vector<RationalExpr>& raw, bool presimplified = false) {
    Number coefficient(Rational(1));
    std::map<RationalExpr, int> powers;
    std::vector<RationalExpr> order;
    for (const auto& f : raw) {
        RationalExpr s = presimplified ? f : simplify(f);
        if (s.is_zero()) return RationalExpr(0);
        collect_factor(s, 1, coefficient, powers, order);
    }
    if (coefficient.is_zero()) return RationalExpr(0);
    std::sort(order.begin(), order.end());
    std::vector<RationalExpr> num;
    std::vector<RationalExpr> den;
    for (const auto& base : order) {
        const int e = powers.at(base);
        if (e > 0) num.push_back(e == 1 ? base : RationalExpr::power(base, e));
        if (e < 0) den.push_back(e == -1 ? base : RationalExpr::power(base, -e));
    }
    RationalExpr numerator = scaled(coefficient, RationalExpr::product(std::move(num)));
    if (den.empty()) return numerator;
    return RationalExpr::quotient(numerator, RationalExpr::product(std::move(den)));
}

}  // namespace

RationalExpr simplify(const RationalExpr& e) {
    switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::symbol: return e;
    case ExprKind::sum: return simplify_sum(e.children());
    case ExprKind::negation: {
        RationalExpr c = simplify(e.children()[0]);
        auto [coef, rest] = split_coefficient(c);
        return scaled(-coef, rest);
    }
    case ExprKind::product: return simplify_product(e.children());
    case ExprKind::quotient: {
        RationalExpr den = simplify(e.children()[1]);
        if (den.is_zero()) return RationalExpr::quotient(simplify(e.children()[0]), den);
        return simplify_product({simplify(e.children()[0]), RationalExpr::power(den, -1)}, true);
    }
    case ExprKind::power: {
        if (e.exponent() == 0) return RationalExpr(1);
        RationalExpr base = simplify(e.children()[0]);
        if (base.is_constant()) {
            if (base.number().is_zero() && e.exponent() < 0) return RationalExpr::power(base, e.exponent());
            return RationalExpr(pow(base.number(), e.exponent()));
        }
        if (e.exponent() == 1) return base;
        return simplify_product({RationalExpr::power(base, e.exponent())}, true);
    }
    }
    return e;
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {
RationalExpr diff_raw(const RationalExpr& e, const std::string& s) {
    switch (e.kind()) {
    case ExprKind::constant: return RationalExpr(0);
    case ExprKind::symbol: return RationalExpr(e.name() == s ? 1 : 0);
    case ExprKind::sum: {
        std::vector<RationalExpr> terms;
        for (const auto& c : e.children())
            if (depends_on(c, s)) terms.push_back(diff_raw(c, s));
        return RationalExpr::sum(std::move(terms));
    }
    case ExprKind::product: {
        const auto& f = e.children();
        std::vector<RationalExpr> terms;
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (!depends_on(f[i], s)) continue;
            std::vector<RationalExpr> factors;
            for (std::size_t j = 0; j < f.size(); ++j) factors.push_back(j == i ? diff_raw(f[j], s) : f[j]);
            terms.push_back(RationalExpr::product(std::move(factors)));
        }
        return RationalExpr::sum(std::move(terms));
    }
    case ExprKind::negation: return RationalExpr::negation(diff_raw(e.children()[0], s));
    case ExprKind::quotient: {
        const RationalExpr& a = e.children()[0];
        const RationalExpr& b = e.children()[1];
        if (!depends_on(b, s)) return RationalExpr::quotient(diff_raw(a, s), b);
        RationalExpr db = diff_raw(b, s);
        RationalExpr numerator = depends_on(a, s) ? diff_raw(a, s) * b - a * db : -(a * db);
        return RationalExpr::quotient(numerator, RationalExpr::power(b, 2));
    }
    case ExprKind::power: {
        const RationalExpr& b = e.children()[0];
        const int n = e.exponent();
        return RationalExpr::product({RationalExpr(n), RationalExpr::power(b, n - 1), diff_raw(b, s)});
    }
    }
    return RationalExpr(0);
}
}  // namespace

RationalExpr diff_expr(const RationalExpr& e, const std::string& symbol) {
    if (!depends_on(e, symbol)) return RationalExpr(0);
    return simplify(diff_raw(e, symbol));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {
double eval_node(const RationalExpr& e, const std::map<std::string, double>& b) {
    switch (e.kind()) {
    case ExprKind::constant: return e.number().to_double();
    case ExprKind::symbol: {
        auto it = b.find(e.name());
        if (it == b.end()) throw ModelError("unbound symbol '" + e.name() + "'");
        return it->second;
    }
    case ExprKind::sum: {
        double acc = 0.0;
        for (const auto& c : e.children()) acc += eval_node(c, b);
        return acc;
    }
    case ExprKind::product: {
        double acc = 1.0;
        for (const auto& c : e.children()) acc *= eval_node(c, b);
        return acc;
    }
    case ExprKind::negation: return -eval_node(e.children()[0], b);
    case ExprKind::quotient: {
        const double den = eval_node(e.children()[1], b);
        if (den == 0.0) throw PoleError("pole: denominator " + to_string(e.children()[1]) + " vanishes");
        return eval_node(e.children()[0], b) / den;
    }
    case ExprKind::power: return int_power(eval_node(e.children()[0], b), e.exponent());
    }
    return 0.0;
}
}  // namespace

double eval_expr(const RationalExpr& e, const std::map<std::string, double>& bindings) {
    return eval_node(e, bindings);
}

ExprProgram::ExprProgram(const RationalExpr& e, const std::function<int(const std::string&)>& slot_of) {
    emit(e, slot_of);
}

void ExprProgram::emit(const RationalExpr& e, const std::function<int(const std::string&)>& slot_of) {
    switch (e.kind()) {
    case ExprKind::constant: code_.push_back({Op::constant, 0, e.number().to_double()}); return;
    case ExprKind::symbol: {
        const int slot = slot_of(e.name());
        if (slot < 0) throw ModelError("unbound symbol '" + e.name() + "'");
        max_slot_ = std::max(max_slot_, slot);
        code_.push_back({Op::slot, slot, 0.0});
        return;
    }
    case ExprKind::sum:
    case ExprKind::product:
        for (const auto& c : e.children()) emit(c, slot_of);
        code_.push_back({e.kind() == ExprKind::sum ? Op::add : Op::mul, static_cast<int>(e.children().size()), 0.0});
        return;
    case ExprKind::negation:
        emit(e.children()[0], slot_of);
        code_.push_back({Op::neg, 0, 0.0});
        return;
    case ExprKind::quotient:
        emit(e.children()[0], slot_of);
        emit(e.children()[1], slot_of);
        code_.push_back({Op::div, 0, 0.0});
        return;
    case ExprKind::power:
        emit(e.children()[0], slot_of);
        code_.push_back({Op::pow, e.exponent(), 0.0});
        return;
    }
}

}  // namespace paramest
