#include "paramest/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace paramest {

std::string_view to_string(SymbolKind kind) {
    switch (kind) {
    case SymbolKind::state: return "state";
    case SymbolKind::parameter: return "parameter";
    case SymbolKind::input: return "input";
    case SymbolKind::output: return "output";
    case SymbolKind::time: return "time";
    }
    return "?";
}

namespace {
int index_of(const std::vector<std::string>& names, const std::string& name) {
    auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}
}  // namespace

OdeModel::OdeModel(std::vector<std::string> states, std::vector<std::string> parameters,
                   std::vector<std::string> inputs, std::vector<Equation> state_equations,
                   std::vector<Equation> output_equations)
    : states_(std::move(states)), parameters_(std::move(parameters)), inputs_(std::move(inputs)) {
    if (states_.empty()) throw ModelError("model must declare at least one state");
    kinds_.emplace(std::string(time_symbol), SymbolKind::time);
    auto declare = [&](const std::vector<std::string>& names, SymbolKind kind) {
        for (const auto& n : names) {
            if (!kinds_.emplace(n, kind).second) {
                if (n == time_symbol) throw ModelError("'t' is reserved for time");
                throw ModelError("symbol '" + n + "' declared more than once");
            }
        }
    };
    declare(states_, SymbolKind::state);
    declare(parameters_, SymbolKind::parameter);
    declare(inputs_, SymbolKind::input);

    state_rhs_.resize(states_.size());
    std::vector<bool> seen(states_.size(), false);
    for (auto& eq : state_equations) {
        const int i = index_of(states_, eq.lhs);
        if (i < 0) throw ModelError("equation for undeclared state '" + eq.lhs + "'");
        if (seen[static_cast<std::size_t>(i)]) throw ModelError("duplicate equation for state '" + eq.lhs + "'");
        seen[static_cast<std::size_t>(i)] = true;
        state_rhs_[static_cast<std::size_t>(i)] = std::move(eq.rhs);
    }
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (!seen[i]) throw ModelError("state '" + states_[i] + "' has no equation");

    for (auto& eq : output_equations) {
        if (kinds_.count(eq.lhs) != 0) {
            if (kinds_.at(eq.lhs) == SymbolKind::output) throw ModelError("duplicate output '" + eq.lhs + "'");
            throw ModelError("output name '" + eq.lhs + "' clashes with a declared symbol");
        }
        kinds_.emplace(eq.lhs, SymbolKind::output);
        outputs_.push_back(eq.lhs);
        output_rhs_.push_back(std::move(eq.rhs));
    }
    if (outputs_.empty()) throw ModelError("model must declare at least one output");

    auto check = [&](const RationalExpr& e, const std::string& where) {
        for (const auto& s : free_symbols(e)) {
            auto it = kinds_.find(s);
            if (it == kinds_.end()) throw ModelError("undeclared symbol '" + s + "' in " + where);
            if (it->second == SymbolKind::output)
                throw ModelError("output '" + s + "' may not appear in a right-hand side (" + where + ")");
        }
    };
    for (std::size_t i = 0; i < states_.size(); ++i) check(state_rhs_[i], "equation for " + states_[i]);
    for (std::size_t k = 0; k < outputs_.size(); ++k) check(output_rhs_[k], "output " + outputs_[k]);
}

const RationalExpr& OdeModel::rhs_of_state(const std::string& state) const {
    const int i = state_index(state);
    if (i < 0) throw ModelError("unknown state '" + state + "'");
    return state_rhs_[static_cast<std::size_t>(i)];
}

const RationalExpr& OdeModel::rhs_of_output(const std::string& output) const {
    const int k = output_index(output);
    if (k < 0) throw ModelError("unknown output '" + output + "'");
    return output_rhs_[static_cast<std::size_t>(k)];
}

std::vector<SymbolInfo> OdeModel::symbols() const {
    std::vector<SymbolInfo> out;
    for (const auto& s : states_) out.push_back({s, SymbolKind::state});
    for (const auto& s : parameters_) out.push_back({s, SymbolKind::parameter});
    for (const auto& s : inputs_) out.push_back({s, SymbolKind::input});
    for (const auto& s : outputs_) out.push_back({s, SymbolKind::output});
    out.push_back({std::string(time_symbol), SymbolKind::time});
    return out;
}

std::optional<SymbolKind> OdeModel::kind_of(const std::string& name) const {
    auto it = kinds_.find(name);
    if (it == kinds_.end()) return std::nullopt;
    return it->second;
}

int OdeModel::state_index(const std::string& name) const { return index_of(states_, name); }
int OdeModel::parameter_index(const std::string& name) const { return index_of(parameters_, name); }
int OdeModel::input_index(const std::string& name) const { return index_of(inputs_, name); }
int OdeModel::output_index(const std::string& name) const { return index_of(outputs_, name); }

std::vector<std::string> OdeModel::observable_states() const {
    std::set<std::string> closure;
    std::vector<std::string> work;
    auto visit = [&](const RationalExpr& e) {
        for (const auto& s : free_symbols(e))
            if (state_index(s) >= 0 && closure.insert(s).second) work.push_back(s);
    };
    for (const auto& g : output_rhs_) visit(g);
    while (!work.empty()) {
        const std::string s = work.back();
        work.pop_back();
        visit(rhs_of_state(s));
    }
    std::vector<std::string> ordered;
    for (const auto& s : states_)
        if (closure.count(s) != 0) ordered.push_back(s);
    return ordered;
}

OdeModel OdeModel::restricted_to(const std::vector<std::string>& states) const {
    std::vector<Equation> eqs;
    for (const auto& s : states) eqs.push_back({s, rhs_of_state(s)});
    std::vector<Equation> outs;
    for (std::size_t k = 0; k < outputs_.size(); ++k) outs.push_back({outputs_[k], output_rhs_[k]});
    return OdeModel(states, parameters_, inputs_, std::move(eqs), std::move(outs));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

const std::set<std::string>& transcendental_names() {
    static const std::set<std::string> names{"exp", "log", "ln", "sin", "cos", "tan", "sqrt", "sinh", "cosh",
                                             "tanh", "asin", "acos", "atan", "abs", "pow", "min", "max"};
    return names;
}

/// Recursive-descent parser over one line (or a standalone expression).
class ExprParser {
public:
    ExprParser(std::string_view text, int line, int column_offset, const std::set<std::string>* known)
        : text_(text), line_(line), offset_(column_offset), known_(known) {}

    RationalExpr parse_all() {
        RationalExpr e = parse_sum();
        skip_space();
        if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(message, line_, offset_ + static_cast<int>(pos_) + 1);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    RationalExpr parse_sum() {
        std::vector<RationalExpr> terms{parse_term()};
        for (;;) {
            if (accept('+')) {
                terms.push_back(parse_term());
            } else if (accept('-')) {
                terms.push_back(RationalExpr::negation(parse_term()));
            } else {
                break;
            }
        }
        return RationalExpr::sum(std::move(terms));
    }

    RationalExpr parse_term() {
        RationalExpr acc = parse_unary();
        std::vector<RationalExpr> run{acc};
        for (;;) {
            if (accept('*')) {
                run.push_back(parse_unary());
            } else if (accept('/')) {
                const std::size_t at = pos_;
                RationalExpr den = parse_unary();
                if (den.is_zero()) {
                    pos_ = at;
                    fail("division by the literal zero");
                }
                run = {RationalExpr::quotient(RationalExpr::product(std::move(run)), den)};
            } else {
                break;
            }
        }
        return RationalExpr::product(std::move(run));
    }

    RationalExpr parse_unary() {
        if (accept('-')) return RationalExpr::negation(parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    RationalExpr parse_power() {
        RationalExpr base = parse_primary();
        if (accept('^')) {
            skip_space();
            const bool paren = accept('(');
            skip_space();
            bool negative = false;
            if (accept('-')) negative = true;
            skip_space();
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) fail("exponent must be an integer literal");
            if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
                fail("exponent must be an integer (non-rational powers are not supported)");
            if (pos_ - start > 6) fail("exponent too large");
            int n = std::stoi(std::string(text_.substr(start, pos_ - start)));
            if (negative) n = -n;
            if (paren && !accept(')')) fail("expected ')'");
            skip_space();
            if (pos_ < text_.size() && text_[pos_] == '^') fail("chained powers need parentheses");
            return RationalExpr::power(std::move(base), n);
        }
        return base;
    }

    RationalExpr parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            RationalExpr inner = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
                ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                std::size_t look = pos_ + 1;
                if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
                if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                    pos_ = look;
                    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
                }
            }
            try {
                return RationalExpr::constant(parse_decimal(text_.substr(start, pos_ - start)));
            } catch (const ParseError& e) {
                pos_ = start;
                fail(e.what());
            }
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string name(text_.substr(start, pos_ - start));
            skip_space();
            if (pos_ < text_.size() && text_[pos_] == '(') {
                pos_ = start;
                if (transcendental_names().count(name) != 0)
                    fail("non-rational function '" + name + "' is not supported; right-hand sides must be rational");
                fail("function calls are not supported ('" + name + "')");
            }
            if (known_ != nullptr && known_->count(name) == 0) {
                pos_ = start;
                fail("undeclared symbol '" + name + "'");
            }
            return RationalExpr::symbol(std::move(name));
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_;
    int offset_;
    const std::set<std::string>* known_;
};

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool is_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

struct Line {
    int number;
    std::string text;  // comment stripped, not trimmed
};

}  // namespace

RationalExpr parse_expression(std::string_view text) {
    ExprParser parser(text, 1, 0, nullptr);
    return parser.parse_all();
}

OdeModel parse_model(std::string_view text) {
    std::vector<Line> lines;
    {
        int number = 0;
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            ++number;
            std::string_view raw = text.substr(start, end - start);
            const std::size_t hash = raw.find('#');
            if (hash != std::string_view::npos) raw = raw.substr(0, hash);
            if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
            lines.push_back({number, std::string(raw)});
            if (end == text.size()) break;
            start = end + 1;
        }
    }

    enum class Section { none, states, parameters, inputs, equations, outputs };
    std::map<std::string, Section> headers{{"states", Section::states},
                                           {"parameters", Section::parameters},
                                           {"inputs", Section::inputs},
                                           {"equations", Section::equations},
                                           {"outputs", Section::outputs}};
    std::map<Section, std::vector<std::pair<int, std::string>>> declarations;
    struct RawEquation {
        int line;
        int column;
        std::string lhs;
        std::string rhs;
        int rhs_column;
    };
    std::vector<RawEquation> state_eqs;
    std::vector<RawEquation> output_eqs;
    std::set<Section> seen_sections;
    Section current = Section::none;

    for (const Line& line : lines) {
        std::string body = line.text;
        if (trim(body).empty()) continue;
        // Section header?
        const std::size_t colon = body.find(':');
        if (colon != std::string::npos) {
            const std::string head = trim(std::string_view(body).substr(0, colon));
            auto it = headers.find(head);
            if (it != headers.end()) {
                if (!seen_sections.insert(it->second).second)
                    throw ParseError("section '" + head + "' appears more than once", line.number, 1);
                current = it->second;
                body = std::string(colon + 1, ' ') + body.substr(colon + 1);
                if (trim(body).empty()) continue;
            }
        }
        switch (current) {
        case Section::none:
            throw ParseError("expected a section header (states:, parameters:, inputs:, equations:, outputs:)",
                             line.number, 1);
        case Section::states:
        case Section::parameters:
        case Section::inputs: {
            std::size_t start = 0;
            while (start <= body.size()) {
                std::size_t end = body.find(',', start);
                if (end == std::string::npos) end = body.size();
                const std::string name = trim(std::string_view(body).substr(start, end - start));
                const int col = static_cast<int>(start) + 1;
                if (name.empty()) {
                    if (end != body.size()) throw ParseError("empty name in declaration list", line.number, col);
                } else {
                    if (!is_identifier(name)) throw ParseError("invalid identifier '" + name + "'", line.number, col);
                    declarations[current].push_back({line.number, name});
                }
                if (end == body.size()) break;
                start = end + 1;
            }
            break;
        }
        case Section::equations:
        case Section::outputs: {
            const std::size_t eq = body.find('=');
            if (eq == std::string::npos) throw ParseError("expected '='", line.number, 1);
            std::string lhs = trim(std::string_view(body).substr(0, eq));
            const int lhs_col = static_cast<int>(body.find_first_not_of(" \t")) + 1;
            if (current == Section::equations) {
                if (lhs.empty() || lhs.back() != '\'')
                    throw ParseError("state equations have the form x' = ...", line.number, lhs_col);
                lhs = trim(std::string_view(lhs).substr(0, lhs.size() - 1));
            }
            if (!is_identifier(lhs)) throw ParseError("invalid left-hand side '" + lhs + "'", line.number, lhs_col);
            RawEquation raw{line.number, lhs_col, lhs, body.substr(eq + 1), static_cast<int>(eq) + 1};
            (current == Section::equations ? state_eqs : output_eqs).push_back(std::move(raw));
            break;
        }
        }
    }

    auto names_of = [&](Section s) {
        std::vector<std::string> out;
        for (const auto& [ln, name] : declarations[s]) out.push_back(name);
        return out;
    };
    const std::vector<std::string> states = names_of(Section::states);
    const std::vector<std::string> parameters = names_of(Section::parameters);
    const std::vector<std::string> inputs = names_of(Section::inputs);
    if (states.empty()) throw ParseError("model must declare at least one state");

    std::set<std::string> known;
    for (Section s : {Section::states, Section::parameters, Section::inputs}) {
        for (const auto& [ln, name] : declarations[s]) {
            if (name == time_symbol) throw ParseError("'t' is reserved for time", ln, 1);
            if (!known.insert(name).second) throw ParseError("symbol '" + name + "' declared more than once", ln, 1);
        }
    }
    known.insert(std::string(time_symbol));

    std::vector<OdeModel::Equation> eqs;
    std::set<std::string> defined;
    for (const auto& raw : state_eqs) {
        if (std::find(states.begin(), states.end(), raw.lhs) == states.end())
            throw ParseError("equation for undeclared state '" + raw.lhs + "'", raw.line, raw.column);
        if (!defined.insert(raw.lhs).second)
            throw ParseError("duplicate equation for state '" + raw.lhs + "'", raw.line, raw.column);
        ExprParser parser(raw.rhs, raw.line, raw.rhs_column, &known);
        eqs.push_back({raw.lhs, parser.parse_all()});
    }
    std::vector<OdeModel::Equation> outs;
    std::set<std::string> output_names;
    for (const auto& raw : output_eqs) {
        if (known.count(raw.lhs) != 0)
            throw ParseError("output name '" + raw.lhs + "' clashes with a declared symbol", raw.line, raw.column);
        if (!output_names.insert(raw.lhs).second)
            throw ParseError("duplicate output '" + raw.lhs + "'", raw.line, raw.column);
        ExprParser parser(raw.rhs, raw.line, raw.rhs_column, &known);
        outs.push_back({raw.lhs, parser.parse_all()});
    }
    try {
        return OdeModel(states, parameters, inputs, std::move(eqs), std::move(outs));
    } catch (const ModelError& e) {
        throw ParseError(e.what());
    }
}

std::string to_dsl(const OdeModel& model) {
    std::ostringstream out;
    auto list = [&](const char* header, const std::vector<std::string>& names) {
        out << header;
        for (std::size_t i = 0; i < names.size(); ++i) out << (i == 0 ? " " : ", ") << names[i];
        out << '\n';
    };
    list("states:", model.states());
    if (!model.parameters().empty()) list("parameters:", model.parameters());
    if (!model.inputs().empty()) list("inputs:", model.inputs());
    out << "equations:\n";
    for (std::size_t i = 0; i < model.states().size(); ++i)
        out << "  " << model.states()[i] << "' = " << to_string(model.state_rhs()[i]) << '\n';
    out << "outputs:\n";
    for (std::size_t k = 0; k < model.outputs().size(); ++k)
        out << "  " << model.outputs()[k] << " = " << to_string(model.output_rhs()[k]) << '\n';
    return out.str();
}

void TimeSeries::validate(std::size_t min_points) const {
    if (times.size() < min_points)
        throw ModelError("time series needs at least " + std::to_string(min_points) + " points, got " +
                         std::to_string(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw ModelError("non-finite time value");
        if (i > 0 && !(times[i] > times[i - 1])) throw ModelError("times must be strictly increasing");
    }
    if (values.empty()) throw ModelError("time series has no output columns");
    for (const auto& [name, column] : values) {
        if (column.size() != times.size())
            throw ModelError("column '" + name + "' has " + std::to_string(column.size()) + " values, expected " +
                             std::to_string(times.size()));
        for (double v : column)
            if (!std::isfinite(v)) throw ModelError("missing or non-finite value in column '" + name + "'");
    }
}

}  // namespace paramest
