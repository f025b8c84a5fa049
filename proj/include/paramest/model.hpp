#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paramest/expr.hpp"

namespace paramest {

enum class SymbolKind { state, parameter, input, output, time };

std::string_view to_string(SymbolKind kind);

struct SymbolInfo {
    std::string name;
    SymbolKind kind;
};

/// The name of the independent variable. Reserved in the model language.
inline constexpr std::string_view time_symbol = "t";

/// Rational ODE model x' = f(x, u, mu), y = g(x, u, mu).
///
/// Construction validates every structural invariant; an OdeModel value is
/// always well formed and immutable afterwards.
class OdeModel {
public:
    struct Equation {
        std::string lhs;
        RationalExpr rhs;
    };

    OdeModel(std::vector<std::string> states, std::vector<std::string> parameters, std::vector<std::string> inputs,
             std::vector<Equation> state_equations, std::vector<Equation> output_equations);

    const std::vector<std::string>& states() const noexcept { return states_; }
    const std::vector<std::string>& parameters() const noexcept { return parameters_; }
    const std::vector<std::string>& inputs() const noexcept { return inputs_; }
    const std::vector<std::string>& outputs() const noexcept { return outputs_; }

    /// f_i, aligned with states().
    const std::vector<RationalExpr>& state_rhs() const noexcept { return state_rhs_; }
    /// g_k, aligned with outputs().
    const std::vector<RationalExpr>& output_rhs() const noexcept { return output_rhs_; }

    const RationalExpr& rhs_of_state(const std::string& state) const;
    const RationalExpr& rhs_of_output(const std::string& output) const;

    std::vector<SymbolInfo> symbols() const;
    std::optional<SymbolKind> kind_of(const std::string& name) const;

    int state_index(const std::string& name) const;   // -1 if absent
    int parameter_index(const std::string& name) const;
    int input_index(const std::string& name) const;
    int output_index(const std::string& name) const;

    /// States whose trajectories influence at least one output.
    std::vector<std::string> observable_states() const;

    /// Submodel on the given states (which must be closed under the
    /// dependency relation of the right-hand sides).
    OdeModel restricted_to(const std::vector<std::string>& states) const;

private:
    std::vector<std::string> states_;
    std::vector<std::string> parameters_;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    std::vector<RationalExpr> state_rhs_;
    std::vector<RationalExpr> output_rhs_;
    std::map<std::string, SymbolKind> kinds_;
};

/// Parses the model language:
///
///     states:     x1, x2
///     parameters: a, b
///     inputs:     u          # optional
///     equations:
///       x1' = -a*x2
///       x2' = x1/b
///     outputs:
///       y1 = x1
///
/// Throws ParseError (with line and column) on any syntax or validation error.
OdeModel parse_model(std::string_view text);

/// Parses a single expression over arbitrary identifiers.
RationalExpr parse_expression(std::string_view text);

/// Renders a model back into the model language.
std::string to_dsl(const OdeModel& model);

/// Measured samples of every output on a shared time grid.
struct TimeSeries {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> values;

    std::size_t size() const noexcept { return times.size(); }
    /// Throws ModelError if the invariants (n >= min_points, strictly
    /// increasing times, aligned columns, finite values) do not hold.
    void validate(std::size_t min_points = 2) const;
};

}  // namespace paramest
