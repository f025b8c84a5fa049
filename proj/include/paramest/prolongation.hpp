#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paramest/expr.hpp"
#include "paramest/model.hpp"
#include "paramest/poly.hpp"

namespace paramest {

/// x^{(j)} at the evaluation time.
struct JetVariable {
    std::string base;
    int order = 0;
};

/// Symbol name of a jet, "x[j]". Brackets cannot occur in model identifiers.
std::string jet_name(const std::string& base, int order);
std::optional<JetVariable> parse_jet_name(const std::string& name);

/// Formal total derivative on jet expressions: D(x[j]) = x[j+1],
/// D(u[j]) = u[j+1], D(t) = 1, D(parameter) = 0. Bare state or input names
/// are read as order-0 jets.
RationalExpr formal_derivative(const RationalExpr& e, const OdeModel& m);

/// Lie derivative along the model: like formal_derivative, but the first
/// derivative of an order-0 state jet is replaced by its right-hand side.
RationalExpr total_derivative(const RationalExpr& e, const OdeModel& m);

/// The uniform order ceil((n + p + 1) / m) for every output.
std::map<std::string, int> default_orders(const OdeModel& m);

/// Differentiated model in polynomial form.
///
/// Every state-dependent denominator F gets an auxiliary unknown w = 1/F with
/// jets w[j] defined by D^j(w*F) = [j == 0]. Parameter-only denominators are
/// constant under D and are kept as explicit denominators.
class ProlongedSystem {
public:
    enum class VariableKind { parameter, state_jet, aux_jet, input_jet, time };

    struct Variable {
        std::string name;
        VariableKind kind;
        std::string base;  // state, input, parameter, or aux name
        int order = 0;
    };

    /// y^{(order)} = numerator / denominator.
    struct OutputEquation {
        std::string output;
        int order;
        RationalPolynomial numerator;
        RationalPolynomial denominator;
    };

    /// x[order] = numerator / denominator, order >= 1.
    struct JetConstraint {
        std::string state;
        int order;
        RationalPolynomial numerator;
        RationalPolynomial denominator;
    };

    /// relation == 0 defines aux jet w[order].
    struct AuxRelation {
        std::string aux;
        int order;
        RationalPolynomial relation;
    };

    const std::vector<Variable>& variables() const noexcept { return variables_; }
    int variable_index(const std::string& name) const;  // -1 if absent
    const std::vector<OutputEquation>& output_equations() const noexcept { return outputs_; }
    const std::vector<JetConstraint>& jet_constraints() const noexcept { return constraints_; }
    const std::vector<AuxRelation>& aux_relations() const noexcept { return aux_relations_; }
    /// Denominators that must not vanish: parameter-only denominators and
    /// the auxiliary factors F (both in order-0 jets).
    const std::vector<RationalPolynomial>& side_conditions() const noexcept { return side_conditions_; }
    /// Auxiliary name -> the factor F it inverts.
    const std::map<std::string, RationalPolynomial>& aux_factors() const noexcept { return aux_factors_; }
    const std::map<std::string, int>& orders() const noexcept { return orders_; }

    std::size_t equation_count() const noexcept {
        return outputs_.size() + constraints_.size() + aux_relations_.size();
    }

    /// Unknown variables (parameters, state jets, aux jets) referenced by
    /// some equation, in variable-table order.
    std::vector<int> unknowns() const;
    /// Parameters and order-0 state jets not referenced by any equation.
    std::vector<std::string> absent_unknowns() const;

    RationalExpr to_expr(const RationalPolynomial& p) const;
    /// The equation for y^{(k)} as a rational expression in jets.
    RationalExpr output_expr(const std::string& output, int order) const;
    RationalExpr constraint_expr(const JetConstraint& c) const;

private:
    friend ProlongedSystem prolong(const OdeModel& m, const std::map<std::string, int>& orders);
    friend class Prolonger;

    std::vector<Variable> variables_;
    std::map<std::string, int> index_;
    std::vector<OutputEquation> outputs_;
    std::vector<JetConstraint> constraints_;
    std::vector<AuxRelation> aux_relations_;
    std::vector<RationalPolynomial> side_conditions_;
    std::map<std::string, RationalPolynomial> aux_factors_;
    std::map<std::string, int> orders_;
    std::vector<std::string> model_parameters_;
    std::vector<std::string> model_states_;
};

ProlongedSystem prolong(const OdeModel& m, const std::map<std::string, int>& orders);

/// Derivatives x^{(j)}(t0), y^{(k)}(t0) for j, k <= order of the exact
/// solution, from the Taylor-series recurrence of the ODE.
struct JetValues {
    std::map<std::string, std::vector<double>> states;
    std::map<std::string, std::vector<double>> outputs;
};

/// input_jets supplies u^{(j)}(t0) for every input (missing orders are 0).
JetValues taylor_coefficients(const OdeModel& m, const std::map<std::string, double>& params,
                              const std::map<std::string, double>& x_init, int order, double t0 = 0.0,
                              const std::map<std::string, std::vector<double>>& input_jets = {});

/// Values of every variable of sys at the exact solution through
/// (params, x_init) at t0: parameters, state jets, aux jets, input jets, time.
std::vector<double> variable_values(const ProlongedSystem& sys, const OdeModel& m,
                                    const std::map<std::string, double>& params,
                                    const std::map<std::string, double>& x_init, double t0 = 0.0,
                                    const std::map<std::string, std::vector<double>>& input_jets = {});

}  // namespace paramest
