#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "paramest/errors.hpp"
#include "paramest/rational.hpp"

namespace paramest {

enum class ExprKind { constant, symbol, sum, product, negation, quotient, power };

/// Numeric literal: exact rational unless it came from a floating-point value.
class Number {
public:
    Number() = default;
    Number(Rational value) : exact_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
    explicit Number(double value) : is_float_(true), real_(value) {}

    bool is_float() const noexcept { return is_float_; }
    const Rational& exact() const { return exact_; }
    double to_double() const;
    bool is_zero() const;
    bool is_one() const;
    bool is_negative() const;

    friend Number operator+(const Number& a, const Number& b);
    friend Number operator-(const Number& a, const Number& b);
    friend Number operator*(const Number& a, const Number& b);
    friend Number operator/(const Number& a, const Number& b);
    friend Number operator-(const Number& a);
    friend int compare(const Number& a, const Number& b);
    friend bool operator==(const Number& a, const Number& b) { return compare(a, b) == 0; }

private:
    bool is_float_ = false;
    Rational exact_{0};
    double real_ = 0.0;
};

Number pow(const Number& base, int exponent);

/// Immutable expression tree over named symbols with field operations and
/// integer powers. Nodes are shared; copying an expression is cheap.
class RationalExpr {
public:
    RationalExpr();
    RationalExpr(int value);  // NOLINT(google-explicit-constructor)
    RationalExpr(Number value);  // NOLINT(google-explicit-constructor)

    static RationalExpr constant(Rational value);
    static RationalExpr real(double value);
    static RationalExpr symbol(std::string name);
    static RationalExpr sum(std::vector<RationalExpr> terms);
    static RationalExpr product(std::vector<RationalExpr> factors);
    static RationalExpr negation(RationalExpr operand);
    /// Throws ModelError when the denominator is the literal zero.
    static RationalExpr quotient(RationalExpr numerator, RationalExpr denominator);
    static RationalExpr power(RationalExpr base, int exponent);

    ExprKind kind() const noexcept;
    const std::vector<RationalExpr>& children() const noexcept;
    const Number& number() const;
    const std::string& name() const;
    int exponent() const;

    bool is_constant() const noexcept { return kind() == ExprKind::constant; }
    bool is_zero() const;
    bool is_one() const;

    friend int compare(const RationalExpr& a, const RationalExpr& b);
    friend bool operator==(const RationalExpr& a, const RationalExpr& b) { return compare(a, b) == 0; }
    friend bool operator<(const RationalExpr& a, const RationalExpr& b) { return compare(a, b) < 0; }

private:
    struct Node;
    explicit RationalExpr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

RationalExpr operator+(const RationalExpr& a, const RationalExpr& b);
RationalExpr operator-(const RationalExpr& a, const RationalExpr& b);
RationalExpr operator*(const RationalExpr& a, const RationalExpr& b);
RationalExpr operator/(const RationalExpr& a, const RationalExpr& b);
RationalExpr operator-(const RationalExpr& a);
RationalExpr pow(const RationalExpr& base, int exponent);

std::string to_string(const RationalExpr& e);
std::set<std::string> free_symbols(const RationalExpr& e);
bool depends_on(const RationalExpr& e, const std::string& symbol);

RationalExpr substitute(const RationalExpr& e, const std::map<std::string, RationalExpr>& replacements);

/// Exact partial derivative, simplified.
RationalExpr diff_expr(const RationalExpr& e, const std::string& symbol);

/// Constant folding, 0/1 absorption, like-term and like-factor collection.
/// The result is value-equivalent but not canonical.
RationalExpr simplify(const RationalExpr& e);

/// Floating-point evaluation; throws PoleError on an exactly vanishing
/// denominator and ModelError on an unbound symbol.
double eval_expr(const RationalExpr& e, const std::map<std::string, double>& bindings);

// ---------------------------------------------------------------------------
// Scalar-generic evaluation.

template <class T>
bool vanishes(const T& value) {
    return value == T(0);
}

/// Stack program compiled from an expression. Symbols are resolved to slot
/// indices at compile time so repeated evaluation (ODE right-hand sides,
/// series arithmetic) does no name lookups.
class ExprProgram {
public:
    ExprProgram() = default;
    /// slot_of returns the slot index for a symbol or -1 if unknown.
    ExprProgram(const RationalExpr& e, const std::function<int(const std::string&)>& slot_of);

    template <class T>
    T run(std::span<const T> slots) const;

    int max_slot() const noexcept { return max_slot_; }

private:
    enum class Op : std::uint8_t { constant, slot, add, mul, neg, div, pow };
    struct Instr {
        Op op;
        int arg;        // slot index, arity, or exponent
        double value;   // constant
    };
    void emit(const RationalExpr& e, const std::function<int(const std::string&)>& slot_of);
    std::vector<Instr> code_;
    int max_slot_ = -1;
};

template <class T>
T int_power(const T& base, int exponent) {
    if (exponent < 0) {
        if (vanishes(base)) throw PoleError("negative power of zero");
        return T(1) / int_power(base, -exponent);
    }
    T result(1);
    T b = base;
    unsigned e = static_cast<unsigned>(exponent);
    while (e != 0) {
        if (e & 1U) result = result * b;
        e >>= 1U;
        if (e != 0) b = b * b;
    }
    return result;
}

template <class T>
T ExprProgram::run(std::span<const T> slots) const {
    std::vector<T> local;
    std::vector<T>* scratch = &local;
    if constexpr (std::is_trivially_copyable_v<T>) {
        thread_local std::vector<T> shared;
        scratch = &shared;
    }
    std::vector<T>& stack = *scratch;
    stack.clear();
    stack.reserve(16);
    for (const Instr& in : code_) {
        switch (in.op) {
        case Op::constant: stack.push_back(T(in.value)); break;
        case Op::slot: stack.push_back(slots[static_cast<std::size_t>(in.arg)]); break;
        case Op::add: {
            const std::size_t base = stack.size() - static_cast<std::size_t>(in.arg);
            T acc = stack[base];
            for (std::size_t i = base + 1; i < stack.size(); ++i) acc = acc + stack[i];
            stack.resize(base);
            stack.push_back(std::move(acc));
            break;
        }
        case Op::mul: {
            const std::size_t base = stack.size() - static_cast<std::size_t>(in.arg);
            T acc = stack[base];
            for (std::size_t i = base + 1; i < stack.size(); ++i) acc = acc * stack[i];
            stack.resize(base);
            stack.push_back(std::move(acc));
            break;
        }
        case Op::neg: stack.back() = -stack.back(); break;
        case Op::div: {
            T den = std::move(stack.back());
            stack.pop_back();
            if (vanishes(den)) throw PoleError("division by zero");
            stack.back() = stack.back() / den;
            break;
        }
        case Op::pow: stack.back() = int_power(stack.back(), in.arg); break;
        }
    }
    return stack.back();
}

}  // namespace paramest
