#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paramest/rational.hpp"

namespace paramest {

/// Sparse exponent vector: (variable index, exponent) pairs sorted by index,
/// exponents strictly positive.
class Monomial {
public:
    Monomial() = default;
    static Monomial variable(int var, int exponent = 1) {
        Monomial m;
        if (exponent > 0) m.factors_.push_back({var, exponent});
        return m;
    }

    const std::vector<std::pair<int, int>>& factors() const noexcept { return factors_; }
    bool is_one() const noexcept { return factors_.empty(); }

    int degree() const noexcept {
        int d = 0;
        for (const auto& f : factors_) d += f.second;
        return d;
    }

    int exponent_of(int var) const noexcept {
        for (const auto& f : factors_)
            if (f.first == var) return f.second;
        return 0;
    }

    /// This monomial with the exponent of var replaced.
    Monomial with_exponent(int var, int exponent) const {
        Monomial m;
        bool placed = false;
        for (const auto& f : factors_) {
            if (!placed && f.first >= var) {
                if (exponent > 0) m.factors_.push_back({var, exponent});
                placed = true;
                if (f.first == var) continue;
            }
            m.factors_.push_back(f);
        }
        if (!placed && exponent > 0) m.factors_.push_back({var, exponent});
        return m;
    }

    friend Monomial operator*(const Monomial& a, const Monomial& b) {
        Monomial m;
        m.factors_.reserve(a.factors_.size() + b.factors_.size());
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < a.factors_.size() || j < b.factors_.size()) {
            if (j == b.factors_.size() || (i < a.factors_.size() && a.factors_[i].first < b.factors_[j].first)) {
                m.factors_.push_back(a.factors_[i++]);
            } else if (i == a.factors_.size() || b.factors_[j].first < a.factors_[i].first) {
                m.factors_.push_back(b.factors_[j++]);
            } else {
                m.factors_.push_back({a.factors_[i].first, a.factors_[i].second + b.factors_[j].second});
                ++i;
                ++j;
            }
        }
        return m;
    }

    friend bool operator<(const Monomial& a, const Monomial& b) { return a.factors_ < b.factors_; }
    friend bool operator==(const Monomial& a, const Monomial& b) { return a.factors_ == b.factors_; }

private:
    std::vector<std::pair<int, int>> factors_;
};

template <class C>
bool coefficient_is_zero(const C& c) {
    return c == C(0);
}

/// Sparse multivariate polynomial over variable indices with coefficients C
/// (Rational for symbolic work, std::complex<double> for numeric systems).
template <class C>
class Polynomial {
public:
    using Terms = std::map<Monomial, C>;

    Polynomial() = default;
    explicit Polynomial(C constant) {
        if (!coefficient_is_zero(constant)) terms_.emplace(Monomial(), std::move(constant));
    }
    static Polynomial variable(int var) {
        Polynomial p;
        p.terms_.emplace(Monomial::variable(var), C(1));
        return p;
    }
    static Polynomial term(Monomial m, C c) {
        Polynomial p;
        if (!coefficient_is_zero(c)) p.terms_.emplace(std::move(m), std::move(c));
        return p;
    }

    const Terms& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }

    bool is_constant() const noexcept { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one()); }
    C constant_term() const {
        auto it = terms_.find(Monomial());
        return it == terms_.end() ? C(0) : it->second;
    }

    int degree() const noexcept {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
        return d;
    }
    int degree_in(int var) const noexcept {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.exponent_of(var));
        return d;
    }

    std::vector<int> variables() const {
        std::vector<int> vars;
        for (const auto& [m, c] : terms_)
            for (const auto& f : m.factors()) vars.push_back(f.first);
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        return vars;
    }
    bool depends_on(int var) const noexcept {
        for (const auto& [m, c] : terms_)
            if (m.exponent_of(var) > 0) return true;
        return false;
    }

    void add_term(const Monomial& m, const C& c) {
        if (coefficient_is_zero(c)) return;
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (coefficient_is_zero(it->second)) terms_.erase(it);
        }
    }

    Polynomial& operator+=(const Polynomial& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(const Polynomial& a) {
        Polynomial r;
        for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, -c);
        return r;
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial r;
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
        return r;
    }
    Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

    Polynomial scaled(const C& s) const {
        Polynomial r;
        if (coefficient_is_zero(s)) return r;
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * s);
        return r;
    }

    Polynomial pow(int e) const {
        Polynomial result(C(1));
        Polynomial base = *this;
        while (e > 0) {
            if (e & 1) result *= base;
            e >>= 1;
            if (e > 0) base *= base;
        }
        return result;
    }

    /// Partial derivative with respect to var.
    Polynomial derivative(int var) const {
        Polynomial r;
        for (const auto& [m, c] : terms_) {
            const int e = m.exponent_of(var);
            if (e == 0) continue;
            r.add_term(m.with_exponent(var, e - 1), c * C(e));
        }
        return r;
    }

    /// Replace var by the polynomial value.
    Polynomial substitute(int var, const Polynomial& value) const {
        Polynomial r;
        std::map<int, Polynomial> powers;
        for (const auto& [m, c] : terms_) {
            const int e = m.exponent_of(var);
            if (e == 0) {
                r.add_term(m, c);
                continue;
            }
            auto it = powers.find(e);
            if (it == powers.end()) it = powers.emplace(e, value.pow(e)).first;
            r += it->second * term(m.with_exponent(var, 0), c);
        }
        return r;
    }

    /// Renumber variables; map[v] must be defined for every variable present.
    Polynomial renumbered(const std::function<int(int)>& map) const {
        Polynomial r;
        for (const auto& [m, c] : terms_) {
            Monomial nm;
            for (const auto& f : m.factors()) nm = nm * Monomial::variable(map(f.first), f.second);
            r.add_term(nm, c);
        }
        return r;
    }

    template <class D>
    Polynomial<D> map_coefficients(const std::function<D(const C&)>& f) const {
        Polynomial<D> r;
        for (const auto& [m, c] : terms_) r.add_term(m, f(c));
        return r;
    }

    template <class T>
    T evaluate(std::span<const T> values) const {
        T acc(0);
        for (const auto& [m, c] : terms_) {
            T v(c);
            for (const auto& f : m.factors()) {
                const T& x = values[static_cast<std::size_t>(f.first)];
                T p = x;
                for (int k = 1; k < f.second; ++k) p = p * x;
                v = v * p;
            }
            acc = acc + v;
        }
        return acc;
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

private:
    Terms terms_;
};

using RationalPolynomial = Polynomial<Rational>;
using ComplexPolynomial = Polynomial<std::complex<double>>;

}  // namespace paramest
