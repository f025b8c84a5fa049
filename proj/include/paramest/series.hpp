#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "paramest/errors.hpp"

namespace paramest {

/// Truncated power series a_0 + a_1 h + ... + a_{N-1} h^{N-1} in Taylor
/// coefficient form. A length-1 series is an exact constant and broadcasts
/// against series of any length.
template <class T>
class Series {
public:
    Series() : c_(1, T(0)) {}
    Series(T constant) : c_(1, constant) {}  // NOLINT(google-explicit-constructor)
    Series(double constant) requires(!std::is_same_v<T, double>) : c_(1, T(constant)) {}  // NOLINT
    explicit Series(std::vector<T> coefficients) : c_(std::move(coefficients)) {
        if (c_.empty()) c_.push_back(T(0));
    }
    Series(int constant) : c_(1, T(constant)) {}  // NOLINT(google-explicit-constructor)

    /// The series of (t0 + h): value t0, slope 1.
    static Series variable(T t0, std::size_t length) {
        std::vector<T> c(std::max<std::size_t>(length, 1), T(0));
        c[0] = t0;
        if (length > 1) c[1] = T(1);
        return Series(std::move(c));
    }

    std::size_t size() const noexcept { return c_.size(); }
    const T& operator[](std::size_t k) const { return c_[k]; }
    T& operator[](std::size_t k) { return c_[k]; }
    const std::vector<T>& coefficients() const noexcept { return c_; }
    T coefficient(std::size_t k) const { return k < c_.size() ? c_[k] : T(0); }

    /// k-th derivative at the expansion point: k! a_k.
    T derivative(std::size_t k) const {
        T f(1);
        for (std::size_t i = 2; i <= k; ++i) f *= T(static_cast<double>(i));
        return coefficient(k) * f;
    }

    friend Series operator+(const Series& a, const Series& b) {
        const std::size_t n = std::max(a.size(), b.size());
        std::vector<T> r(n);
        for (std::size_t k = 0; k < n; ++k) r[k] = a.coefficient(k) + b.coefficient(k);
        return Series(std::move(r));
    }
    friend Series operator-(const Series& a, const Series& b) {
        const std::size_t n = std::max(a.size(), b.size());
        std::vector<T> r(n);
        for (std::size_t k = 0; k < n; ++k) r[k] = a.coefficient(k) - b.coefficient(k);
        return Series(std::move(r));
    }
    friend Series operator-(const Series& a) {
        std::vector<T> r(a.c_);
        for (auto& v : r) v = -v;
        return Series(std::move(r));
    }
    friend Series operator*(const Series& a, const Series& b) {
        if (a.size() == 1) return b.scaled(a.c_[0]);
        if (b.size() == 1) return a.scaled(b.c_[0]);
        const std::size_t n = std::max(a.size(), b.size());
        std::vector<T> r(n, T(0));
        for (std::size_t k = 0; k < n; ++k) {
            T acc(0);
            for (std::size_t i = 0; i <= k; ++i) acc += a.coefficient(i) * b.coefficient(k - i);
            r[k] = acc;
        }
        return Series(std::move(r));
    }
    /// Throws PoleError when the divisor's constant term is exactly zero.
    friend Series operator/(const Series& a, const Series& b) {
        if (b.c_[0] == T(0)) throw PoleError("series division by a series with zero constant term");
        if (b.size() == 1) return a.scaled(T(1) / b.c_[0]);
        const std::size_t n = std::max(a.size(), b.size());
        std::vector<T> q(n, T(0));
        for (std::size_t k = 0; k < n; ++k) {
            T acc = a.coefficient(k);
            for (std::size_t i = 1; i <= k; ++i) acc -= b.coefficient(i) * q[k - i];
            q[k] = acc / b.c_[0];
        }
        return Series(std::move(q));
    }
    Series& operator+=(const Series& o) { return *this = *this + o; }
    Series& operator-=(const Series& o) { return *this = *this - o; }
    Series& operator*=(const Series& o) { return *this = *this * o; }
    Series& operator/=(const Series& o) { return *this = *this / o; }

    Series scaled(const T& s) const {
        std::vector<T> r(c_);
        for (auto& v : r) v *= s;
        return Series(std::move(r));
    }

    friend bool operator==(const Series& a, const Series& b) {
        const std::size_t n = std::max(a.size(), b.size());
        for (std::size_t k = 0; k < n; ++k)
            if (!(a.coefficient(k) == b.coefficient(k))) return false;
        return true;
    }

private:
    std::vector<T> c_;
};

template <class T>
bool vanishes(const Series<T>& s) {
    return s[0] == T(0);
}

}  // namespace paramest
