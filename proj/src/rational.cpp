#include "paramest/rational.hpp"

#include <cctype>

#include "paramest/errors.hpp"

namespace paramest {

using boost::multiprecision::cpp_int;

Rational parse_decimal(std::string_view text) {
    cpp_int mantissa = 0;
    int scale = 0;
    bool seen_digit = false;
    bool after_point = false;
    std::size_t i = 0;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mantissa = mantissa * 10 + (c - '0');
            if (after_point) --scale;
            seen_digit = true;
        } else if (c == '.' && !after_point) {
            after_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw ParseError("malformed number '" + std::string(text) + "'");
    if (i < text.size()) {
        if (text[i] != 'e' && text[i] != 'E') throw ParseError("malformed number '" + std::string(text) + "'");
        ++i;
        int sign = 1;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
            sign = text[i] == '-' ? -1 : 1;
            ++i;
        }
        if (i >= text.size()) throw ParseError("malformed exponent in '" + std::string(text) + "'");
        int exponent = 0;
        for (; i < text.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(text[i])))
                throw ParseError("malformed exponent in '" + std::string(text) + "'");
            exponent = exponent * 10 + (text[i] - '0');
            if (exponent > 400) throw ParseError("exponent out of range in '" + std::string(text) + "'");
        }
        scale += sign * exponent;
    }
    cpp_int power = 1;
    for (int k = 0; k < (scale < 0 ? -scale : scale); ++k) power *= 10;
    return scale >= 0 ? Rational(mantissa * power) : Rational(mantissa, power);
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

bool is_decimal(const Rational& value) {
    cpp_int den = boost::multiprecision::denominator(value);
    while (den % 2 == 0) den /= 2;
    while (den % 5 == 0) den /= 5;
    return den == 1;
}

std::string to_string(const Rational& value) {
    const cpp_int num = boost::multiprecision::numerator(value);
    const cpp_int den = boost::multiprecision::denominator(value);
    if (den == 1) return num.str();
    if (!is_decimal(value)) return num.str() + "/" + den.str();
    // den = 2^a 5^b: scale to a power of ten.
    int digits = 0;
    cpp_int ten_power = 1;
    while (ten_power % den != 0) {
        ten_power *= 10;
        ++digits;
    }
    cpp_int scaled = num * (ten_power / den);
    const bool negative = scaled < 0;
    if (negative) scaled = -scaled;
    std::string s = scaled.str();
    if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits) - s.size() + 1, '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    return negative ? "-" + s : s;
}

Rational binomial(int n, int k) {
    if (k < 0 || k > n) return Rational(0);
    cpp_int result = 1;
    for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return Rational(result);
}

}  // namespace paramest
