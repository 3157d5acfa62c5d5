#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "bufrelay/errors.hpp"

namespace bufrelay {

/// Exact rational number on int64 numerator/denominator.
///
/// Transmission rates, the alpha lattice and the link-selection decision
/// metrics are all rationals; tie detection between metrics must be exact or
/// the tie modes get misclassified. Intermediate products are carried in
/// 128-bit integers; a result that does not fit int64 after reduction throws.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d) { *this = make(n, d); }

    /// Parses a decimal literal ("1.75", "-0.5", "3", "2e-2") as an exact
    /// decimal fraction.
    static Rational from_decimal(std::string_view s) {
        std::size_t i = 0;
        bool neg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = (s[i++] == '-');
        __int128 digits = 0;
        int frac_len = 0;
        bool seen_digit = false, in_frac = false;
        for (; i < s.size(); ++i) {
            char c = s[i];
            if (c >= '0' && c <= '9') {
                digits = digits * 10 + (c - '0');
                if (digits > max_i128()) throw invalid_parameter("decimal literal too large: " + std::string(s));
                if (in_frac) ++frac_len;
                seen_digit = true;
            } else if (c == '.' && !in_frac) {
                in_frac = true;
            } else if (c == 'e' || c == 'E') {
                break;
            } else {
                throw invalid_parameter("not a decimal literal: " + std::string(s));
            }
        }
        int exp10 = 0;
        if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
            int val = 0;
            auto rc = std::from_chars(s.data() + i + 1, s.data() + s.size(), val);
            if (rc.ec != std::errc{} || rc.ptr != s.data() + s.size() || val < -30 || val > 30)
                throw invalid_parameter("bad exponent in decimal literal: " + std::string(s));
            exp10 = val;
        } else if (i != s.size()) {
            throw invalid_parameter("not a decimal literal: " + std::string(s));
        }
        if (!seen_digit) throw invalid_parameter("empty decimal literal");
        __int128 num = neg ? -digits : digits;
        __int128 den = 1;
        int net = exp10 - frac_len;
        for (; net > 0; --net) num = checked_mul10(num, s);
        for (; net < 0; ++net) den = checked_mul10(den, s);
        return make128(num, den);
    }

    /// Exact decimal value of `v` via its shortest round-trip representation,
    /// so 1.1 becomes 11/10 rather than the underlying binary fraction.
    static Rational from_double(double v) {
        char buf[40];
        auto rc = std::to_chars(buf, buf + sizeof(buf), v);
        if (rc.ec != std::errc{}) throw invalid_parameter("value not representable as a rational");
        return from_decimal(std::string_view(buf, static_cast<std::size_t>(rc.ptr - buf)));
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_zero() const { return num_ == 0; }

    std::string str() const {
        std::string s = std::to_string(num_);
        if (den_ != 1) s += "/" + std::to_string(den_);
        return s;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make128(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make128(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw invalid_parameter("rational division by zero");
        return make128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

private:
    using i128 = __int128;

    static constexpr i128 max_i128() { return i128(1) << 100; }

    static i128 checked_mul10(i128 v, std::string_view s) {
        if (v > max_i128() / 10 || v < -(max_i128() / 10))
            throw invalid_parameter("decimal literal out of range: " + std::string(s));
        return v * 10;
    }

    static Rational make(std::int64_t n, std::int64_t d) { return make128(n, d); }

    static Rational make128(i128 n, i128 d) {
        if (d == 0) throw invalid_parameter("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        constexpr i128 lo = static_cast<i128>(INT64_MIN);
        constexpr i128 hi = static_cast<i128>(INT64_MAX);
        if (n < lo || n > hi || d > hi)
            throw numeric_failure("rational overflow", 0.0, 0.0);
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) {
            i128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace bufrelay
