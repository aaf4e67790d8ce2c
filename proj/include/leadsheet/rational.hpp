#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>

namespace leadsheet {

/// Exact fraction on 64-bit integers, always kept normalized with a
/// positive denominator. Big enough for score arithmetic (durations,
/// onsets); not a general bignum.
struct Rational {
    long long num = 0;
    long long den = 1;

    constexpr Rational() = default;
    constexpr Rational(long long n) : num(n), den(1) {}
    constexpr Rational(long long n, long long d) : num(n), den(d) { normalize(); }

    constexpr void normalize() {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (num == 0) den = 1;
    }

    constexpr Rational operator+(const Rational& o) const { return {num * o.den + o.num * den, den * o.den}; }
    constexpr Rational operator-(const Rational& o) const { return {num * o.den - o.num * den, den * o.den}; }
    constexpr Rational operator*(const Rational& o) const { return {num * o.num, den * o.den}; }
    constexpr Rational operator/(const Rational& o) const { return {num * o.den, den * o.num}; }
    constexpr Rational& operator+=(const Rational& o) { return *this = *this + o; }
    constexpr Rational& operator-=(const Rational& o) { return *this = *this - o; }

    constexpr bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    constexpr std::strong_ordering operator<=>(const Rational& o) const {
        long long lhs = num * o.den;
        long long rhs = o.num * den;
        return lhs <=> rhs;
    }

    std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

} // namespace leadsheet
