// nlpot/rational.hpp
//
// Exact rational arithmetic for the exponent identities. All derived
// exponents are rational functions of (n, p, q, alpha, r); computing them
// over Q makes identity checks exact (no tolerance).
#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace nlpot {

class Rational {
  public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }

    long long num() const { return num_; }
    long long den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    // Parses "3", "-3", "3/2", and plain decimals like "0.5" (exactly,
    // as 5/10). Returns nullopt on malformed input.
    static std::optional<Rational> parse(const std::string& text) {
        if (text.empty()) return std::nullopt;
        const auto slash = text.find('/');
        if (slash != std::string::npos) {
            auto n = parse_integer(text.substr(0, slash));
            auto d = parse_integer(text.substr(slash + 1));
            if (!n || !d || *d == 0) return std::nullopt;
            return Rational(*n, *d);
        }
        const auto dot = text.find('.');
        if (dot != std::string::npos) {
            const std::string head = text.substr(0, dot);
            const std::string frac = text.substr(dot + 1);
            if (frac.empty() || frac.size() > 18) return std::nullopt;
            auto h = parse_integer(head.empty() || head == "-" ? head + "0" : head);
            if (!h) return std::nullopt;
            long long scale = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) {
                if (frac[i] < '0' || frac[i] > '9') return std::nullopt;
                scale = mul_checked(scale, 10);
            }
            auto f = parse_integer(frac);
            if (!f) return std::nullopt;
            const bool neg = !head.empty() && head[0] == '-';
            return Rational(*h, 1) + Rational(neg ? -*f : *f, scale);
        }
        auto n = parse_integer(text);
        if (!n) return std::nullopt;
        return Rational(*n, 1);
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational::from128(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                                 i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational::from128(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                                 i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational::from128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
        return Rational::from128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational operator-() const { return Rational(-num_, den_); }

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

    static std::optional<long long> parse_integer(const std::string& s) {
        if (s.empty()) return std::nullopt;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return std::nullopt;
        long long v = 0;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            v = mul_checked(v, 10);
            v += s[i] - '0';
        }
        return (s[0] == '-') ? -v : v;
    }

    static long long mul_checked(long long a, long long b) {
        const i128 r = i128(a) * b;
        if (r > INT64_MAX || r < INT64_MIN) throw std::overflow_error("Rational overflow");
        return static_cast<long long>(r);
    }

    static Rational from128(i128 n, i128 d) {
        if (d == 0) throw std::domain_error("Rational: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        const i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("Rational overflow");
        Rational r;
        r.num_ = static_cast<long long>(n);
        r.den_ = static_cast<long long>(d);
        return r;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) { const i128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("Rational: zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        const long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    long long num_;
    long long den_;
};

}  // namespace nlpot
