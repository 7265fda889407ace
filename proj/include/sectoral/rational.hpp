#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>

#include "sectoral/errors.hpp"

namespace sectoral {

/// Exact rational number in lowest terms with a positive denominator.
class Rational {
  public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1) { assign(num, den); }

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string str() const {
        return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_wide(wide(a.num_) * b.den_ + wide(b.num_) * a.den_, wide(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return from_wide(wide(a.num_) * b.den_ - wide(b.num_) * a.den_, wide(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_wide(wide(a.num_) * b.num_, wide(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw ParameterError("rational division by zero");
        return from_wide(wide(a.num_) * b.den_, wide(a.den_) * b.num_);
    }
    Rational operator-() const { return Rational(-num_, den_); }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
        return wide(a.num_) * b.den_ <=> wide(b.num_) * a.den_;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

  private:
    using wide_t = __int128;
    static wide_t wide(std::int64_t v) { return static_cast<wide_t>(v); }

    static wide_t gcd_wide(wide_t a, wide_t b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            wide_t t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static Rational from_wide(wide_t n, wide_t d) {
        if (d == 0) throw ParameterError("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        wide_t g = gcd_wide(n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        constexpr auto lim = static_cast<wide_t>(std::numeric_limits<std::int64_t>::max());
        if (n > lim || -n > lim || d > lim) throw ParameterError("rational overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }

    void assign(std::int64_t n, std::int64_t d) { *this = from_wide(wide(n), wide(d)); }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Recovers an exact rational from a double when one with a modest denominator
/// reproduces it to within `tol` (continued-fraction convergents).
inline std::optional<Rational> rationalize(double x, std::int64_t max_den = 1'000'000, double tol = 1e-12) {
    if (!std::isfinite(x)) return std::nullopt;
    const double target = x;
    long double r = x;
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int iter = 0; iter < 64; ++iter) {
        const long double a = std::floor(r);
        if (std::fabs(a) > 1e15L) break;
        const auto ai = static_cast<std::int64_t>(a);
        const std::int64_t p2 = ai * p1 + p0;
        const std::int64_t q2 = ai * q1 + q0;
        if (q2 > max_den) break;
        if (std::fabs(static_cast<double>(p2) / static_cast<double>(q2) - target) <= tol * std::max(1.0, std::fabs(target)))
            return Rational(p2, q2);
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        const long double frac = r - a;
        if (frac == 0) break;
        r = 1.0L / frac;
    }
    return std::nullopt;
}

} // namespace sectoral
