#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sectoral/errors.hpp"

namespace sectoral {

using complex_t = std::complex<double>;

inline bool is_finite(complex_t z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline bool is_integer(double e) noexcept { return std::isfinite(e) && e == std::floor(e); }

/// How a coordinate enters a monomial: x^e, |x|^e, or sgn(x)|x|^e.
/// The signed form keeps odd-looking growth such as x|x| expressible and is
/// closed under differentiation together with the absolute form.
enum class FactorKind : std::uint8_t { power, abs_power, signed_power };

struct Factor {
    double exponent = 0.0;
    FactorKind kind = FactorKind::power;

    friend auto operator<=>(const Factor&, const Factor&) = default;
};

inline double eval_factor(const Factor& f, double x) {
    switch (f.kind) {
    case FactorKind::power:
        if (f.exponent == 0.0) return 1.0;
        return std::pow(x, f.exponent);
    case FactorKind::abs_power:
        if (f.exponent == 0.0) return 1.0;
        return std::pow(std::fabs(x), f.exponent);
    case FactorKind::signed_power: {
        const double s = (x > 0.0) - (x < 0.0);
        if (f.exponent == 0.0) return s;
        return s * std::pow(std::fabs(x), f.exponent);
    }
    }
    return 0.0;
}

struct MonomialTerm {
    complex_t coeff{0.0, 0.0};
    std::vector<Factor> factors; // one per coordinate

    std::size_t dimension() const noexcept { return factors.size(); }

    /// Throws SpecError when the term violates its invariants.
    void check() const {
        if (!is_finite(coeff)) throw SpecError("monomial coefficient is not finite");
        for (const auto& f : factors) {
            if (!std::isfinite(f.exponent) || f.exponent < 0.0)
                throw SpecError("monomial exponents must be finite and >= 0");
            if (f.kind == FactorKind::power && !is_integer(f.exponent))
                throw SpecError("non-integer exponent requires the absolute-value form");
        }
    }

    complex_t eval(std::span<const double> x) const {
        double prod = 1.0;
        for (std::size_t i = 0; i < factors.size(); ++i) prod *= eval_factor(factors[i], x[i]);
        return coeff * prod;
    }
};

inline MonomialTerm make_term(complex_t coeff, std::vector<double> exponents, std::vector<FactorKind> kinds = {}) {
    MonomialTerm t;
    t.coeff = coeff;
    t.factors.resize(exponents.size());
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        t.factors[i].exponent = exponents[i];
        t.factors[i].kind = i < kinds.size() ? kinds[i] : FactorKind::power;
    }
    return t;
}

/// Finite sum of generalized monomials in `dimension` real variables.
class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(std::size_t dimension) : dimension_(dimension) {}
    ScalarField(std::size_t dimension, std::vector<MonomialTerm> terms) : dimension_(dimension), terms_(std::move(terms)) {
        for (const auto& t : terms_) {
            if (t.dimension() != dimension_) throw DimensionError("term dimension does not match field dimension");
            t.check();
        }
        canonicalize();
    }

    std::size_t dimension() const noexcept { return dimension_; }
    const std::vector<MonomialTerm>& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }

    complex_t eval(std::span<const double> x) const {
        if (x.size() != dimension_)
            throw DimensionError("point has dimension " + std::to_string(x.size()) + ", field has " +
                                 std::to_string(dimension_));
        complex_t sum{0.0, 0.0};
        for (const auto& t : terms_) sum += t.eval(x);
        return sum;
    }

    bool is_real() const noexcept {
        return std::all_of(terms_.begin(), terms_.end(), [](const MonomialTerm& t) { return t.coeff.imag() == 0.0; });
    }

    /// Exact derivative along `axis`.
    ScalarField derivative(std::size_t axis) const {
        if (axis >= dimension_) throw DimensionError("derivative axis out of range");
        std::vector<MonomialTerm> out;
        for (const auto& t : terms_) {
            const Factor f = t.factors[axis];
            if (f.exponent == 0.0) {
                if (f.kind == FactorKind::signed_power)
                    throw NonDifferentiableError("sgn(x) factor is not differentiable at 0");
                continue;
            }
            if (f.kind != FactorKind::power && f.exponent < 1.0)
                throw NonDifferentiableError("|x|^e with e < 1 has an unbounded derivative at 0");
            MonomialTerm d = t;
            d.coeff *= f.exponent;
            d.factors[axis].exponent = f.exponent - 1.0;
            switch (f.kind) {
            case FactorKind::power: break;
            case FactorKind::abs_power: d.factors[axis].kind = FactorKind::signed_power; break;
            case FactorKind::signed_power: d.factors[axis].kind = FactorKind::abs_power; break;
            }
            out.push_back(std::move(d));
        }
        return ScalarField(dimension_, std::move(out));
    }

    /// Whether differentiating along any axis would succeed.
    bool differentiable() const noexcept {
        for (const auto& t : terms_)
            for (const auto& f : t.factors)
                if (f.kind != FactorKind::power && f.exponent < 1.0 &&
                    (f.exponent != 0.0 || f.kind == FactorKind::signed_power))
                    return false;
        return true;
    }

    /// Largest exponent along `axis` among the terms that survive when every
    /// other coordinate is set to zero; 0 when nothing survives.
    double axis_degree(std::size_t axis, double* leading_abs_coeff = nullptr) const {
        double best = 0.0;
        double coeff2 = 0.0;
        bool found = false;
        for (const auto& t : axis_restriction(axis)) {
            const double e = t.factors[axis].exponent;
            if (!found || e > best) {
                best = e;
                coeff2 = 0.0;
                found = true;
            }
            if (e == best) coeff2 += std::norm(t.coeff);
        }
        if (leading_abs_coeff) *leading_abs_coeff = std::sqrt(coeff2);
        return found ? best : 0.0;
    }

    ScalarField scaled(complex_t c) const {
        ScalarField out = *this;
        for (auto& t : out.terms_) t.coeff *= c;
        out.canonicalize();
        return out;
    }

    friend ScalarField operator+(const ScalarField& a, const ScalarField& b) {
        if (a.dimension_ != b.dimension_) throw DimensionError("adding fields of different dimension");
        std::vector<MonomialTerm> all = a.terms_;
        all.insert(all.end(), b.terms_.begin(), b.terms_.end());
        return ScalarField(a.dimension_, std::move(all));
    }
    ScalarField operator-() const { return scaled(-1.0); }
    friend ScalarField operator-(const ScalarField& a, const ScalarField& b) { return a + (-b); }

    friend bool operator==(const ScalarField& a, const ScalarField& b) {
        if (a.dimension_ != b.dimension_ || a.terms_.size() != b.terms_.size()) return false;
        for (std::size_t i = 0; i < a.terms_.size(); ++i)
            if (a.terms_[i].coeff != b.terms_[i].coeff || a.terms_[i].factors != b.terms_[i].factors) return false;
        return true;
    }

  private:
    std::vector<MonomialTerm> axis_restriction(std::size_t axis) const {
        std::vector<MonomialTerm> out;
        for (const auto& t : terms_) {
            bool survives = true;
            for (std::size_t i = 0; i < t.factors.size() && survives; ++i) {
                if (i == axis) continue;
                survives = t.factors[i].exponent == 0.0 && t.factors[i].kind != FactorKind::signed_power;
            }
            if (survives && t.coeff != complex_t{}) out.push_back(t);
        }
        return out;
    }

    // Sort terms lexicographically by exponent vector (kind vector breaks ties), merge equal
    // monomials and drop zero coefficients.
    void canonicalize() {
        for (auto& t : terms_)
            for (auto& f : t.factors)
                if (f.exponent == 0.0 && f.kind == FactorKind::abs_power) f.kind = FactorKind::power;
        auto key = [](const MonomialTerm& t) {
            std::pair<std::vector<double>, std::vector<int>> k;
            for (const auto& f : t.factors) {
                k.first.push_back(f.exponent);
                k.second.push_back(static_cast<int>(f.kind));
            }
            return k;
        };
        std::stable_sort(terms_.begin(), terms_.end(),
                         [&](const MonomialTerm& a, const MonomialTerm& b) { return key(a) < key(b); });
        std::vector<MonomialTerm> merged;
        for (auto& t : terms_) {
            if (!merged.empty() && merged.back().factors == t.factors)
                merged.back().coeff += t.coeff;
            else
                merged.push_back(std::move(t));
        }
        std::erase_if(merged, [](const MonomialTerm& t) { return t.coeff == complex_t{}; });
        terms_ = std::move(merged);
    }

    std::size_t dimension_ = 0;
    std::vector<MonomialTerm> terms_;
};

/// Magnetic vector potential A = (A_1, ..., A_d); must be real-valued.
struct VectorField {
    std::vector<ScalarField> components;

    std::size_t dimension() const noexcept { return components.size(); }
    bool is_real() const noexcept {
        return std::all_of(components.begin(), components.end(), [](const ScalarField& f) { return f.is_real(); });
    }
    bool is_zero() const noexcept {
        return std::all_of(components.begin(), components.end(), [](const ScalarField& f) { return f.empty(); });
    }
    friend bool operator==(const VectorField&, const VectorField&) = default;
};

/// d x d matrix of fields; for the magnetic matrix it is antisymmetric.
struct FieldMatrix {
    std::size_t dimension = 0;
    std::vector<ScalarField> entries; // row-major

    const ScalarField& operator()(std::size_t j, std::size_t k) const { return entries[j * dimension + k]; }
    ScalarField& operator()(std::size_t j, std::size_t k) { return entries[j * dimension + k]; }

    bool is_antisymmetric() const {
        for (std::size_t j = 0; j < dimension; ++j) {
            if (!(*this)(j, j).empty()) return false;
            for (std::size_t k = j + 1; k < dimension; ++k)
                if (!((*this)(j, k) == -(*this)(k, j))) return false;
        }
        return true;
    }
};

} // namespace sectoral
