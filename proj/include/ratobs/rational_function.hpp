#pragma once

#include <map>
#include <optional>
#include <string>

#include "ratobs/polynomial.hpp"

namespace ratobs {

// Exact quotient of polynomials. Normalized: gcd(num, den) = 1 and the
// grevlex-leading coefficient of den is 1 (constants have den == 1).
//
// Internally the denominator is kept as a product of integer-primitive
// factors. Arithmetic, differentiation and composition all build
// denominators multiplicatively, so keeping the factors explicit makes
// cancellation a sequence of small gcds instead of one large one.
class RationalFunction {
  public:
    RationalFunction() = default;
    explicit RationalFunction(Polynomial num); // den = 1
    RationalFunction(Polynomial num, Polynomial den); // throws DivisionByZero on den == 0

    static RationalFunction constant(VarTablePtr table, const BigRational &c);
    static RationalFunction variable(VarTablePtr table, int v);

    const Polynomial &num() const { return num_; }
    const Polynomial &den() const { return den_; }
    const VarTablePtr &table() const { return num_.table(); }

    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.is_one(); }

    RationalFunction operator-() const;
    RationalFunction pow(int e) const; // e may be negative for nonzero values

    int term_count() const { return num_.term_count() + den_.term_count(); }

    std::string str() const;

    // Denominator factors (integer-primitive, exponents >= 1). Their product
    // equals den() up to a positive rational scale.
    using Factors = std::vector<std::pair<Polynomial, int>>;
    const Factors &den_factors() const { return factors_; }

    // Value num / prod factors^exp; cancels num against every factor.
    static RationalFunction from_factored(Polynomial num, Factors factors);

    // numerator against the unscaled factor product
    Polynomial raw_num() const;
    BigRational factor_scale() const; // leading coefficient of the factor product

  private:
    Polynomial num_, den_;
    Factors factors_;

    void reduce_and_finish(); // expects num_ and factors_; fills den_
};

RationalFunction add(const RationalFunction &a, const RationalFunction &b);
RationalFunction sub(const RationalFunction &a, const RationalFunction &b);
RationalFunction mul(const RationalFunction &a, const RationalFunction &b);
RationalFunction div(const RationalFunction &a, const RationalFunction &b); // DivisionByZero on b == 0

inline RationalFunction operator+(const RationalFunction &a, const RationalFunction &b) { return add(a, b); }
inline RationalFunction operator-(const RationalFunction &a, const RationalFunction &b) { return sub(a, b); }
inline RationalFunction operator*(const RationalFunction &a, const RationalFunction &b) { return mul(a, b); }
inline RationalFunction operator/(const RationalFunction &a, const RationalFunction &b) { return div(a, b); }

// Partial derivative by the quotient rule, exact.
RationalFunction partial(const RationalFunction &g, int v);

using Bindings = std::map<int, RationalFunction>;

// Composition g(x)|_{x_v = bindings[v]}. Unbound variables are left alone.
// Throws ZeroDenominatorAfterSubstitution when the denominator collapses.
RationalFunction substitute(const RationalFunction &g, const Bindings &bindings);
RationalFunction substitute(const Polynomial &p, const Bindings &bindings);

// Equality by cross-multiplication: a.num * b.den == b.num * a.den.
bool eq(const RationalFunction &a, const RationalFunction &b);

// Exact evaluation; nullopt when the denominator vanishes at the point.
std::optional<BigRational> eval_rational(const RationalFunction &g,
                                         const std::vector<BigRational> &point);

} // namespace ratobs
