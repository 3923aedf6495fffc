#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ratobs/rational.hpp"
#include "ratobs/vartable.hpp"

namespace ratobs {

// Sparse power product: sorted (variable, exponent) pairs, exponents > 0.
class Monomial {
  public:
    Monomial() = default;

    static Monomial variable(int v, int e = 1) {
        Monomial m;
        if (e > 0) m.exps_.emplace_back(v, e);
        return m;
    }

    bool is_one() const { return exps_.empty(); }

    int total_degree() const {
        int d = 0;
        for (auto &[v, e] : exps_) d += e;
        return d;
    }

    int degree_in(int v) const {
        for (auto &[w, e] : exps_)
            if (w == v) return e;
        return 0;
    }

    Monomial times(const Monomial &o) const;

    // Quotient this / o, or nullopt unless o divides this.
    std::optional<Monomial> divided_by(const Monomial &o) const;

    bool divides(const Monomial &m) const { return m.divided_by(*this).has_value(); }

    static Monomial lcm(const Monomial &a, const Monomial &b);

    Monomial without(int v) const;
    Monomial with_exponent(int v, int e) const; // replaces (or erases when e == 0)

    const std::vector<std::pair<int, int>> &exponents() const { return exps_; }

    bool operator==(const Monomial &o) const { return exps_ == o.exps_; }

  private:
    std::vector<std::pair<int, int>> exps_;
};

// Graded reverse lexicographic comparison over the natural variable order.
// Returns <0, 0, >0 as a is smaller, equal, larger than b.
int grevlex_compare(const Monomial &a, const Monomial &b);

// Total order on monomials. Grevlex is always taken over the natural table
// order; lex carries an explicit priority sequence (most significant first)
// so a block split can push state and auxiliary variables ahead of tags.
struct MonomialOrder {
    enum class Kind { Grevlex, Lex };
    Kind kind = Kind::Grevlex;
    std::vector<int> priority; // lex only

    static MonomialOrder grevlex() { return {}; }
    static MonomialOrder lex(std::vector<int> prio) {
        return {Kind::Lex, std::move(prio)};
    }

    int compare(const Monomial &a, const Monomial &b) const;
    bool greater(const Monomial &a, const Monomial &b) const { return compare(a, b) > 0; }
};

struct MonomialGrevlexLess {
    bool operator()(const Monomial &a, const Monomial &b) const {
        return grevlex_compare(a, b) < 0;
    }
};

// Scoped cap on polynomial kernel work (term-products and division steps).
// Multiplications charge their full cost before doing any work, so a
// hopeless product raises ResourceExceeded immediately instead of grinding.
// Outermost scope wins; no effect on threads without a scope.
class AlgebraBudget {
  public:
    explicit AlgebraBudget(long limit);
    ~AlgebraBudget();
    AlgebraBudget(const AlgebraBudget &) = delete;
    AlgebraBudget &operator=(const AlgebraBudget &) = delete;

    static void charge(long amount);

  private:
    bool installed_ = false;
};

// Sparse distributed multivariate polynomial with exact rational
// coefficients. Terms are stored grevlex-ascending; no zero coefficients.
class Polynomial {
  public:
    using TermMap = std::map<Monomial, BigRational, MonomialGrevlexLess>;

    Polynomial() = default;
    explicit Polynomial(VarTablePtr table) : table_(std::move(table)) {}

    static Polynomial constant(VarTablePtr table, const BigRational &c);
    static Polynomial variable(VarTablePtr table, int v);

    const VarTablePtr &table() const { return table_; }
    const TermMap &terms() const { return terms_; }
    int term_count() const { return static_cast<int>(terms_.size()); }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one()); }
    // The constant value; only meaningful when is_constant().
    BigRational constant_value() const { return terms_.empty() ? BigRational(0) : terms_.begin()->second; }
    bool is_one() const { return is_constant() && constant_value() == 1; }

    int total_degree() const;
    int degree_in(int v) const;
    std::set<int> variables() const;
    bool uses_role(VarRole role) const;

    void add_term(const Monomial &m, const BigRational &c); // accumulates, drops zeros

    Polynomial operator-() const;
    Polynomial operator+(const Polynomial &o) const;
    Polynomial operator-(const Polynomial &o) const;
    Polynomial operator*(const Polynomial &o) const;
    Polynomial times(const Monomial &m, const BigRational &c) const;
    Polynomial scaled(const BigRational &c) const;
    Polynomial pow(int e) const;

    Polynomial partial(int v) const;

    // Coefficient polynomials of v^0 .. v^deg (dense by exponent).
    std::vector<Polynomial> coefficients_in(int v) const;
    Polynomial coefficient_of(int v, int e) const;

    // Leading data under an arbitrary admissible order (linear scan).
    const Monomial &leading_monomial(const MonomialOrder &ord) const;
    BigRational leading_coefficient(const MonomialOrder &ord) const;

    BigRational eval(const std::vector<BigRational> &point) const; // indexed by variable
    double eval_double(const std::vector<double> &point) const;

    // Scales to integer coefficients with content 1 and positive leading
    // (grevlex) coefficient. Zero stays zero.
    Polynomial integer_primitive() const;

    std::string str() const;

    bool operator==(const Polynomial &o) const { return terms_ == o.terms_; }

  private:
    VarTablePtr table_;
    TermMap terms_;

    friend Polynomial poly_from_terms(VarTablePtr table, Polynomial::TermMap terms);
};

Polynomial poly_from_terms(VarTablePtr table, Polynomial::TermMap terms);

// Exact quotient a / b, or nullopt when b does not divide a.
std::optional<Polynomial> divide_exact(const Polynomial &a, const Polynomial &b);

// Pseudo-remainder of a by b viewed as univariate in v (deg_v b >= 1).
Polynomial pseudo_remainder(const Polynomial &a, const Polynomial &b, int v);

// Common divisor via recursive primitive PRS; result is integer-primitive
// with positive leading coefficient. gcd(p, 0) = unit-normalized p.
Polynomial gcd_poly(const Polynomial &p, const Polynomial &q);

// gcd over the coefficients of p in v (the content), and p stripped of it.
Polynomial content_in(const Polynomial &p, int v);
Polynomial primitive_part_in(const Polynomial &p, int v);

// Factor of p involving only Parameter variables: the gcd of the
// parameter-coefficients of p grouped by its non-parameter monomials.
Polynomial parameter_content(const Polynomial &p);

// Divides out repeated factors: p / gcd(p, dp/dv) over every variable of p.
Polynomial squarefree_part(const Polynomial &p);

} // namespace ratobs
