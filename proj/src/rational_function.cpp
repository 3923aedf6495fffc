#include "ratobs/rational_function.hpp"

#include <algorithm>

#include "ratobs/errors.hpp"

namespace ratobs {

namespace {

const MonomialOrder kGrevlex = MonomialOrder::grevlex();

// grevlex leading coefficient of a product is the product of the leading
// coefficients; no expansion needed
BigRational factors_leading_coefficient(const RationalFunction::Factors &factors) {
    BigRational lc = 1;
    for (auto &[f, e] : factors) {
        BigRational c = f.leading_coefficient(kGrevlex);
        for (int i = 0; i < e; ++i) lc *= c;
    }
    return lc;
}

BigRational rational_pow(const BigRational &c, int e) {
    BigRational out = 1;
    for (int i = 0; i < e; ++i) out *= c;
    return out;
}

} // namespace

RationalFunction::RationalFunction(Polynomial num) : num_(std::move(num)) {
    den_ = Polynomial::constant(num_.table(), 1);
}

RationalFunction::RationalFunction(Polynomial num, Polynomial den) : num_(std::move(num)) {
    if (den.is_zero()) throw DivisionByZero();
    VarTablePtr table = num_.table() ? num_.table() : den.table();
    if (den.is_constant()) {
        num_ = num_.scaled(BigRational(1) / den.constant_value());
        den_ = Polynomial::constant(table, 1);
        return;
    }
    factors_.emplace_back(std::move(den), 1);
    reduce_and_finish();
}

RationalFunction RationalFunction::from_factored(Polynomial num, Factors factors) {
    RationalFunction out;
    out.num_ = std::move(num);
    out.factors_ = std::move(factors);
    out.reduce_and_finish();
    return out;
}

BigRational RationalFunction::factor_scale() const {
    return factors_leading_coefficient(factors_);
}

Polynomial RationalFunction::raw_num() const {
    BigRational lc = factor_scale();
    return lc == 1 ? num_ : num_.scaled(lc);
}

void RationalFunction::reduce_and_finish() {
    VarTablePtr table = num_.table();
    for (auto &[f, e] : factors_)
        if (!table && f.table()) table = f.table();

    // fold constant and unit parts of the factors into the numerator,
    // merge duplicates
    Factors merged;
    for (auto &[f, e] : factors_) {
        if (f.is_zero()) throw DivisionByZero();
        if (e <= 0) {
            if (e < 0) throw Error("internal: negative factor exponent");
            continue;
        }
        if (f.is_constant()) {
            num_ = num_.scaled(BigRational(1) / rational_pow(f.constant_value(), e));
            continue;
        }
        Polynomial prim = f.integer_primitive();
        BigRational unit =
            f.leading_coefficient(kGrevlex) / prim.leading_coefficient(kGrevlex);
        if (unit != 1) num_ = num_.scaled(BigRational(1) / rational_pow(unit, e));
        bool found = false;
        for (auto &[g, ge] : merged)
            if (g == prim) {
                ge += e;
                found = true;
                break;
            }
        if (!found) merged.emplace_back(std::move(prim), e);
    }
    factors_ = std::move(merged);

    if (num_.is_zero()) {
        factors_.clear();
        den_ = Polynomial::constant(table, 1);
        return;
    }

    // cancel the numerator against the factors, one gcd at a time; whole
    // copies go by trial division, and linear factors cannot cancel partially
    for (size_t i = 0; i < factors_.size();) {
        auto &[f, e] = factors_[i];
        if (auto q = divide_exact(num_, f)) {
            num_ = *q;
            if (--e == 0) factors_.erase(factors_.begin() + static_cast<long>(i));
            continue;
        }
        if (f.total_degree() == 1) {
            ++i;
            continue;
        }
        Polynomial g = gcd_poly(num_, f);
        if (g.is_constant()) {
            ++i;
            continue;
        }
        auto qn = divide_exact(num_, g);
        auto qf = divide_exact(f, g);
        if (!qn || !qf) throw Error("gcd does not divide its inputs");
        num_ = *qn;
        if (qf->is_constant()) {
            num_ = num_.scaled(BigRational(1) / qf->constant_value());
            if (--e == 0) factors_.erase(factors_.begin() + static_cast<long>(i));
            // same factor may divide again; stay on this slot
        } else {
            Polynomial rest = qf->integer_primitive();
            BigRational unit =
                qf->leading_coefficient(kGrevlex) / rest.leading_coefficient(kGrevlex);
            num_ = num_.scaled(BigRational(1) / unit);
            if (e == 1) {
                f = std::move(rest);
            } else {
                --e;
                factors_.emplace_back(std::move(rest), 1);
            }
        }
    }

    if (factors_.empty()) {
        den_ = Polynomial::constant(table, 1);
        return;
    }
    den_ = Polynomial::constant(table, 1);
    for (auto &[f, e] : factors_) den_ = den_ * f.pow(e);
    BigRational lc = den_.leading_coefficient(kGrevlex);
    if (lc != 1) {
        num_ = num_.scaled(BigRational(1) / lc);
        den_ = den_.scaled(BigRational(1) / lc);
    }
}

RationalFunction RationalFunction::constant(VarTablePtr table, const BigRational &c) {
    return RationalFunction(Polynomial::constant(std::move(table), c));
}

RationalFunction RationalFunction::variable(VarTablePtr table, int v) {
    return RationalFunction(Polynomial::variable(std::move(table), v));
}

RationalFunction RationalFunction::operator-() const {
    RationalFunction out = *this;
    out.num_ = -out.num_;
    return out;
}

RationalFunction RationalFunction::pow(int e) const {
    if (e == 0) return constant(table(), 1);
    if (e < 0) return constant(table(), 1) / pow(-e);
    Factors factors = factors_;
    for (auto &[f, fe] : factors) fe *= e;
    return from_factored(raw_num().pow(e), std::move(factors));
}

std::string RationalFunction::str() const {
    if (den_.is_one()) return num_.str();
    return "(" + num_.str() + ")/(" + den_.str() + ")";
}

RationalFunction add(const RationalFunction &a, const RationalFunction &b) {
    VarTablePtr table = a.table() ? a.table() : b.table();
    // common denominator: shared factors at their maximal exponent
    RationalFunction::Factors merged = a.den_factors();
    Polynomial mult_a = Polynomial::constant(table, 1);
    Polynomial mult_b = Polynomial::constant(table, 1);
    for (auto &[g, ge] : b.den_factors()) {
        bool shared = false;
        for (auto &[f, fe] : merged)
            if (f == g) {
                if (ge > fe) {
                    mult_a = mult_a * f.pow(ge - fe);
                    fe = ge;
                } else if (fe > ge) {
                    mult_b = mult_b * f.pow(fe - ge);
                }
                shared = true;
                break;
            }
        if (!shared) {
            merged.emplace_back(g, ge);
            mult_a = mult_a * g.pow(ge);
        }
    }
    for (auto &[f, fe] : a.den_factors()) {
        bool in_b = false;
        for (auto &[g, ge] : b.den_factors())
            if (f == g) in_b = true;
        if (!in_b) mult_b = mult_b * f.pow(fe);
    }
    Polynomial num = a.raw_num() * mult_a + b.raw_num() * mult_b;
    return RationalFunction::from_factored(std::move(num), std::move(merged));
}

RationalFunction sub(const RationalFunction &a, const RationalFunction &b) { return add(a, -b); }

RationalFunction mul(const RationalFunction &a, const RationalFunction &b) {
    RationalFunction::Factors factors = a.den_factors();
    for (auto &fe : b.den_factors()) factors.push_back(fe);
    return RationalFunction::from_factored(a.raw_num() * b.raw_num(), std::move(factors));
}

RationalFunction div(const RationalFunction &a, const RationalFunction &b) {
    if (b.is_zero()) throw DivisionByZero();
    RationalFunction::Factors factors = a.den_factors();
    factors.emplace_back(b.raw_num(), 1);
    // a / b = a * (prod b.factors) / b.raw_num
    Polynomial b_den_raw = b.den().scaled(b.factor_scale());
    return RationalFunction::from_factored(a.raw_num() * b_den_raw, std::move(factors));
}

RationalFunction partial(const RationalFunction &g, int v) {
    // reduced quotient rule over the factored denominator:
    // (n / prod f_i^{e_i})' = (n' F - n sum_i e_i f_i' F/f_i) / (F prod f_i^{e_i})
    // with F = prod f_i (each factor once)
    const auto &factors = g.den_factors();
    if (factors.empty()) return RationalFunction(g.num().partial(v));

    VarTablePtr table = g.table();
    Polynomial n = g.raw_num();
    Polynomial big_f = Polynomial::constant(table, 1);
    for (auto &[f, e] : factors) big_f = big_f * f;

    Polynomial correction(table);
    for (size_t i = 0; i < factors.size(); ++i) {
        Polynomial df = factors[i].first.partial(v);
        if (df.is_zero()) continue;
        Polynomial cofactor = Polynomial::constant(table, factors[i].second);
        for (size_t j = 0; j < factors.size(); ++j)
            if (j != i) cofactor = cofactor * factors[j].first;
        correction = correction + df * cofactor;
    }
    Polynomial num = n.partial(v) * big_f - n * correction;
    RationalFunction::Factors out = factors;
    for (auto &[f, e] : out) e += 1;
    return RationalFunction::from_factored(std::move(num), std::move(out));
}

namespace {

// p with bound variables replaced, kept as numerator over per-binding
// denominator powers: p|_{x_v=n_v/d_v} = num / prod_v d_v^{max_exp[v]}
struct SubstitutedParts {
    Polynomial num;
    std::map<int, int> den_exponents; // bound variable -> power of its binding's den
};

SubstitutedParts substitute_parts(const Polynomial &p, const Bindings &bindings) {
    VarTablePtr table = p.table();
    std::map<int, int> max_exp;
    for (auto &[m, c] : p.terms())
        for (auto &[v, e] : m.exponents())
            if (bindings.count(v)) max_exp[v] = std::max(max_exp[v], e);

    std::map<int, std::vector<Polynomial>> num_pow, den_pow;
    for (auto &[v, top] : max_exp) {
        const RationalFunction &b = bindings.at(v);
        std::vector<Polynomial> np{Polynomial::constant(table, 1), b.num()};
        std::vector<Polynomial> dp{Polynomial::constant(table, 1), b.den()};
        for (int e = 2; e <= top; ++e) {
            np.push_back(np.back() * b.num());
            dp.push_back(dp.back() * b.den());
        }
        num_pow[v] = std::move(np);
        den_pow[v] = std::move(dp);
    }

    Polynomial acc(table);
    for (auto &[m, c] : p.terms()) {
        Polynomial term = Polynomial::constant(table, c);
        Monomial untouched;
        for (auto &[v, e] : m.exponents())
            if (!max_exp.count(v)) untouched = untouched.with_exponent(v, e);
        for (auto &[v, top] : max_exp) {
            int e = m.degree_in(v);
            if (e > 0) term = term * num_pow[v][e];
            if (top - e > 0) term = term * den_pow[v][top - e];
        }
        acc = acc + term.times(untouched, 1);
    }
    return {std::move(acc), std::move(max_exp)};
}

} // namespace

RationalFunction substitute(const Polynomial &p, const Bindings &bindings) {
    SubstitutedParts parts = substitute_parts(p, bindings);
    RationalFunction::Factors factors;
    for (auto &[v, e] : parts.den_exponents) {
        const Polynomial &d = bindings.at(v).den();
        if (!d.is_constant()) factors.emplace_back(d, e);
        else if (d.constant_value() != 1)
            parts.num = parts.num.scaled(BigRational(1) / rational_pow(d.constant_value(), e));
    }
    return RationalFunction::from_factored(std::move(parts.num), std::move(factors));
}

RationalFunction substitute(const RationalFunction &g, const Bindings &bindings) {
    SubstitutedParts top = substitute_parts(g.raw_num(), bindings);

    // compose each denominator factor separately; pieces stay small and the
    // per-binding denominator powers cancel exactly across the two sides
    std::map<int, int> den_balance = top.den_exponents; // power owed by the numerator side
    RationalFunction::Factors factors;
    for (auto &[f, e] : g.den_factors()) {
        SubstitutedParts part = substitute_parts(f, bindings);
        if (part.num.is_zero()) throw ZeroDenominatorAfterSubstitution();
        factors.emplace_back(std::move(part.num), e);
        for (auto &[v, de] : part.den_exponents) den_balance[v] -= de * e;
    }

    Polynomial num = std::move(top.num);
    for (auto &[v, balance] : den_balance) {
        if (balance == 0) continue;
        const Polynomial &d = bindings.at(v).den();
        if (d.is_constant()) {
            if (d.constant_value() != 1)
                num = num.scaled(rational_pow(d.constant_value(), -balance));
            continue;
        }
        if (balance > 0) {
            factors.emplace_back(d, balance);
        } else {
            num = num * d.pow(-balance);
        }
    }
    return RationalFunction::from_factored(std::move(num), std::move(factors));
}

bool eq(const RationalFunction &a, const RationalFunction &b) {
    return (a.num() * b.den() - b.num() * a.den()).is_zero();
}

std::optional<BigRational> eval_rational(const RationalFunction &g,
                                         const std::vector<BigRational> &point) {
    BigRational d = g.den().eval(point);
    if (d == 0) return std::nullopt;
    return g.num().eval(point) / d;
}

} // namespace ratobs
