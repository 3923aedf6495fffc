#include "ratobs/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ratobs/errors.hpp"

namespace ratobs {

// ---------------------------------------------------------------------------
// Monomial

Monomial Monomial::times(const Monomial &o) const {
    Monomial out;
    out.exps_.reserve(exps_.size() + o.exps_.size());
    auto a = exps_.begin(), b = o.exps_.begin();
    while (a != exps_.end() || b != o.exps_.end()) {
        if (b == o.exps_.end() || (a != exps_.end() && a->first < b->first)) {
            out.exps_.push_back(*a++);
        } else if (a == exps_.end() || b->first < a->first) {
            out.exps_.push_back(*b++);
        } else {
            out.exps_.emplace_back(a->first, a->second + b->second);
            ++a, ++b;
        }
    }
    return out;
}

std::optional<Monomial> Monomial::divided_by(const Monomial &o) const {
    Monomial out;
    auto a = exps_.begin();
    for (auto &[v, e] : o.exps_) {
        while (a != exps_.end() && a->first < v) out.exps_.push_back(*a++);
        if (a == exps_.end() || a->first != v || a->second < e) return std::nullopt;
        if (a->second > e) out.exps_.emplace_back(v, a->second - e);
        ++a;
    }
    while (a != exps_.end()) out.exps_.push_back(*a++);
    return out;
}

Monomial Monomial::lcm(const Monomial &a, const Monomial &b) {
    Monomial out;
    auto i = a.exps_.begin(), j = b.exps_.begin();
    while (i != a.exps_.end() || j != b.exps_.end()) {
        if (j == b.exps_.end() || (i != a.exps_.end() && i->first < j->first)) {
            out.exps_.push_back(*i++);
        } else if (i == a.exps_.end() || j->first < i->first) {
            out.exps_.push_back(*j++);
        } else {
            out.exps_.emplace_back(i->first, std::max(i->second, j->second));
            ++i, ++j;
        }
    }
    return out;
}

Monomial Monomial::without(int v) const {
    Monomial out;
    for (auto &[w, e] : exps_)
        if (w != v) out.exps_.emplace_back(w, e);
    return out;
}

Monomial Monomial::with_exponent(int v, int e) const {
    Monomial out = without(v);
    if (e > 0) {
        auto pos = std::lower_bound(out.exps_.begin(), out.exps_.end(), v,
                                    [](const auto &p, int w) { return p.first < w; });
        out.exps_.insert(pos, {v, e});
    }
    return out;
}

int grevlex_compare(const Monomial &a, const Monomial &b) {
    int da = a.total_degree(), db = b.total_degree();
    if (da != db) return da < db ? -1 : 1;
    // Equal degree: the last (highest-index) variable where the exponents
    // differ decides; the smaller exponent there wins.
    auto &ea = a.exponents();
    auto &eb = b.exponents();
    auto i = ea.rbegin();
    auto j = eb.rbegin();
    while (i != ea.rend() || j != eb.rend()) {
        if (j == eb.rend()) return -1; // a alone has a positive exponent at the highest remaining slot
        if (i == ea.rend()) return 1;
        if (i->first != j->first) {
            // the higher-index variable appears in exactly one of them
            return i->first > j->first ? -1 : 1;
        }
        if (i->second != j->second) return i->second > j->second ? -1 : 1;
        ++i, ++j;
    }
    return 0;
}

int MonomialOrder::compare(const Monomial &a, const Monomial &b) const {
    if (kind == Kind::Grevlex) return grevlex_compare(a, b);
    for (int v : priority) {
        int ea = a.degree_in(v), eb = b.degree_in(v);
        if (ea != eb) return ea < eb ? -1 : 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Work budget

namespace {
struct BudgetState {
    long limit = 0;
    long used = 0;
};
thread_local BudgetState *active_budget = nullptr;
} // namespace

AlgebraBudget::AlgebraBudget(long limit) {
    if (!active_budget) {
        active_budget = new BudgetState{limit, 0};
        installed_ = true;
    }
}

AlgebraBudget::~AlgebraBudget() {
    if (installed_) {
        delete active_budget;
        active_budget = nullptr;
    }
}

void AlgebraBudget::charge(long amount) {
    if (!active_budget) return;
    active_budget->used += amount;
    if (active_budget->used > active_budget->limit)
        throw ResourceExceeded("polynomial work budget (" +
                               std::to_string(active_budget->limit) + " term operations)");
}

// ---------------------------------------------------------------------------
// Polynomial

static void require_same_table(const Polynomial &a, const Polynomial &b) {
    if (a.table() && b.table() && a.table() != b.table())
        throw Error("operands use different variable tables");
}

Polynomial Polynomial::constant(VarTablePtr table, const BigRational &c) {
    Polynomial p(std::move(table));
    p.add_term(Monomial{}, c);
    return p;
}

Polynomial Polynomial::variable(VarTablePtr table, int v) {
    Polynomial p(std::move(table));
    p.add_term(Monomial::variable(v), 1);
    return p;
}

void Polynomial::add_term(const Monomial &m, const BigRational &c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

int Polynomial::total_degree() const {
    int d = 0;
    for (auto &[m, c] : terms_) d = std::max(d, m.total_degree());
    return d;
}

int Polynomial::degree_in(int v) const {
    int d = 0;
    for (auto &[m, c] : terms_) d = std::max(d, m.degree_in(v));
    return d;
}

std::set<int> Polynomial::variables() const {
    std::set<int> out;
    for (auto &[m, c] : terms_)
        for (auto &[v, e] : m.exponents()) out.insert(v);
    return out;
}

bool Polynomial::uses_role(VarRole role) const {
    if (!table_) return false;
    for (int v : variables())
        if (table_->role(v) == role) return true;
    return false;
}

Polynomial Polynomial::operator-() const {
    Polynomial out(table_);
    for (auto &[m, c] : terms_) out.terms_.emplace(m, -c);
    return out;
}

Polynomial Polynomial::operator+(const Polynomial &o) const {
    require_same_table(*this, o);
    Polynomial out = *this;
    if (!out.table_) out.table_ = o.table_;
    for (auto &[m, c] : o.terms_) out.add_term(m, c);
    return out;
}

Polynomial Polynomial::operator-(const Polynomial &o) const {
    require_same_table(*this, o);
    Polynomial out = *this;
    if (!out.table_) out.table_ = o.table_;
    for (auto &[m, c] : o.terms_) out.add_term(m, -c);
    return out;
}

Polynomial Polynomial::operator*(const Polynomial &o) const {
    require_same_table(*this, o);
    AlgebraBudget::charge(static_cast<long>(terms_.size()) *
                          static_cast<long>(o.terms_.size()));
    Polynomial out(table_ ? table_ : o.table_);
    for (auto &[ma, ca] : terms_)
        for (auto &[mb, cb] : o.terms_) out.add_term(ma.times(mb), ca * cb);
    return out;
}

Polynomial Polynomial::times(const Monomial &m, const BigRational &c) const {
    Polynomial out(table_);
    if (c == 0) return out;
    for (auto &[mt, ct] : terms_) out.terms_.emplace(mt.times(m), ct * c);
    return out;
}

Polynomial Polynomial::scaled(const BigRational &c) const {
    Polynomial out(table_);
    if (c == 0) return out;
    for (auto &[m, ct] : terms_) out.terms_.emplace(m, ct * c);
    return out;
}

Polynomial Polynomial::pow(int e) const {
    if (e < 0) throw Error("negative polynomial power");
    Polynomial out = Polynomial::constant(table_, 1);
    Polynomial base = *this;
    while (e > 0) {
        if (e & 1) out = out * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return out;
}

Polynomial Polynomial::partial(int v) const {
    Polynomial out(table_);
    for (auto &[m, c] : terms_) {
        int e = m.degree_in(v);
        if (e == 0) continue;
        out.add_term(m.with_exponent(v, e - 1), c * e);
    }
    return out;
}

std::vector<Polynomial> Polynomial::coefficients_in(int v) const {
    std::vector<Polynomial> out(degree_in(v) + 1, Polynomial(table_));
    for (auto &[m, c] : terms_) {
        int e = m.degree_in(v);
        out[e].add_term(m.without(v), c);
    }
    return out;
}

Polynomial Polynomial::coefficient_of(int v, int e) const {
    Polynomial out(table_);
    for (auto &[m, c] : terms_)
        if (m.degree_in(v) == e) out.add_term(m.without(v), c);
    return out;
}

const Monomial &Polynomial::leading_monomial(const MonomialOrder &ord) const {
    if (terms_.empty()) throw Error("leading term of zero polynomial");
    if (ord.kind == MonomialOrder::Kind::Grevlex) return terms_.rbegin()->first;
    const Monomial *best = &terms_.begin()->first;
    for (auto &[m, c] : terms_)
        if (ord.greater(m, *best)) best = &m;
    return *best;
}

BigRational Polynomial::leading_coefficient(const MonomialOrder &ord) const {
    return terms_.at(leading_monomial(ord));
}

BigRational Polynomial::eval(const std::vector<BigRational> &point) const {
    BigRational acc = 0;
    for (auto &[m, c] : terms_) {
        BigRational t = c;
        for (auto &[v, e] : m.exponents()) {
            BigRational p = point.at(v);
            for (int i = 0; i < e; ++i) t *= p;
        }
        acc += t;
    }
    return acc;
}

double Polynomial::eval_double(const std::vector<double> &point) const {
    double acc = 0;
    for (auto &[m, c] : terms_) {
        double t = to_double(c);
        for (auto &[v, e] : m.exponents()) t *= std::pow(point.at(v), e);
        acc += t;
    }
    return acc;
}

Polynomial Polynomial::integer_primitive() const {
    if (terms_.empty()) return *this;
    BigInt den_lcm = 1;
    for (auto &[m, c] : terms_) den_lcm = boost::multiprecision::lcm(den_lcm, denominator(c));
    BigInt num_gcd = 0;
    for (auto &[m, c] : terms_) num_gcd = boost::multiprecision::gcd(num_gcd, BigInt(numerator(c) * (den_lcm / denominator(c))));
    BigRational scale(den_lcm, num_gcd);
    if (terms_.rbegin()->second < 0) scale = -scale; // positive grevlex-leading coefficient
    return scaled(scale);
}

std::string Polynomial::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // grevlex-descending
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto &[m, c] = *it;
        BigRational a = c;
        if (first) {
            if (a < 0) {
                os << "-";
                a = -a;
            }
        } else {
            os << (a < 0 ? " - " : " + ");
            if (a < 0) a = -a;
        }
        first = false;
        bool need_coeff = m.is_one() || a != 1;
        if (need_coeff) os << to_string(a);
        bool need_star = need_coeff;
        for (auto &[v, e] : m.exponents()) {
            if (need_star) os << "*";
            os << (table_ ? table_->name(v) : "v" + std::to_string(v));
            if (e > 1) os << "^" << e;
            need_star = true;
        }
    }
    return os.str();
}

Polynomial poly_from_terms(VarTablePtr table, Polynomial::TermMap terms) {
    Polynomial p(std::move(table));
    p.terms_ = std::move(terms);
    return p;
}

// ---------------------------------------------------------------------------
// Division and gcd

std::optional<Polynomial> divide_exact(const Polynomial &a, const Polynomial &b) {
    if (b.is_zero()) return std::nullopt;
    Polynomial rem = a;
    Polynomial quot(a.table() ? a.table() : b.table());
    MonomialOrder ord = MonomialOrder::grevlex();
    const Monomial &lb = b.leading_monomial(ord);
    BigRational cb = b.leading_coefficient(ord);
    while (!rem.is_zero()) {
        auto q = rem.leading_monomial(ord).divided_by(lb);
        if (!q) return std::nullopt;
        BigRational c = rem.leading_coefficient(ord) / cb;
        quot.add_term(*q, c);
        rem = rem - b.times(*q, c);
    }
    return quot;
}

Polynomial pseudo_remainder(const Polynomial &a, const Polynomial &b, int v) {
    int db = b.degree_in(v);
    if (db == 0) throw Error("pseudo-remainder by polynomial constant in the main variable");
    int delta = a.degree_in(v) - db;
    Polynomial lb = b.coefficient_of(v, db);
    Polynomial r = a;
    int dr = r.degree_in(v);
    int multiplications = 0;
    while (!r.is_zero() && dr >= db) {
        Polynomial lr = r.coefficient_of(v, dr);
        Polynomial shift = lr.times(Monomial::variable(v, dr - db), 1);
        r = r * lb - b * shift;
        ++multiplications;
        int d2 = r.degree_in(v);
        if (!r.is_zero() && d2 >= dr) throw Error("pseudo-remainder failed to reduce degree");
        dr = d2;
    }
    // match the standard lc(b)^{delta+1} * a mod b exactly
    for (int i = multiplications; i < delta + 1; ++i) r = r * lb;
    return r;
}

Polynomial content_in(const Polynomial &p, int v) {
    Polynomial g(p.table());
    for (auto &c : p.coefficients_in(v)) {
        if (c.is_zero()) continue;
        g = gcd_poly(g, c);
        if (g.is_one()) break;
    }
    return g;
}

Polynomial primitive_part_in(const Polynomial &p, int v) {
    if (p.is_zero()) return p;
    auto q = divide_exact(p, content_in(p, v));
    if (!q) throw Error("content does not divide its polynomial");
    return *q;
}

namespace {

// Univariate gcd degree (monic Euclid); coefficients are exact rationals.
int univariate_gcd_degree(std::map<int, BigRational> a, std::map<int, BigRational> b) {
    auto degree = [](const std::map<int, BigRational> &f) {
        return f.empty() ? -1 : f.rbegin()->first;
    };
    while (!b.empty()) {
        // a mod b
        int db = degree(b);
        BigRational lb = b.rbegin()->second;
        while (degree(a) >= db) {
            int da = degree(a);
            BigRational factor = a.rbegin()->second / lb;
            for (auto &[e, c] : b) {
                auto it = a.emplace(e + da - db, 0).first;
                it->second -= factor * c;
                if (it->second == 0) a.erase(it);
            }
        }
        std::swap(a, b);
    }
    return degree(a);
}

// Projects both polynomials to univariate in v at random integer points for
// the other variables. When the projection keeps both leading degrees, a
// trivial univariate gcd proves deg_v(gcd) = 0.
bool proves_degree_zero_in(const Polynomial &p, const Polynomial &q, int v,
                           std::mt19937_64 &rng) {
    std::uniform_int_distribution<long> draw(-47, 47);
    for (int attempt = 0; attempt < 3; ++attempt) {
        std::map<int, BigRational> point;
        auto project = [&](const Polynomial &f) {
            std::map<int, BigRational> uni;
            for (auto &[m, c] : f.terms()) {
                BigRational val = c;
                int ev = 0;
                for (auto &[w, e] : m.exponents()) {
                    if (w == v) {
                        ev = e;
                        continue;
                    }
                    auto it = point.find(w);
                    if (it == point.end()) it = point.emplace(w, BigRational(draw(rng))).first;
                    for (int i = 0; i < e; ++i) val *= it->second;
                }
                auto slot = uni.emplace(ev, 0).first;
                slot->second += val;
                if (slot->second == 0) uni.erase(slot);
            }
            return uni;
        };
        std::map<int, BigRational> up = project(p), uq = project(q);
        bool degrees_kept = !up.empty() && up.rbegin()->first == p.degree_in(v) &&
                            !uq.empty() && uq.rbegin()->first == q.degree_in(v);
        if (degrees_kept && univariate_gcd_degree(up, uq) == 0) return true;
    }
    return false;
}

bool provably_coprime(const Polynomial &p, const Polynomial &q) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    for (int v : p.variables()) {
        if (q.degree_in(v) == 0) continue; // gcd cannot involve v
        if (!proves_degree_zero_in(p, q, v, rng)) return false;
    }
    return true;
}

} // namespace

Polynomial gcd_poly(const Polynomial &p, const Polynomial &q) {
    if (p.is_zero()) return q.integer_primitive();
    if (q.is_zero()) return p.integer_primitive();
    std::set<int> vars = p.variables();
    for (int v : q.variables()) vars.insert(v);
    VarTablePtr table = p.table() ? p.table() : q.table();
    if (vars.empty()) return Polynomial::constant(table, 1);
    if (p.is_constant() || q.is_constant()) return Polynomial::constant(table, 1);
    if (provably_coprime(p, q)) return Polynomial::constant(table, 1);
    // main variable with the fewest pseudo-division steps ahead of it
    int v = *vars.rbegin();
    {
        int best_min = -1, best_max = -1;
        for (int w : vars) {
            int dp = p.degree_in(w), dq = q.degree_in(w);
            if (dp == 0 || dq == 0) continue; // gcd is free of w; useless main var
            int lo = std::min(dp, dq), hi = std::max(dp, dq);
            if (best_min < 0 || lo < best_min || (lo == best_min && hi < best_max)) {
                best_min = lo;
                best_max = hi;
                v = w;
            }
        }
        if (best_min < 0) return Polynomial::constant(table, 1); // no shared variable
    }

    Polynomial cp = content_in(p, v), cq = content_in(q, v);
    Polynomial g0 = gcd_poly(cp, cq);
    Polynomial a = primitive_part_in(p, v).integer_primitive();
    Polynomial b = primitive_part_in(q, v).integer_primitive();
    if (a.degree_in(v) < b.degree_in(v)) std::swap(a, b);

    // subresultant remainder sequence: each pseudo-remainder divides exactly
    // by g * h^delta, keeping coefficients tame without per-step contents
    Polynomial g = Polynomial::constant(table, 1);
    Polynomial h = Polynomial::constant(table, 1);
    while (true) {
        if (b.is_zero()) return (g0 * primitive_part_in(a, v).integer_primitive()).integer_primitive();
        if (b.degree_in(v) == 0) return g0.integer_primitive();
        int delta = a.degree_in(v) - b.degree_in(v);
        Polynomial r = pseudo_remainder(a, b, v);
        Polynomial divisor = g * h.pow(delta);
        a = b;
        if (r.is_zero()) {
            b = r;
            continue;
        }
        auto next = divide_exact(r, divisor);
        if (!next) throw Error("subresultant division was not exact");
        b = *next;
        g = a.coefficient_of(v, a.degree_in(v));
        if (delta == 1) {
            h = g;
        } else if (delta > 1) {
            auto hh = divide_exact(g.pow(delta), h.pow(delta - 1));
            if (!hh) throw Error("subresultant h-update was not exact");
            h = *hh;
        }
    }
}

Polynomial parameter_content(const Polynomial &p) {
    if (p.is_zero() || !p.table()) return p;
    const auto &table = *p.table();
    // group terms by the non-parameter part of the monomial
    std::map<Monomial, Polynomial, MonomialGrevlexLess> groups;
    for (auto &[m, c] : p.terms()) {
        Monomial param_part, other_part;
        for (auto &[v, e] : m.exponents()) {
            if (table.role(v) == VarRole::Parameter)
                param_part = param_part.with_exponent(v, e);
            else
                other_part = other_part.with_exponent(v, e);
        }
        auto it = groups.find(other_part);
        if (it == groups.end()) it = groups.emplace(other_part, Polynomial(p.table())).first;
        it->second.add_term(param_part, c);
    }
    Polynomial g(p.table());
    for (auto &[m, coeff] : groups) {
        g = gcd_poly(g, coeff);
        if (g.is_one()) break;
    }
    return g;
}

Polynomial squarefree_part(const Polynomial &p) {
    if (p.is_zero()) return p;
    Polynomial work = p.integer_primitive();
    if (work.is_constant()) return work;
    int v = *work.variables().rbegin();
    Polynomial c = content_in(work, v);
    auto pp = divide_exact(work, c);
    if (!pp) throw Error("content does not divide its polynomial");
    Polynomial d = pp->partial(v);
    if (!d.is_zero()) {
        Polynomial g = gcd_poly(*pp, d);
        if (!g.is_constant()) {
            auto q = divide_exact(*pp, g);
            if (!q) throw Error("squarefree reduction: gcd does not divide");
            pp = q;
        }
    }
    return (squarefree_part(c) * *pp).integer_primitive();
}

} // namespace ratobs
