#include "ratobs/groebner.hpp"

#include <algorithm>

#include "ratobs/errors.hpp"

namespace ratobs {

namespace {

// rough coefficient mass, used only to break selection ties deterministically
long coefficient_size(const Polynomial &p) {
    long s = 0;
    for (auto &[m, c] : p.terms())
        s += static_cast<long>(numerator(c).str().size() + denominator(c).str().size());
    return s;
}

void check_budget(long steps, long budget) {
    if (budget >= 0 && steps > budget)
        throw ResourceExceeded("Groebner reduction budget (" + std::to_string(budget) + " steps)");
}

} // namespace

Polynomial reduce(const Polynomial &p, const std::vector<Polynomial> &basis,
                  const MonomialOrder &order, long *steps, long max_steps) {
    Polynomial rem(p.table());
    Polynomial work = p;
    long local = 0;
    long &count = steps ? *steps : local;
    while (!work.is_zero()) {
        const Monomial &lm = work.leading_monomial(order);
        bool divided = false;
        for (const Polynomial &g : basis) {
            auto q = lm.divided_by(g.leading_monomial(order));
            if (!q) continue;
            BigRational c = work.leading_coefficient(order) / g.leading_coefficient(order);
            work = work - g.times(*q, c);
            ++count;
            check_budget(count, max_steps);
            divided = true;
            break;
        }
        if (!divided) {
            BigRational c = work.leading_coefficient(order);
            rem.add_term(lm, c);
            work = work - Polynomial::constant(work.table(), c).times(lm, 1);
        }
    }
    return rem;
}

Polynomial s_polynomial(const Polynomial &f, const Polynomial &g, const MonomialOrder &order) {
    const Monomial &lf = f.leading_monomial(order);
    const Monomial &lg = g.leading_monomial(order);
    Monomial l = Monomial::lcm(lf, lg);
    Polynomial a = f.times(*l.divided_by(lf), BigRational(1) / f.leading_coefficient(order));
    Polynomial b = g.times(*l.divided_by(lg), BigRational(1) / g.leading_coefficient(order));
    return a - b;
}

GroebnerBasis buchberger(std::vector<Polynomial> generators, const MonomialOrder &order,
                         const GroebnerConfig &cfg) {
    std::vector<Polynomial> G;
    for (auto &g : generators)
        if (!g.is_zero()) G.push_back(g.integer_primitive());

    struct Pair {
        size_t i, j;
        Monomial lcm;
        long size;
    };
    std::vector<Pair> pairs;
    auto push_pairs = [&](size_t j) {
        for (size_t i = 0; i < j; ++i) {
            Monomial l = Monomial::lcm(G[i].leading_monomial(order), G[j].leading_monomial(order));
            pairs.push_back({i, j, l, coefficient_size(G[i]) + coefficient_size(G[j])});
        }
    };
    for (size_t j = 0; j < G.size(); ++j) push_pairs(j);

    auto pick = [&]() {
        size_t best = 0;
        for (size_t k = 1; k < pairs.size(); ++k) {
            int c = order.compare(pairs[k].lcm, pairs[best].lcm);
            if (c < 0 || (c == 0 && pairs[k].size < pairs[best].size) ||
                (c == 0 && pairs[k].size == pairs[best].size &&
                 std::tie(pairs[k].i, pairs[k].j) < std::tie(pairs[best].i, pairs[best].j)))
                best = k;
        }
        Pair p = pairs[best];
        pairs.erase(pairs.begin() + static_cast<long>(best));
        return p;
    };

    long steps = 0;
    while (!pairs.empty()) {
        Pair p = pick();
        const Monomial &li = G[p.i].leading_monomial(order);
        const Monomial &lj = G[p.j].leading_monomial(order);
        // product criterion: coprime leading monomials reduce to zero anyway
        if (li.times(lj) == p.lcm) continue;
        Polynomial s = s_polynomial(G[p.i], G[p.j], order);
        Polynomial r = reduce(s, G, order, &steps, cfg.max_reductions);
        if (r.is_zero()) continue;
        G.push_back(r.integer_primitive());
        push_pairs(G.size() - 1);
    }

    // minimalize: drop generators whose leading monomial another one divides
    // (keeping the first among equal leading monomials)
    std::vector<Polynomial> minimal;
    for (size_t i = 0; i < G.size(); ++i) {
        bool redundant = false;
        const Monomial &li = G[i].leading_monomial(order);
        for (size_t j = 0; j < G.size() && !redundant; ++j) {
            if (i == j) continue;
            const Monomial &lj = G[j].leading_monomial(order);
            if (lj.divides(li) && (!(li == lj) || j < i)) redundant = true;
        }
        if (!redundant) minimal.push_back(G[i]);
    }

    // interreduce: reduce each generator by the others
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < minimal.size(); ++i) {
            std::vector<Polynomial> others;
            for (size_t j = 0; j < minimal.size(); ++j)
                if (j != i) others.push_back(minimal[j]);
            Polynomial r = reduce(minimal[i], others, order, &steps, cfg.max_reductions);
            if (r.is_zero()) {
                minimal.erase(minimal.begin() + static_cast<long>(i));
                changed = true;
                break;
            }
            Polynomial rp = r.integer_primitive();
            if (!(rp == minimal[i])) {
                minimal[i] = rp;
                changed = true;
            }
        }
    }

    std::sort(minimal.begin(), minimal.end(), [&](const Polynomial &a, const Polynomial &b) {
        return order.compare(a.leading_monomial(order), b.leading_monomial(order)) < 0;
    });

    GroebnerBasis basis{std::move(minimal), order};
    if (cfg.self_check && !is_groebner_basis(basis))
        throw Error("Buchberger self-check failed: an S-polynomial does not reduce to zero");
    return basis;
}

bool is_groebner_basis(const GroebnerBasis &basis) {
    const auto &G = basis.generators;
    for (size_t i = 0; i < G.size(); ++i)
        for (size_t j = i + 1; j < G.size(); ++j) {
            Polynomial s = s_polynomial(G[i], G[j], basis.order);
            if (!reduce(s, G, basis.order).is_zero()) return false;
        }
    return true;
}

} // namespace ratobs
