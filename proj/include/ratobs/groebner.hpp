#pragma once

#include <vector>

#include "ratobs/polynomial.hpp"

namespace ratobs {

struct GroebnerBasis {
    std::vector<Polynomial> generators; // reduced, integer-primitive, sorted
    MonomialOrder order;
};

struct GroebnerConfig {
    long max_reductions = 200000; // reduction-step budget; ResourceExceeded beyond
    bool self_check = true;       // re-reduce every S-polynomial of the result
};

// Remainder of p on division by the basis; deterministic (divisors tried in
// order). `steps` accumulates reduction work against the budget.
Polynomial reduce(const Polynomial &p, const std::vector<Polynomial> &basis,
                  const MonomialOrder &order, long *steps = nullptr,
                  long max_steps = -1);

Polynomial s_polynomial(const Polynomial &f, const Polynomial &g, const MonomialOrder &order);

// Buchberger with normal pair selection (smallest lcm first, coefficient
// size breaking ties). Numeric coefficients only: instantiate parameters
// before calling. Returns the reduced basis.
GroebnerBasis buchberger(std::vector<Polynomial> generators, const MonomialOrder &order,
                         const GroebnerConfig &cfg = {});

// All S-polynomials of basis pairs reduce to zero.
bool is_groebner_basis(const GroebnerBasis &basis);

} // namespace ratobs
