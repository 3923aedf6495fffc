#include "ratobs/lie.hpp"

#include "ratobs/errors.hpp"

namespace ratobs {

RationalFunction lie_derivative(const RationalFunction &g, const RationalSystem &sys) {
    RationalFunction acc = RationalFunction::constant(sys.table, 0);
    for (int j = 0; j < sys.n(); ++j) {
        RationalFunction dg = partial(g, sys.state_vars[j]);
        if (dg.is_zero()) continue;
        acc = acc + dg * sys.f[j];
    }
    return acc;
}

SChain build_s_chain(const RationalSystem &sys, int order, const SChain *previous,
                     int term_ceiling) {
    if (order < 1) throw Error("chain order must be at least 1");
    SChain chain;
    chain.sys = &sys;
    if (previous && previous->sys == &sys && previous->order > 0) {
        chain = *previous;
    } else {
        chain.order = 1;
        chain.entries = sys.h;
    }
    const int m_y = sys.m_y();
    while (chain.order < order) {
        int base = (chain.order - 1) * m_y;
        for (int j = 0; j < m_y; ++j) {
            RationalFunction next = lie_derivative(chain.entries[base + j], sys);
            if (next.term_count() > term_ceiling)
                throw ResourceExceeded("chain entry grew past " +
                                       std::to_string(term_ceiling) + " terms");
            chain.entries.push_back(next);
        }
        ++chain.order;
    }
    if (chain.order > order) {
        chain.order = order;
        chain.entries.resize(static_cast<size_t>(order) * m_y);
    }
    return chain;
}

} // namespace ratobs
