#pragma once

#include "ratobs/system.hpp"

namespace ratobs {

// Directional derivative of g along the system drift:
// sum_j (dg/dx_j) * f_j, normalized.
RationalFunction lie_derivative(const RationalFunction &g, const RationalSystem &sys);

// Stacked output derivatives s_1, s_2, ... renumbered across output blocks:
// the first m_y entries are h, and every later block is the entrywise Lie
// derivative of the previous one. x_hat = s(x) is the candidate state of the
// output-based realization.
struct SChain {
    const RationalSystem *sys = nullptr;
    int order = 0;                        // number of blocks
    std::vector<RationalFunction> entries; // order * m_y, flat

    int m_y() const { return sys->m_y(); }
    int length() const { return static_cast<int>(entries.size()); }
};

// Per-entry growth ceiling; expression swell beyond this raises
// ResourceExceeded rather than grinding on.
inline constexpr int kDefaultTermCeiling = 20000;

// Builds (or extends) the chain to `order` blocks. Passing the chain from a
// lower order reuses its entries.
SChain build_s_chain(const RationalSystem &sys, int order,
                     const SChain *previous = nullptr, int term_ceiling = kDefaultTermCeiling);

} // namespace ratobs
