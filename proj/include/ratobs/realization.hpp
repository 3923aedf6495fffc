#pragma once

#include "ratobs/inverse.hpp"

namespace ratobs {

// Output-based realization in observer coordinates xo_1..xo_{n_o}: a block
// shift (d/dt xo_i = xo_{i+m_y}) with the drift b_o in the last output
// block, b_o,j = s_{n_o+j}(r(xo)). The output map picks the first block,
// y = xo_{1:m_y}.
struct OutputRealization {
    const RationalSystem *sys = nullptr;
    SChain chain;
    InverseMap inverse;
    int n_o = 0, m_y = 0;
    std::vector<int> xo_vars;
    std::vector<RationalFunction> f_or; // n_o components over xo
    std::vector<RationalFunction> b_o;  // the last m_y components of f_or
    std::vector<RationalFunction> x_o0; // s(x0): constants once parameters are bound
    SystemKind kind = SystemKind::Rational;
};

OutputRealization output_based_realization(const RationalSystem &sys, const SChain &chain,
                                           const InverseMap &inv,
                                           int term_ceiling = kDefaultTermCeiling);

// Numeric x_o(0) = s(x0); base_point supplies parameter values.
std::vector<double> initial_observer_state(const OutputRealization &real,
                                           const std::vector<double> &base_point);

struct RealizationCheckReport {
    double max_rel_deviation = 0;
    int samples = 0;
};

// Along a sampled system trajectory, the finite-difference derivative of
// s(x(t)) must match f_or(s(x(t))). base_point supplies parameter values.
RealizationCheckReport realization_selfcheck(const OutputRealization &real,
                                             const std::vector<double> &times,
                                             const std::vector<std::vector<double>> &states,
                                             const std::vector<double> &base_point);

} // namespace ratobs
