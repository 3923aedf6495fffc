#include "ratobs/realization.hpp"

#include <cmath>

#include "ratobs/errors.hpp"

namespace ratobs {

namespace {

std::vector<int> ensure_observer_vars(const VarTablePtr &table, int n_o) {
    std::vector<int> out;
    for (int i = 1; i <= n_o; ++i) {
        std::string name = "xo" + std::to_string(i);
        int v = table->find(name);
        if (v >= 0 && table->role(v) == VarRole::Auxiliary) {
            out.push_back(v);
        } else if (v < 0) {
            out.push_back(table->add(name, VarRole::Auxiliary));
        } else {
            out.push_back(table->add("_" + name, VarRole::Auxiliary));
        }
    }
    return out;
}

} // namespace

OutputRealization output_based_realization(const RationalSystem &sys, const SChain &chain,
                                           const InverseMap &inv, int term_ceiling) {
    if (inv.m_used != chain.order)
        throw DimensionMismatch("inverse was computed at a different chain order");
    OutputRealization real;
    real.sys = &sys;
    real.inverse = inv;
    real.m_y = sys.m_y();
    real.n_o = chain.length();
    real.xo_vars = ensure_observer_vars(sys.table, real.n_o);

    // one extra block supplies the drift entries
    SChain extended = build_s_chain(sys, chain.order + 1, &chain, term_ceiling);
    real.chain = chain;

    // state -> r(xo): the inverse with tags renamed to observer coordinates
    std::vector<int> tags = ensure_tags(sys.table, chain.length());
    Bindings tag_to_xo;
    for (int k = 0; k < real.n_o; ++k)
        tag_to_xo[tags[k]] = RationalFunction::variable(sys.table, real.xo_vars[k]);
    Bindings state_to_r;
    for (int i = 0; i < sys.n(); ++i)
        state_to_r[sys.state_vars[i]] = substitute(inv.r[i], tag_to_xo);

    // shift components; the step-3 formula s_{i+m_y}(r(xo)) must agree with
    // the shift, identically for a square transformation and after pullback
    // through xo = s(x) otherwise
    for (int i = 0; i + real.m_y < real.n_o; ++i) {
        RationalFunction shifted = RationalFunction::variable(sys.table, real.xo_vars[i + real.m_y]);
        RationalFunction formula = substitute(extended.entries[i + real.m_y], state_to_r);
        if (!eq(formula, shifted)) {
            Bindings xo_to_s;
            for (int k = 0; k < real.n_o; ++k) xo_to_s[real.xo_vars[k]] = chain.entries[k];
            if (!eq(substitute(formula, xo_to_s), extended.entries[i + real.m_y]))
                throw ShiftStructureViolation("component " + std::to_string(i + 1));
        }
        real.f_or.push_back(shifted);
    }
    for (int j = 0; j < real.m_y; ++j) {
        RationalFunction drift = substitute(extended.entries[real.n_o + j], state_to_r);
        if (drift.term_count() > term_ceiling)
            throw ResourceExceeded("drift entry grew past " + std::to_string(term_ceiling) +
                                   " terms");
        real.f_or.push_back(drift);
        real.b_o.push_back(drift);
    }

    // h = C_o s(x): the first chain block is the output map itself
    for (int j = 0; j < real.m_y; ++j)
        if (!eq(chain.entries[j], sys.h[j]))
            throw ShiftStructureViolation("output block does not reproduce h");

    // x_o(0) = s(x0), exact
    Bindings at_x0;
    for (int i = 0; i < sys.n(); ++i)
        at_x0[sys.state_vars[i]] = RationalFunction::constant(sys.table, sys.x0[i]);
    for (int k = 0; k < real.n_o; ++k) {
        RationalFunction den_at = substitute(Polynomial(chain.entries[k].den()), at_x0);
        if (den_at.is_zero()) throw DenominatorZeroAtX0(chain.entries[k].str());
        real.x_o0.push_back(substitute(chain.entries[k], at_x0));
    }

    // class closure: a polynomial system with a polynomial inverse must not
    // produce a rational drift (the reverse direction only tightens the class)
    real.kind = kind_of(real.f_or);
    if (sys.kind == SystemKind::Polynomial && inv.kind == SystemKind::Polynomial &&
        real.kind == SystemKind::Rational)
        throw Error("realization left the polynomial class");
    return real;
}

std::vector<double> initial_observer_state(const OutputRealization &real,
                                           const std::vector<double> &base_point) {
    std::vector<double> out;
    for (auto &g : real.x_o0) {
        double den = g.den().eval_double(base_point);
        if (den == 0 || !std::isfinite(den)) throw UndefinedAtPoint(g.str());
        out.push_back(g.num().eval_double(base_point) / den);
    }
    return out;
}

RealizationCheckReport realization_selfcheck(const OutputRealization &real,
                                             const std::vector<double> &times,
                                             const std::vector<std::vector<double>> &states,
                                             const std::vector<double> &base_point) {
    RealizationCheckReport report;
    if (times.size() < 3) return report;
    const RationalSystem &sys = *real.sys;

    auto chain_at = [&](const std::vector<double> &x) {
        std::vector<double> point = base_point;
        for (int i = 0; i < sys.n(); ++i) point[sys.state_vars[i]] = x[i];
        std::vector<double> s(real.n_o);
        for (int k = 0; k < real.n_o; ++k) {
            double den = real.chain.entries[k].den().eval_double(point);
            s[k] = real.chain.entries[k].num().eval_double(point) / den;
        }
        return s;
    };

    for (size_t t = 1; t + 1 < times.size(); ++t) {
        std::vector<double> prev = chain_at(states[t - 1]);
        std::vector<double> here = chain_at(states[t]);
        std::vector<double> next = chain_at(states[t + 1]);
        double dt = times[t + 1] - times[t - 1];

        std::vector<double> point = base_point;
        for (int k = 0; k < real.n_o; ++k) point[real.xo_vars[k]] = here[k];
        for (int k = 0; k < real.n_o; ++k) {
            double den = real.f_or[k].den().eval_double(point);
            if (den == 0 || !std::isfinite(den)) continue;
            double rhs = real.f_or[k].num().eval_double(point) / den;
            double fd = (next[k] - prev[k]) / dt;
            double dev = std::abs(fd - rhs) / std::max({1.0, std::abs(fd), std::abs(rhs)});
            report.max_rel_deviation = std::max(report.max_rel_deviation, dev);
        }
        ++report.samples;
    }
    return report;
}

} // namespace ratobs
