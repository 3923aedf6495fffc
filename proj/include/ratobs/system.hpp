#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ratobs/rational_function.hpp"

namespace ratobs {

enum class SystemKind { Polynomial, Rational };

// dx/dt = f(x), y = h(x), x(0) = x0, with f and h exact rational functions
// of the state over Q(parameters). Assumptions are polynomials the user (or
// the synthesis itself) asserts to be nonzero.
struct RationalSystem {
    std::string name;
    VarTablePtr table;
    std::vector<int> state_vars; // table indices, declaration order
    std::vector<int> param_vars;

    std::vector<RationalFunction> f; // one per state
    std::vector<std::string> output_names;
    std::vector<RationalFunction> h; // one per output
    std::vector<BigRational> x0;
    std::vector<std::optional<BigRational>> param_values; // parallel to param_vars
    std::vector<Polynomial> assumptions;
    SystemKind kind = SystemKind::Polynomial;

    int n() const { return static_cast<int>(state_vars.size()); }
    int m_y() const { return static_cast<int>(h.size()); }

    bool all_params_bound() const {
        for (auto &v : param_values)
            if (!v) return false;
        return true;
    }

    std::optional<BigRational> param_value(int table_var) const {
        for (size_t i = 0; i < param_vars.size(); ++i)
            if (param_vars[i] == table_var) return param_values[i];
        return std::nullopt;
    }
};

// A denominator is trivial when it involves no variable beyond parameters;
// such values are polynomial in the state with coefficients in Q(parameters).
bool denominator_trivial(const RationalFunction &g);

SystemKind kind_of(const std::vector<RationalFunction> &components);

bool structurally_equal(const RationalSystem &a, const RationalSystem &b);

} // namespace ratobs
