#pragma once

#include <string>

#include "ratobs/system.hpp"

namespace ratobs {

// Parses a system definition:
//
//   system name {
//     params a11 a12 = 3/2;
//     states x1 = 1 x2 = 1;
//     d x1 = -a11*x1^3 + a12*x2;
//     d x2 = -x2;
//     output y = x1;
//     assume a12 != 0;
//   }
//
// `#` starts a line comment. Parameters with a bound value are folded into
// the dynamics at parse time; unbound ones stay symbolic. Throws
// SyntaxError, UndefinedSymbol, DimensionMismatch or DenominatorZeroAtX0.
RationalSystem parse_system(const std::string &text);

// Canonical source form; parse_system(render_system(s)) is structurally
// equal to s.
std::string render_system(const RationalSystem &sys);

// Arithmetic expression over the variables of an existing table.
RationalFunction parse_expression(const std::string &text, const VarTablePtr &table);

} // namespace ratobs
